#include "metacsv/service.hpp"

#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include <httplib.h>

#include "metacsv/csv.hpp"
#include "metacsv/errors.hpp"
#include "metacsv/export.hpp"
#include "metacsv/plots.hpp"
#include "metacsv/pooling.hpp"
#include "metacsv/version.hpp"
#include "metacsv/wiki.hpp"

namespace metacsv {

namespace {

enum class ResponseFormat { html, json, csv, r, forest_svg, funnel_svg };

struct AnalysisRequest {
    std::optional<std::string> wiki_title;
    std::optional<std::string> wiki_base;
    std::optional<std::string> direct_url;
    std::optional<std::string> inline_csv;
    Overrides overrides;
    EffectMeasure measure = EffectMeasure::smd_hedges;
    ResponseFormat format = ResponseFormat::html;
    std::optional<long> pmid;
};

const std::map<std::string, Role> kOverrideParams = {
    {"c1n", Role::group1_n},   {"c1m", Role::group1_mean}, {"c1s", Role::group1_sd},
    {"c2n", Role::group2_n},   {"c2m", Role::group2_mean}, {"c2s", Role::group2_sd},
    {"labelcol", Role::label}, {"yearcol", Role::year},    {"e1", Role::events1},
    {"t1", Role::total1},      {"e2", Role::events2},      {"t2", Role::total2},
};

std::string json_escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

int status_for(const std::string& code) {
    if (code == errc::http_failure || code == errc::empty_page) return 502;
    if (code == errc::missing_required_columns || code == errc::insufficient_subjects ||
        code == errc::all_zero_arm || code == errc::empty_input ||
        code == errc::mixed_measures || code == errc::unsupported_measure ||
        code == errc::degenerate_variance) {
        return 422;
    }
    return 400;
}

void error_response(httplib::Response& res, int status, const std::string& code,
                    const std::string& message, const std::string& detail) {
    res.status = status;
    res.set_content("{\"error_code\": \"" + json_escape(code) + "\", \"message\": \"" +
                        json_escape(message) + "\", \"detail\": \"" +
                        json_escape(detail) + "\"}\n",
                    "application/json");
}

void error_response(httplib::Response& res, const Error& e) {
    error_response(res, status_for(e.code()), e.code(), e.message(), e.detail());
}

long parse_long_param(const std::string& name, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long parsed = std::stol(value, &pos);
        if (pos != value.size() || parsed < 0) throw std::invalid_argument(name);
        return parsed;
    } catch (const std::exception&) {
        throw Error(errc::bad_request, "parameter must be a non-negative integer",
                    name + "=" + value);
    }
}

EffectMeasure measure_from_params(const httplib::Params& params) {
    std::string measure = "smd";
    std::string variant = "hedges";
    if (auto it = params.find("measure"); it != params.end()) measure = it->second;
    if (auto it = params.find("variant"); it != params.end()) variant = it->second;
    if (variant != "hedges" && variant != "cohen") {
        throw Error(errc::bad_request, "variant must be cohen or hedges", variant);
    }
    if (measure == "smd") {
        return variant == "cohen" ? EffectMeasure::smd_cohen : EffectMeasure::smd_hedges;
    }
    const auto parsed = measure_from_name(measure);
    if (!parsed) {
        throw Error(errc::bad_request, "unknown measure", measure);
    }
    return *parsed;
}

AnalysisRequest parse_request(const httplib::Params& params) {
    AnalysisRequest req;
    const auto get = [&](const char* name) -> std::optional<std::string> {
        auto it = params.find(name);
        if (it == params.end()) return std::nullopt;
        return it->second;
    };

    req.wiki_title = get("title");
    req.wiki_base = get("base");
    req.direct_url = get("url");
    req.inline_csv = get("csv");
    const int sources = (req.wiki_title ? 1 : 0) + (req.direct_url ? 1 : 0) +
                        (req.inline_csv ? 1 : 0);
    if (sources != 1) {
        throw Error(errc::bad_request,
                    "exactly one source required: title=, url= or csv=");
    }

    for (const auto& [name, role] : kOverrideParams) {
        if (auto value = get(name.c_str())) {
            req.overrides[role] = static_cast<std::size_t>(parse_long_param(name, *value));
        }
    }
    req.measure = measure_from_params(params);

    if (auto pmid = get("pmid")) {
        req.pmid = parse_long_param("pmid", *pmid);
        if (*req.pmid <= 0) {
            throw Error(errc::bad_request, "pmid must be positive", *pmid);
        }
    }

    const std::string format = get("format").value_or("html");
    if (format == "html") req.format = ResponseFormat::html;
    else if (format == "json") req.format = ResponseFormat::json;
    else if (format == "csv") req.format = ResponseFormat::csv;
    else if (format == "r") req.format = ResponseFormat::r;
    else if (format == "forest_svg") req.format = ResponseFormat::forest_svg;
    else if (format == "funnel_svg") req.format = ResponseFormat::funnel_svg;
    else throw Error(errc::bad_request, "unknown format", format);
    return req;
}

std::string encode_query_value(std::string_view value) {
    std::string out;
    for (char c : value) {
        const bool safe = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                          (c >= '0' && c <= '9') || c == '-' || c == '_' ||
                          c == '.' || c == '~';
        if (safe) {
            out += c;
        } else {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "%%%02X", static_cast<unsigned char>(c));
            out += buf;
        }
    }
    return out;
}

/// Canonical query string for the request, minus the format parameter.
std::string base_query(const AnalysisRequest& req) {
    std::string q;
    const auto add = [&](const std::string& name, const std::string& value) {
        if (!q.empty()) q += '&';
        q += name + "=" + encode_query_value(value);
    };
    if (req.wiki_title) add("title", *req.wiki_title);
    if (req.wiki_base) add("base", *req.wiki_base);
    if (req.direct_url) add("url", *req.direct_url);
    if (req.inline_csv) add("csv", *req.inline_csv);
    for (const auto& [name, role] : kOverrideParams) {
        if (auto it = req.overrides.find(role); it != req.overrides.end()) {
            add(name, std::to_string(it->second));
        }
    }
    add("measure", std::string(measure_name(req.measure)));
    if (req.pmid) add("pmid", std::to_string(*req.pmid));
    return q;
}

std::string inline_svg(const SvgDocument& doc) {
    // the XML declaration has no place inside an HTML document
    const auto pos = doc.body.find("?>\n");
    return pos == std::string::npos ? doc.body : doc.body.substr(pos + 3);
}

std::string num3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string html_page(const MetaAnalysisResult& result, const AnalysisRequest& req,
                      const std::string& wiki_base) {
    const std::string heading =
        result.title ? *result.title : std::string("Meta-analysis");
    std::string html =
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\"/>\n<title>" +
        xml_escape(heading) +
        "</title>\n<style>\nbody { font-family: sans-serif; margin: 2em; }\n"
        "table { border-collapse: collapse; }\n"
        "td, th { border: 1px solid #999; padding: 0.3em 0.6em; }\n"
        "</style>\n</head>\n<body>\n";
    html += "<h1>" + xml_escape(heading) + "</h1>\n";

    std::vector<BackLink> links;
    if (req.wiki_title || req.pmid) {
        links = derive_backlinks(req.wiki_title, req.pmid,
                                 req.wiki_base.value_or(wiki_base));
    }
    if (!links.empty()) {
        html += "<p class=\"backlinks\">";
        for (std::size_t i = 0; i < links.size(); ++i) {
            if (i) html += " | ";
            html += "<a href=\"" + xml_escape(links[i].target) + "\">" +
                    xml_escape(links[i].anchor_text) + "</a>";
        }
        html += "</p>\n";
    }

    html += "<h2>Studies</h2>\n<table class=\"studies\">\n"
            "<tr><th>study</th><th>effect</th><th>variance</th><th>n</th></tr>\n";
    for (const auto& est : result.estimates) {
        html += "<tr><td>" + xml_escape(est.study_label) + "</td><td>" +
                num3(est.effect) + "</td><td>" + num3(est.variance) + "</td><td>" +
                std::to_string(est.n_total) + "</td></tr>\n";
    }
    html += "</table>\n";

    const auto pooled_row = [&](const char* name, const PooledResult& p) {
        return std::string("<tr><td>") + name + "</td><td>" + num3(p.effect) +
               "</td><td>" + num3(p.se) + "</td><td>[" + num3(p.ci_low) + ", " +
               num3(p.ci_high) + "]</td><td>" + num3(p.z) + "</td><td>" +
               format_sig12(p.p) + "</td></tr>\n";
    };
    html += "<h2>Pooled results</h2>\n<table class=\"pooled\">\n"
            "<tr><th>model</th><th>effect</th><th>se</th><th>95% CI</th>"
            "<th>z</th><th>p</th></tr>\n";
    html += pooled_row("fixed", result.fixed);
    html += pooled_row("random (DL)", result.random);
    html += "</table>\n";

    const auto& het = result.heterogeneity;
    html += "<p class=\"heterogeneity\">Q=" + num3(het.q) + ", df=" +
            std::to_string(het.df) + ", p_Q=" + format_sig12(het.p_q) + ", I2=" +
            num3(het.i2) + "%, tau2=" + num3(het.tau2) + "</p>\n";

    html += "<h2>Forest plot</h2>\n" + inline_svg(forest_svg(result));
    html += "<h2>Funnel plot</h2>\n" + inline_svg(funnel_svg(result));

    const std::string q = base_query(req);
    html += "<p class=\"formats\">";
    bool first = true;
    for (const auto& [label, fmt] :
         {std::pair<const char*, const char*>{"JSON", "json"},
          {"CSV", "csv"},
          {"R script", "r"},
          {"forest SVG", "forest_svg"},
          {"funnel SVG", "funnel_svg"}}) {
        if (!first) html += " | ";
        first = false;
        html += std::string("<a href=\"/analyze?") + q + "&format=" + fmt + "\">" +
                label + "</a>";
    }
    html += "</p>\n</body>\n</html>\n";
    return html;
}

void handle_analyze(const httplib::Request& http_req, httplib::Response& res,
                    const ServiceConfig& config, const SynonymTable& synonyms) {
    const AnalysisRequest req = parse_request(http_req.params);

    std::string csv_text;
    std::optional<std::string> source_uri;
    std::optional<std::string> title;
    if (req.wiki_title) {
        const std::string base = req.wiki_base.value_or(config.wiki_base_url);
        if (base.empty()) {
            throw Error(errc::bad_request,
                        "no wiki base URL configured; pass base= or set WIKI_BASE_URL");
        }
        const WikiSource source = fetch_csv_page(base, *req.wiki_title);
        csv_text = source.raw_text;
        source_uri = raw_page_url(base, *req.wiki_title);
        std::string page = *req.wiki_title;
        if (page.size() > 4 && page.compare(page.size() - 4, 4, ".csv") == 0) {
            page.erase(page.size() - 4);
        }
        title = page;
    } else if (req.direct_url) {
        csv_text = fetch_url(*req.direct_url);
        source_uri = *req.direct_url;
    } else {
        csv_text = *req.inline_csv;
    }

    StudyTable table = parse_table(csv_text, req.overrides, synonyms);
    table.source_uri = source_uri;
    table.title = title;

    AnalysisConfig config_measure;
    config_measure.measure = req.measure;
    MetaAnalysisResult result = meta_analyze(table, config_measure);
    if (req.pmid) result.pubmed_ids.push_back(*req.pmid);

    switch (req.format) {
        case ResponseFormat::html:
            res.set_content(html_page(result, req, config.wiki_base_url), "text/html");
            break;
        case ResponseFormat::json:
            res.set_content(to_json(result), "application/json");
            break;
        case ResponseFormat::csv:
            res.set_content(to_csv(result), "text/csv");
            break;
        case ResponseFormat::r:
            res.set_content(to_r_script(table, config_measure), "text/plain");
            break;
        case ResponseFormat::forest_svg:
            res.set_content(forest_svg(result).body, "image/svg+xml");
            break;
        case ResponseFormat::funnel_svg:
            res.set_content(funnel_svg(result).body, "image/svg+xml");
            break;
    }
}

void handle_csv(const httplib::Request& http_req, httplib::Response& res,
                const ServiceConfig& config) {
    auto it = http_req.params.find("title");
    if (it == http_req.params.end()) {
        throw Error(errc::bad_request, "title= parameter required");
    }
    auto base_it = http_req.params.find("base");
    const std::string base =
        base_it != http_req.params.end() ? base_it->second : config.wiki_base_url;
    if (base.empty()) {
        throw Error(errc::bad_request,
                    "no wiki base URL configured; pass base= or set WIKI_BASE_URL");
    }
    const WikiSource source = fetch_csv_page(base, it->second);
    const CsvPayload payload = proxy_csv(source);
    res.set_header("Content-Disposition",
                   "attachment; filename=\"" + payload.filename + "\"");
    res.set_content(payload.body, payload.content_type.c_str());
}

template <typename Handler>
auto guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const Error& e) {
            error_response(res, e);
        } catch (const std::exception& e) {
            error_response(res, 500, "InternalError", e.what(), "");
        }
    };
}

}  // namespace

ServiceConfig service_config_from_env() {
    ServiceConfig config;
    if (const char* port = std::getenv("PORT")) {
        config.port = std::atoi(port);
    }
    if (const char* base = std::getenv("WIKI_BASE_URL")) {
        config.wiki_base_url = base;
    }
    return config;
}

void register_routes(httplib::Server& server, const ServiceConfig& config) {
    // loaded once; immutable afterwards, so handlers can share it freely
    const auto synonyms = std::make_shared<const SynonymTable>(SynonymTable::from_env());
    server.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
        res.set_content(std::string("{\"status\": \"ok\", \"version\": \"") +
                            kVersion + "\"}\n",
                        "application/json");
    }));
    server.Get("/analyze",
               guarded([config, synonyms](const httplib::Request& req,
                                          httplib::Response& res) {
                   handle_analyze(req, res, config, *synonyms);
               }));
    server.Get("/csv", guarded([config](const httplib::Request& req, httplib::Response& res) {
        handle_csv(req, res, config);
    }));
}

bool run_service(const ServiceConfig& config) {
    httplib::Server server;
    register_routes(server, config);
    return server.listen(config.bind_address, config.port);
}

}  // namespace metacsv
