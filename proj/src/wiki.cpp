#include "metacsv/wiki.hpp"

#include <httplib.h>

#include "metacsv/errors.hpp"

namespace metacsv {

namespace {

constexpr int kTimeoutSeconds = 5;

bool unreserved(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
           (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' || c == '~' ||
           c == '(' || c == ')' || c == ':' || c == ',';
}

/// Split "http://host:port/some/prefix" into client root and path prefix.
std::pair<std::string, std::string> split_base(const std::string& base_url) {
    const auto scheme = base_url.find("://");
    if (scheme == std::string::npos) {
        throw Error(errc::bad_request, "base URL must include a scheme", base_url);
    }
    const auto slash = base_url.find('/', scheme + 3);
    if (slash == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, slash), prefix};
}

bool transient(const httplib::Result& res) {
    if (!res) return true;
    return res->status == 502 || res->status == 503 || res->status == 504;
}

httplib::Result get_with_retry(const std::string& root, const std::string& path) {
    httplib::Client client(root);
    client.set_connection_timeout(kTimeoutSeconds, 0);
    client.set_read_timeout(kTimeoutSeconds, 0);
    client.set_follow_location(true);
    auto res = client.Get(path);
    if (transient(res)) {
        res = client.Get(path);
    }
    return res;
}

std::string strip_trailing_newlines(std::string text) {
    const auto last = text.find_last_not_of("\r\n");
    if (last == std::string::npos) return text;  // nothing but newlines: keep as-is
    if (last + 1 < text.size()) {
        text.erase(last + 1);
        text += '\n';
    }
    return text;
}

std::string strip_csv_suffix(const std::string& title) {
    const std::string suffix = ".csv";
    if (title.size() >= suffix.size() &&
        title.compare(title.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return title.substr(0, title.size() - suffix.size());
    }
    const auto pos = title.find(suffix);
    if (pos != std::string::npos) {
        return title.substr(0, pos) + title.substr(pos + suffix.size());
    }
    return title;
}

}  // namespace

std::string encode_title(std::string_view title) {
    std::string out;
    for (char c : title) {
        if (c == ' ') {
            out += '_';
        } else if (unreserved(c)) {
            out += c;
        } else {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "%%%02X", static_cast<unsigned char>(c));
            out += buf;
        }
    }
    return out;
}

std::string raw_page_url(const std::string& base_url, const std::string& title) {
    return base_url + "/index.php?title=" + encode_title(title) + "&action=raw";
}

std::string page_url(const std::string& base_url, const std::string& title) {
    return base_url + "/index.php?title=" + encode_title(title);
}

WikiSource fetch_csv_page(const std::string& base_url, const std::string& title) {
    if (title.find(".csv") == std::string::npos) {
        throw Error(errc::not_csv_title, "page title does not contain \".csv\"", title);
    }
    const auto [root, prefix] = split_base(base_url);
    const std::string path =
        prefix + "/index.php?title=" + encode_title(title) + "&action=raw";

    auto res = get_with_retry(root, path);
    if (!res) {
        throw Error(errc::http_failure, "could not reach the wiki",
                    httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw Error(errc::http_failure, "wiki returned status " + std::to_string(res->status),
                    std::to_string(res->status));
    }
    if (res->body.empty()) {
        throw Error(errc::empty_page, "wiki page is empty", title);
    }

    WikiSource source;
    source.base_url = base_url;
    source.page_title = title;
    source.raw_text = strip_trailing_newlines(res->body);
    source.fetched_at = std::chrono::system_clock::now();
    return source;
}

CsvPayload proxy_csv(const WikiSource& source) {
    CsvPayload payload;
    payload.content_type = "text/csv";
    payload.filename = source.page_title;
    for (auto& c : payload.filename) {
        if (c == ' ') c = '_';
    }
    payload.body = source.raw_text;
    return payload;
}

std::vector<BackLink> derive_backlinks(const std::optional<std::string>& title,
                                       std::optional<long> pubmed_id,
                                       const std::string& base_url) {
    if (!title && !pubmed_id) {
        throw Error(errc::no_link_source, "need a title or a PubMed id");
    }
    std::vector<BackLink> links;
    if (title) {
        const std::string page = strip_csv_suffix(*title);
        links.push_back({BackLink::Kind::wiki_page, page_url(base_url, page), page});
    }
    if (pubmed_id) {
        if (*pubmed_id <= 0) {
            throw Error(errc::no_link_source, "PubMed id must be positive",
                        std::to_string(*pubmed_id));
        }
        const std::string id = std::to_string(*pubmed_id);
        links.push_back({BackLink::Kind::pubmed,
                         "https://pubmed.ncbi.nlm.nih.gov/" + id + "/", "PMID " + id});
        links.push_back({BackLink::Kind::wiki_page,
                         base_url + "/index.php?title=Special:Search&search=" + id,
                         "Wiki search " + id});
    }
    return links;
}

std::string fetch_url(const std::string& url) {
    const auto [root, path_part] = split_base(url);
    const std::string path = path_part.empty() ? "/" : path_part;
    auto res = get_with_retry(root, path);
    if (!res) {
        throw Error(errc::http_failure, "could not fetch URL",
                    httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw Error(errc::http_failure, "URL returned status " + std::to_string(res->status),
                    std::to_string(res->status));
    }
    return res->body;
}

}  // namespace metacsv
