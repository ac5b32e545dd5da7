// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Expected numbers come from the frozen oracle outputs under
// fixtures/expected/; SVG and export goldens live under fixtures/golden/.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "metacsv/csv.hpp"
#include "metacsv/effects.hpp"
#include "metacsv/errors.hpp"
#include "metacsv/export.hpp"
#include "metacsv/plots.hpp"
#include "metacsv/pooling.hpp"
#include "metacsv/service.hpp"
#include "support/helpers.hpp"
#include "support/stub_wiki.hpp"

namespace fs = std::filesystem;
using namespace metacsv;
using nlohmann::json;

namespace {

class Checker {
public:
    void require(bool condition, const std::string& what) {
        ++checks_;
        if (!condition) failures_.push_back(what);
    }
    void require_rel(double actual, double expected, double tol, const std::string& what) {
        require(testutil::close_rel(actual, expected, tol),
                what + " (got " + std::to_string(actual) + ", want " +
                    std::to_string(expected) + ")");
    }
    bool ok() const { return failures_.empty(); }
    std::size_t checks() const { return checks_; }
    const std::vector<std::string>& failures() const { return failures_; }

private:
    std::size_t checks_ = 0;
    std::vector<std::string> failures_;
};

std::vector<EffectEstimate> make_estimates(const std::vector<double>& ys,
                                           const std::vector<double>& vs) {
    std::vector<EffectEstimate> out(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        out[i].study_label = "s" + std::to_string(i + 1);
        out[i].effect = ys[i];
        out[i].variance = vs[i];
        out[i].measure = EffectMeasure::smd_hedges;
        out[i].n_total = 10;
    }
    return out;
}

void compare_pooled(Checker& c, const std::string& name, const PooledResult& actual,
                    const json& block, double tol) {
    c.require_rel(actual.effect, block["effect"], tol, name + " effect");
    c.require_rel(actual.se, block["se"], tol, name + " se");
    c.require_rel(actual.ci_low, block["ci_low"], tol, name + " ci_low");
    c.require_rel(actual.ci_high, block["ci_high"], tol, name + " ci_high");
    c.require_rel(actual.z, block["z"], tol, name + " z");
    c.require_rel(actual.p, block["p"], tol, name + " p");
}

void compare_heterogeneity(Checker& c, const std::string& name, const Heterogeneity& het,
                           const json& block, double tol) {
    c.require_rel(het.q, block["Q"], tol, name + " Q");
    c.require(het.df == block["df"].get<long>(), name + " df");
    c.require_rel(het.tau2, block["tau2"], tol, name + " tau2");
    c.require_rel(het.i2, block["I2"], tol, name + " I2");
    c.require_rel(het.p_q, block["p_Q"], tol, name + " p_Q");
}

void compare_fixture(Checker& c, const std::string& name, const MetaAnalysisResult& result,
                     const json& expected, double tol) {
    const auto& studies = expected["studies"];
    c.require(result.estimates.size() == studies.size(), name + " study count");
    for (std::size_t i = 0; i < result.estimates.size(); ++i) {
        c.require_rel(result.estimates[i].effect, studies[i]["effect"], tol,
                      name + " study " + std::to_string(i) + " effect");
        c.require_rel(result.estimates[i].variance, studies[i]["variance"], tol,
                      name + " study " + std::to_string(i) + " variance");
        c.require(result.estimates[i].n_total == studies[i]["n_total"].get<long>(),
                  name + " study " + std::to_string(i) + " n_total");
    }
    compare_pooled(c, name + " fixed", result.fixed, expected["fixed"], tol);
    compare_pooled(c, name + " random", result.random, expected["random"], tol);
    compare_heterogeneity(c, name + " het", result.heterogeneity,
                          expected["heterogeneity"], tol);
}

MetaAnalysisResult analyze_fixture(const std::string& csv_name, const json& expected) {
    const auto table =
        parse_table(testutil::read_file(testutil::fixture_path(csv_name)));
    AnalysisConfig config;
    config.measure = *measure_from_name(expected["measure"].get<std::string>());
    return meta_analyze(table, config);
}

// -------------------------------------------------------------- criteria

void oracle_equivalence(Checker& c) {
    const double tol = 1e-10;
    for (const char* name : {"homogeneous-2", "hetero-2"}) {
        const auto expected = testutil::load_fixture_json(name);
        const auto estimates =
            make_estimates(expected["inputs"]["effects"].get<std::vector<double>>(),
                           expected["inputs"]["variances"].get<std::vector<double>>());
        const auto fixed = pool_fixed(estimates);
        compare_pooled(c, std::string(name) + " fixed", fixed, expected["fixed"], tol);
        compare_pooled(c, std::string(name) + " random", pool_random_dl(estimates),
                       expected["random"], tol);
        compare_heterogeneity(c, name, heterogeneity(estimates, fixed.effect),
                              expected["heterogeneity"], tol);
    }
    const std::vector<std::pair<std::string, std::string>> fixtures = {
        {"smd-basic.csv", "smd-basic"},       {"smd-basic.csv", "smd-basic-cohen"},
        {"continuous-2.csv", "continuous-2"}, {"continuous-2.csv", "continuous-2-lvr"},
        {"binary-2.csv", "binary-2"},         {"binary-zero.csv", "binary-zero"},
        {"canonical-3.csv", "canonical-3"},   {"rand-01.csv", "rand-01"},
        {"rand-02.csv", "rand-02"},           {"rand-03.csv", "rand-03"},
        {"rand-04.csv", "rand-04"},           {"rand-05.csv", "rand-05"},
        {"rand-06.csv", "rand-06"},
    };
    for (const auto& [csv_name, expected_name] : fixtures) {
        const auto expected = testutil::load_fixture_json(expected_name);
        compare_fixture(c, expected_name, analyze_fixture(csv_name, expected), expected,
                        tol);
    }
}

void external_reference(Checker& c) {
    const auto reference = testutil::load_fixture_json("canonical-3-reference");
    const double tol = reference["tolerance"];

    // the committed estimate inputs must be what the pipeline produces
    const auto expected = testutil::load_fixture_json("canonical-3");
    const auto result = analyze_fixture("canonical-3.csv", expected);
    const auto ref_effects = reference["inputs"]["effects"].get<std::vector<double>>();
    const auto ref_vars = reference["inputs"]["variances"].get<std::vector<double>>();
    c.require(result.estimates.size() == ref_effects.size(),
              "reference input study count");
    for (std::size_t i = 0; i < result.estimates.size(); ++i) {
        c.require_rel(result.estimates[i].effect, ref_effects[i], 1e-10,
                      "reference input effect " + std::to_string(i));
        c.require_rel(result.estimates[i].variance, ref_vars[i], 1e-10,
                      "reference input variance " + std::to_string(i));
    }

    // pooled fixed and DL-random against the externally produced numbers
    const auto& ref = reference["reference"];
    c.require_rel(result.fixed.effect, ref["fixed"]["effect"], tol,
                  "external fixed effect");
    c.require_rel(result.fixed.se, ref["fixed"]["se"], tol, "external fixed se");
    c.require_rel(result.random.effect, ref["random"]["effect"], tol,
                  "external random effect");
    c.require_rel(result.random.se, ref["random"]["se"], tol, "external random se");
    c.require_rel(result.heterogeneity.tau2, ref["tau2"], tol, "external tau2");
    c.require_rel(result.heterogeneity.q, ref["Q"], tol, "external Q");
}

void property_suite(Checker& c) {
    std::mt19937_64 rng(20260810);
    std::uniform_real_distribution<double> y_dist(-3.0, 3.0);
    std::uniform_real_distribution<double> v_dist(0.005, 2.0);
    std::uniform_int_distribution<long> n_dist(2, 200);
    std::uniform_real_distribution<double> mean_dist(-30.0, 30.0);
    std::uniform_real_distribution<double> sd_dist(0.05, 10.0);

    std::size_t violations = 0;
    const auto note = [&](bool ok) {
        if (!ok) ++violations;
    };

    const auto close = [](double a, double b, double tol) {
        return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
    };
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t k = 1 + rng() % 10;
        const bool homogeneous = trial % 7 == 0;
        const double shared = y_dist(rng);
        std::vector<double> ys(k);
        std::vector<double> vs(k);
        for (std::size_t i = 0; i < k; ++i) {
            ys[i] = homogeneous ? shared : y_dist(rng);
            vs[i] = v_dist(rng);
        }
        auto estimates = make_estimates(ys, vs);

        const auto fixed = pool_fixed(estimates);
        const auto het = heterogeneity(estimates, fixed.effect);
        const auto random = pool_random_dl(estimates);

        // random se >= fixed se
        note(random.se >= fixed.se - 1e-12);
        // fixed se <= min study se
        const double min_se = std::sqrt(*std::min_element(vs.begin(), vs.end()));
        note(fixed.se <= min_se + 1e-12);
        // tau2 >= 0, truncated at Q <= df
        note(het.tau2 >= 0.0);
        if (het.q <= static_cast<double>(het.df)) note(het.tau2 == 0.0);
        if (het.tau2 == 0.0) note(std::fabs(random.se - fixed.se) <= 1e-12);

        // permutation invariance
        std::shuffle(estimates.begin(), estimates.end(), rng);
        const auto fixed2 = pool_fixed(estimates);
        const auto random2 = pool_random_dl(estimates);
        note(close(fixed2.effect, fixed.effect, 1e-11));
        note(close(fixed2.se, fixed.se, 1e-11));
        note(close(random2.effect, random.effect, 1e-11));
        note(close(random2.se, random.se, 1e-11));
    }

    for (int trial = 0; trial < 1000; ++trial) {
        GroupSummary g1{n_dist(rng), mean_dist(rng), sd_dist(rng)};
        GroupSummary g2{n_dist(rng), mean_dist(rng), sd_dist(rng)};

        // SMD location and scale invariance
        const double shift = mean_dist(rng);
        const double scale = 0.01 + std::fabs(mean_dist(rng)) / 10.0;
        const auto base = smd(g1, g2, SmdVariant::cohen);
        const auto shifted = smd({g1.n, g1.mean + shift, g1.sd},
                                 {g2.n, g2.mean + shift, g2.sd}, SmdVariant::cohen);
        const auto scaled =
            smd({g1.n, scale * g1.mean, scale * g1.sd},
                {g2.n, scale * g2.mean, scale * g2.sd}, SmdVariant::cohen);
        note(testutil::close_rel(shifted.effect, base.effect, 1e-8) ||
             std::fabs(shifted.effect - base.effect) < 1e-8);
        note(testutil::close_rel(scaled.effect, base.effect, 1e-8) ||
             std::fabs(scaled.effect - base.effect) < 1e-8);

        // antisymmetry under a group/arm swap, variance unchanged
        const auto fwd = smd(g1, g2, SmdVariant::hedges);
        const auto rev = smd(g2, g1, SmdVariant::hedges);
        note(std::fabs(fwd.effect + rev.effect) < 1e-10);
        note(testutil::close_rel(fwd.variance, rev.variance, 1e-10));
        const auto vr_fwd = log_variance_ratio(g1, g2);
        const auto vr_rev = log_variance_ratio(g2, g1);
        note(std::fabs(vr_fwd.effect + vr_rev.effect) < 1e-10);

        const long t1 = 1 + static_cast<long>(rng() % 100);
        const long t2 = 1 + static_cast<long>(rng() % 100);
        const CountTable counts{static_cast<long>(rng() % (t1 + 1)), t1,
                                static_cast<long>(rng() % (t2 + 1)), t2};
        const CountTable swapped{counts.events2, counts.total2, counts.events1,
                                 counts.total1};
        const auto lo = log_odds_ratio(counts);
        const auto ls = log_odds_ratio(swapped);
        note(std::fabs(lo.effect + ls.effect) < 1e-10);
        note(testutil::close_rel(lo.variance, ls.variance, 1e-10));
    }

    c.require(violations == 0,
              "property violations: " + std::to_string(violations) + " of 2000 trials");
}

void parser_suite(Checker& c) {
    // the three dialects carry the same table
    const std::string body_comma =
        "study,patients n,patients mean,patients sd,controls n,controls mean,controls sd\n"
        "A,12,4.1,0.9,14,3.8,1.1\nB,20,5,1.2,18,4.4,1\n";
    std::string body_semicolon = body_comma;
    std::replace(body_semicolon.begin(), body_semicolon.end(), ',', ';');
    std::string body_tab = body_comma;
    std::replace(body_tab.begin(), body_tab.end(), ',', '\t');

    const auto t_comma = parse_table(body_comma);
    const auto t_semicolon = parse_table(body_semicolon);
    const auto t_tab = parse_table(body_tab);
    c.require(t_comma.separator == Separator::comma, "comma dialect detected");
    c.require(t_semicolon.separator == Separator::semicolon, "semicolon dialect detected");
    c.require(t_tab.separator == Separator::tab, "tab dialect detected");
    c.require(t_comma.records == t_semicolon.records, "comma == semicolon records");
    c.require(t_comma.records == t_tab.records, "comma == tab records");

    // the quoted control-count synonyms all resolve to group2_n
    for (const char* header : {"control n", "controls number", "number of controls"}) {
        const auto map = match_columns({header});
        c.require(map.index_of(Role::group2_n) == std::optional<std::size_t>(0),
                  std::string("synonym: ") + header);
    }

    // override precedence on randomized header/override combinations
    std::mt19937_64 rng(4711);
    const std::vector<std::string> role_headers = {
        "study",      "patients n",    "patients mean", "patients sd",
        "controls n", "controls mean", "controls sd",   "age"};
    const std::vector<Role> stat_roles = {Role::group1_n,    Role::group1_mean,
                                          Role::group1_sd,   Role::group2_n,
                                          Role::group2_mean, Role::group2_sd};
    std::size_t override_checks = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        auto header = role_headers;
        std::shuffle(header.begin(), header.end(), rng);
        std::string text;
        for (std::size_t i = 0; i < header.size(); ++i) {
            text += (i ? "," : "") + header[i];
        }
        text += "\n";
        for (std::size_t i = 0; i < header.size(); ++i) {
            text += (i ? ",4" : "S");  // 4 parses for any numeric role
        }
        text += "\n";
        Overrides overrides;
        for (const Role role : stat_roles) {
            if (rng() % 2) overrides[role] = rng() % header.size();
        }
        StudyTable table;
        try {
            table = parse_table(text, overrides);
        } catch (const Error&) {
            continue;  // override may hit the label column; precedence still applies
        }
        for (const auto& [role, index] : overrides) {
            ++override_checks;
            c.require(table.column_map.index_of(role) == std::optional(index),
                      "override wins for " + std::string(role_name(role)) + " at trial " +
                          std::to_string(trial));
        }
    }
    c.require(override_checks >= 1000,
              "enough override combinations exercised: " +
                  std::to_string(override_checks));

    // round-trip identity on the shipped fixtures
    for (const char* name : {"continuous-2.csv", "binary-2.csv", "canonical-3.csv",
                             "rand-01.csv", "rand-04.csv"}) {
        const auto table = parse_table(testutil::read_file(testutil::fixture_path(name)));
        c.require(parse_table(write_csv(table)) == table,
                  std::string("round-trip: ") + name);
    }
}

void rendering(Checker& c) {
    const auto expected = testutil::load_fixture_json("continuous-2");
    const auto result = analyze_fixture("continuous-2.csv", expected);
    std::string why;

    const auto forest = forest_svg(result);
    c.require(testutil::xml_well_formed(forest.body, &why), "forest XML: " + why);
    c.require(testutil::count_occurrences(forest.body, "class=\"study\"") == 2,
              "forest square count");
    c.require(testutil::count_occurrences(forest.body, "class=\"pooled\"") == 2,
              "forest diamond count");
    c.require(testutil::matches_golden("forest_continuous-2.svg", forest.body, &why),
              "forest golden: " + why);

    const auto funnel = funnel_svg(result);
    c.require(testutil::xml_well_formed(funnel.body, &why), "funnel XML: " + why);
    c.require(testutil::count_occurrences(funnel.body, "class=\"study\"") == 2,
              "funnel circle count");
    c.require(testutil::matches_golden("funnel_continuous-2.svg", funnel.body, &why),
              "funnel golden: " + why);

    std::vector<MassPoint> points;
    for (const char* name : {"mass-a", "mass-b", "mass-c", "mass-d", "mass-e"}) {
        const auto exp = testutil::load_fixture_json(name);
        points.push_back(mass_point(
            analyze_fixture(std::string("mass/") + name + ".csv", exp), name));
    }
    const auto mass = labbe_mass_svg(points);
    c.require(testutil::xml_well_formed(mass.body, &why), "mass XML: " + why);
    c.require(testutil::count_occurrences(mass.body, "class=\"mass-point\"") == 5,
              "mass dot count");
    c.require(testutil::matches_golden("mass_fixtures.svg", mass.body, &why),
              "mass golden: " + why);
}

std::string synthetic_table(std::mt19937_64& rng, int k) {
    std::string text =
        "study,patients n,patients mean,patients sd,controls n,controls mean,controls sd\n";
    std::uniform_int_distribution<long> n_dist(8, 60);
    std::uniform_real_distribution<double> mean_dist(-3.0, 8.0);
    std::uniform_real_distribution<double> sd_dist(0.3, 4.0);
    for (int i = 0; i < k; ++i) {
        char row[256];
        std::snprintf(row, sizeof(row), "Study %d,%ld,%.4f,%.4f,%ld,%.4f,%.4f\n", i + 1,
                      n_dist(rng), mean_dist(rng), sd_dist(rng), n_dist(rng),
                      mean_dist(rng), sd_dist(rng));
        text += row;
    }
    return text;
}

void performance(Checker& c) {
    using clock = std::chrono::steady_clock;
    std::mt19937_64 rng(555);

    // one 50-study analysis end-to-end: parse, pool, both plots, JSON
    const std::string text = synthetic_table(rng, 50);
    const auto t0 = clock::now();
    const auto table = parse_table(text);
    const auto result = meta_analyze(table);
    const auto forest = forest_svg(result);
    const auto funnel = funnel_svg(result);
    const auto json_text = to_json(result);
    const auto t1 = clock::now();
    const double single_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    c.require(forest.body.size() > 0 && funnel.body.size() > 0 && json_text.size() > 0,
              "pipeline produced output");
    c.require(single_ms < 1000.0,
              "50-study analysis took " + std::to_string(single_ms) + " ms (limit 1000)");

    // mass run over 50 synthetic analyses through the real CLI
    const fs::path dir =
        fs::temp_directory_path() / ("metacsv_perf_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    for (int i = 0; i < 50; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "perf-%02d.csv", i + 1);
        testutil::write_file((dir / name).string(), synthetic_table(rng, 4 + i % 12));
    }
    const std::string cmd = std::string(METACSV_CLI_PATH) + " mass " + dir.string() +
                            " --out " + (dir / "mass.svg").string() + " --points " +
                            (dir / "points.csv").string() + " >/dev/null 2>&1";
    const auto t2 = clock::now();
    const int status = std::system(cmd.c_str());
    const auto t3 = clock::now();
    const double mass_ms = std::chrono::duration<double, std::milli>(t3 - t2).count();
    c.require(status == 0, "mass CLI run succeeded");
    c.require(mass_ms < 10000.0,
              "50-analysis mass run took " + std::to_string(mass_ms) + " ms (limit 10000)");
    const auto svg = testutil::read_file((dir / "mass.svg").string());
    c.require(testutil::count_occurrences(svg, "class=\"mass-point\"") == 50,
              "mass run rendered 50 dots");
    fs::remove_all(dir);
}

std::string run_cli(const std::string& args) {
    const std::string cmd = std::string(METACSV_CLI_PATH) + " " + args + " 2>/dev/null";
    std::string output;
    char buffer[4096];
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return output;
    std::size_t n = 0;
    while ((n = fread(buffer, 1, sizeof(buffer), pipe)) > 0) output.append(buffer, n);
    pclose(pipe);
    return output;
}

void service_conformance(Checker& c) {
    testutil::StubWiki wiki;
    const std::string fixture =
        testutil::read_file(testutil::fixture_path("continuous-2.csv"));
    wiki.add_page("Conformance.csv", fixture);

    httplib::Server server;
    ServiceConfig config;
    config.wiki_base_url = wiki.base_url();
    register_routes(server, config);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(30, 0);

    // byte-identical service and CLI artifacts for the same fixture/options
    for (const char* format : {"json", "csv", "r", "forest_svg", "funnel_svg"}) {
        const auto res = client.Get(httplib::append_query_params(
            "/analyze", {{"csv", fixture}, {"format", format}}));
        const std::string cli = run_cli("analyze " +
                                        testutil::fixture_path("continuous-2.csv") +
                                        " --format " + format);
        c.require(res && res->status == 200, std::string("service 200 for ") + format);
        if (res) {
            c.require(res->body == cli,
                      std::string("service == CLI bytes for format ") + format);
        }
    }

    // /csv passthrough: exact bytes, exact content type
    const auto csv_res =
        client.Get(httplib::append_query_params("/csv", {{"title", "Conformance.csv"}}));
    c.require(csv_res && csv_res->status == 200, "/csv 200");
    if (csv_res) {
        c.require(csv_res->body == fixture, "/csv byte passthrough");
        c.require(csv_res->get_header_value("Content-Type") == "text/csv",
                  "/csv content type exactly text/csv");
    }

    // error mapping
    const auto bad_title =
        client.Get(httplib::append_query_params("/csv", {{"title", "Main Page"}}));
    c.require(bad_title && bad_title->status == 400, "/csv non-csv title -> 400");
    const auto missing = client.Get(
        httplib::append_query_params("/csv", {{"title", "Nope.csv"}}));
    c.require(missing && missing->status == 502, "/csv upstream 404 -> 502");
    const std::string binary =
        testutil::read_file(testutil::fixture_path("binary-2.csv"));
    const auto unprocessable = client.Get(httplib::append_query_params(
        "/analyze", {{"csv", binary}, {"measure", "smd"}}));
    c.require(unprocessable && unprocessable->status == 422,
              "/analyze statistical precondition -> 422");
    if (unprocessable) {
        const auto doc = json::parse(unprocessable->body);
        c.require(doc["error_code"] == "MissingRequiredColumns",
                  "422 body names MissingRequiredColumns");
    }
    const auto bad_req = client.Get("/analyze");
    c.require(bad_req && bad_req->status == 400, "/analyze without source -> 400");

    server.stop();
    thread.join();
}

struct Criterion {
    std::string name;
    std::function<void(Checker&)> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"oracle-equivalence", oracle_equivalence},
        {"external-reference", external_reference},
        {"property-suite", property_suite},
        {"parser-suite", parser_suite},
        {"rendering", rendering},
        {"performance", performance},
        {"service-conformance", service_conformance},
    };

    int failed = 0;
    for (const auto& criterion : criteria) {
        Checker checker;
        std::string error;
        try {
            criterion.run(checker);
        } catch (const std::exception& e) {
            error = e.what();
        }
        if (checker.ok() && error.empty()) {
            std::printf("PASS %-20s (%zu checks)\n", criterion.name.c_str(),
                        checker.checks());
        } else {
            ++failed;
            std::printf("FAIL %-20s\n", criterion.name.c_str());
            if (!error.empty()) std::printf("     exception: %s\n", error.c_str());
            std::size_t shown = 0;
            for (const auto& failure : checker.failures()) {
                if (++shown > 8) {
                    std::printf("     ... %zu more\n",
                                checker.failures().size() - shown + 1);
                    break;
                }
                std::printf("     %s\n", failure.c_str());
            }
        }
    }
    return failed == 0 ? 0 : 1;
}
