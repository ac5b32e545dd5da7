// metacsv command-line front end: analyze one CSV, run a mass analysis
// over many, or serve the HTTP API.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metacsv/csv.hpp"
#include "metacsv/errors.hpp"
#include "metacsv/export.hpp"
#include "metacsv/plots.hpp"
#include "metacsv/pooling.hpp"
#include "metacsv/service.hpp"
#include "metacsv/version.hpp"

namespace fs = std::filesystem;
using namespace metacsv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(errc::io_failure, "cannot read file", path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(errc::io_failure, "cannot write file", path.string());
    }
    out << content;
}

EffectMeasure resolve_measure(const std::string& measure, const std::string& variant) {
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

Overrides parse_col_overrides(const std::vector<std::string>& specs) {
    Overrides overrides;
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw Error(errc::bad_request, "--col expects role=index", spec);
        }
        const auto role = role_from_name(spec.substr(0, eq));
        if (!role) {
            throw Error(errc::bad_request, "unknown column role", spec.substr(0, eq));
        }
        try {
            overrides[*role] = std::stoul(spec.substr(eq + 1));
        } catch (const std::exception&) {
            throw Error(errc::bad_request, "column index must be a non-negative integer",
                        spec);
        }
    }
    return overrides;
}

std::string summary_line(const MetaAnalysisResult& result) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "k=%zu fixed=%.3f [%.3f, %.3f] random=%.3f [%.3f, %.3f] "
                  "I2=%.1f%% tau2=%.3f",
                  result.fixed.k, result.fixed.effect, result.fixed.ci_low,
                  result.fixed.ci_high, result.random.effect, result.random.ci_low,
                  result.random.ci_high, result.heterogeneity.i2,
                  result.heterogeneity.tau2);
    return buf;
}

std::string render_format(const MetaAnalysisResult& result, const StudyTable& table,
                          const AnalysisConfig& config, const std::string& format) {
    if (format == "json") return to_json(result);
    if (format == "csv") return to_csv(result);
    if (format == "r") return to_r_script(table, config);
    if (format == "forest_svg" || format == "forest") return forest_svg(result).body;
    if (format == "funnel_svg" || format == "funnel") return funnel_svg(result).body;
    throw Error(errc::bad_request, "unknown format", format);
}

SynonymTable load_synonyms(const std::string& path) {
    return path.empty() ? SynonymTable::from_env() : SynonymTable::from_json_file(path);
}

int run_analyze(const std::string& file, const std::string& measure,
                const std::string& variant, const std::vector<std::string>& col_specs,
                const std::string& format, const std::string& out_path,
                const std::string& synonyms_path) {
    if (!fs::exists(file)) {
        std::cerr << "error: no such file: " << file << "\n";
        return kExitIo;
    }
    const std::string text = read_file(file);
    AnalysisConfig config;
    config.measure = resolve_measure(measure, variant);
    const StudyTable table =
        parse_table(text, parse_col_overrides(col_specs), load_synonyms(synonyms_path));
    const MetaAnalysisResult result = meta_analyze(table, config);

    if (!format.empty()) {
        const std::string artifact = render_format(result, table, config, format);
        if (out_path.empty()) {
            std::cout << artifact;
            std::cerr << summary_line(result) << "\n";
            return kExitOk;
        }
        write_file(out_path, artifact);
    }
    std::cout << summary_line(result) << "\n";
    return kExitOk;
}

/// Expand an input argument: plain file, directory (all *.csv inside,
/// sorted) or a pattern whose final component uses '*'.
std::vector<fs::path> expand_input(const std::string& input) {
    std::vector<fs::path> files;
    const fs::path path(input);
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".csv") {
                files.push_back(entry.path());
            }
        }
    } else if (input.find('*') != std::string::npos) {
        const fs::path parent =
            path.has_parent_path() ? path.parent_path() : fs::path(".");
        const std::string pattern = path.filename().string();
        const auto matches = [&pattern](const std::string& name) {
            // '*' wildcard match, greedy segments
            std::size_t n = 0;
            std::size_t p = 0;
            std::size_t star = std::string::npos;
            std::size_t mark = 0;
            while (n < name.size()) {
                if (p < pattern.size() &&
                    (pattern[p] == name[n])) {
                    ++n;
                    ++p;
                } else if (p < pattern.size() && pattern[p] == '*') {
                    star = p++;
                    mark = n;
                } else if (star != std::string::npos) {
                    p = star + 1;
                    n = ++mark;
                } else {
                    return false;
                }
            }
            while (p < pattern.size() && pattern[p] == '*') ++p;
            return p == pattern.size();
        };
        if (fs::is_directory(parent)) {
            for (const auto& entry : fs::directory_iterator(parent)) {
                if (entry.is_regular_file() && matches(entry.path().filename().string())) {
                    files.push_back(entry.path());
                }
            }
        }
    } else if (fs::exists(path)) {
        files.push_back(path);
    }
    std::sort(files.begin(), files.end());
    return files;
}

int run_mass(const std::vector<std::string>& inputs, const std::string& measure,
             const std::string& variant, const std::string& out_svg,
             const std::string& out_points, const std::string& synonyms_path) {
    std::vector<fs::path> files;
    for (const auto& input : inputs) {
        for (auto& f : expand_input(input)) files.push_back(std::move(f));
    }
    std::sort(files.begin(), files.end());
    files.erase(std::unique(files.begin(), files.end()), files.end());
    if (files.empty()) {
        std::cerr << "error: no input files\n";
        return kExitIo;
    }

    AnalysisConfig config;
    config.measure = resolve_measure(measure, variant);
    const SynonymTable synonyms = load_synonyms(synonyms_path);

    std::vector<MassPoint> points;
    for (const auto& file : files) {
        try {
            const std::string text = read_file(file);
            const StudyTable table = parse_table(text, {}, synonyms);
            const MetaAnalysisResult result = meta_analyze(table, config);
            points.push_back(mass_point(result, file.stem().string()));
        } catch (const Error& e) {
            std::cerr << "warning: skipping " << file.string() << ": " << e.code()
                      << ": " << e.message() << "\n";
        }
    }
    if (points.empty()) {
        std::cerr << "error: every input failed\n";
        return kExitUsage;
    }
    std::sort(points.begin(), points.end(),
              [](const MassPoint& a, const MassPoint& b) { return a.label < b.label; });

    write_file(out_svg, labbe_mass_svg(points).body);
    std::string csv = "label,effect,se,n_total,significant\n";
    for (const auto& p : points) {
        csv += csv_quote(p.label, ',') + "," + format_sig12(p.effect) + "," +
               format_sig12(p.se) + "," + std::to_string(p.n_total) + "," +
               (p.significant ? "true" : "false") + "\n";
    }
    write_file(out_points, csv);
    std::cout << "analyzed " << points.size() << "/" << files.size() << " inputs -> "
              << out_svg << ", " << out_points << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"meta-analysis over CSV study tables"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    // analyze
    std::string file;
    std::string measure = "smd";
    std::string variant = "hedges";
    std::vector<std::string> col_specs;
    std::string format;
    std::string out_path;
    std::string synonyms_path;
    auto* analyze = app.add_subcommand("analyze", "analyze one CSV file");
    analyze->add_option("file", file, "CSV input file")->required();
    analyze->add_option("--measure", measure,
                        "effect measure: smd, or (log odds ratio), vr (log sd ratio)");
    analyze->add_option("--variant", variant, "SMD variant: hedges or cohen");
    analyze->add_option("--col", col_specs,
                        "column override role=index (0-based), e.g. group1_n=4");
    analyze->add_option("--format", format,
                        "artifact: json, csv, r, forest_svg, funnel_svg");
    analyze->add_option("--out", out_path, "artifact output path (default: stdout)");
    analyze->add_option("--synonyms", synonyms_path,
                        "header synonym dictionary JSON (or METACSV_SYNONYMS env)");

    // mass
    std::vector<std::string> inputs;
    std::string mass_out = "massplot.svg";
    std::string mass_points = "points.csv";
    std::string mass_measure = "smd";
    std::string mass_variant = "hedges";
    auto* mass = app.add_subcommand("mass", "aggregate many analyses into one plot");
    mass->add_option("inputs", inputs, "files, directories or globs")->required();
    mass->add_option("--out", mass_out, "output SVG path");
    mass->add_option("--points", mass_points, "output points CSV path");
    mass->add_option("--measure", mass_measure, "effect measure");
    mass->add_option("--variant", mass_variant, "SMD variant");
    std::string mass_synonyms;
    mass->add_option("--synonyms", mass_synonyms,
                     "header synonym dictionary JSON (or METACSV_SYNONYMS env)");

    // serve
    ServiceConfig service_config = service_config_from_env();
    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    serve->add_option("--port", service_config.port, "listen port (or PORT env)");
    serve->add_option("--bind", service_config.bind_address, "bind address");
    serve->add_option("--wiki-base", service_config.wiki_base_url,
                      "default wiki base URL (or WIKI_BASE_URL env)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) {
            return run_analyze(file, measure, variant, col_specs, format, out_path,
                               synonyms_path);
        }
        if (mass->parsed()) {
            return run_mass(inputs, mass_measure, mass_variant, mass_out, mass_points,
                            mass_synonyms);
        }
        if (serve->parsed()) {
            std::cerr << "listening on " << service_config.bind_address << ":"
                      << service_config.port << "\n";
            if (!run_service(service_config)) {
                std::cerr << "error: could not bind " << service_config.bind_address
                          << ":" << service_config.port << "\n";
                return kExitIo;
            }
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.message();
        if (!e.detail().empty()) std::cerr << " (" << e.detail() << ")";
        std::cerr << "\n";
        return e.code() == errc::io_failure ? kExitIo : kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitOk;
}
