#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "metacsv/csv.hpp"
#include "metacsv/effects.hpp"
#include "metacsv/errors.hpp"
#include "metacsv/export.hpp"
#include "metacsv/plots.hpp"
#include "metacsv/pooling.hpp"
#include "metacsv/stats.hpp"
#include "metacsv/version.hpp"

namespace py = pybind11;
using namespace metacsv;

namespace {

Overrides overrides_from_dict(const py::dict& overrides) {
    Overrides out;
    for (const auto& item : overrides) {
        const auto name = item.first.cast<std::string>();
        const auto role = role_from_name(name);
        if (!role) {
            throw Error(errc::bad_request, "unknown column role", name);
        }
        out[*role] = item.second.cast<std::size_t>();
    }
    return out;
}

EffectMeasure measure_or_throw(const std::string& name) {
    const auto measure = measure_from_name(name);
    if (!measure) {
        throw Error(errc::bad_request, "unknown measure", name);
    }
    return *measure;
}

std::vector<EffectEstimate> estimates_from_lists(const std::vector<double>& effects,
                                                 const std::vector<double>& variances) {
    if (effects.size() != variances.size()) {
        throw Error(errc::bad_request, "effects and variances must have equal length");
    }
    std::vector<EffectEstimate> estimates(effects.size());
    for (std::size_t i = 0; i < effects.size(); ++i) {
        estimates[i].study_label = "study " + std::to_string(i + 1);
        estimates[i].effect = effects[i];
        estimates[i].variance = variances[i];
        estimates[i].measure = EffectMeasure::smd_hedges;
        estimates[i].n_total = 0;
    }
    return estimates;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "meta-analysis over CSV study tables (C++ core)";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "MetaCsvError");

    py::class_<GroupSummary>(m, "GroupSummary")
        .def(py::init<long, double, double>(), py::arg("n"), py::arg("mean"),
             py::arg("sd"))
        .def_readonly("n", &GroupSummary::n)
        .def_readonly("mean", &GroupSummary::mean)
        .def_readonly("sd", &GroupSummary::sd);

    py::class_<CountTable>(m, "CountTable")
        .def(py::init<long, long, long, long>(), py::arg("events1"), py::arg("total1"),
             py::arg("events2"), py::arg("total2"))
        .def_readonly("events1", &CountTable::events1)
        .def_readonly("total1", &CountTable::total1)
        .def_readonly("events2", &CountTable::events2)
        .def_readonly("total2", &CountTable::total2);

    py::class_<StudyRecord>(m, "StudyRecord")
        .def_readonly("label", &StudyRecord::label)
        .def_readonly("group1", &StudyRecord::group1)
        .def_readonly("group2", &StudyRecord::group2)
        .def_readonly("counts", &StudyRecord::counts)
        .def_readonly("covariates", &StudyRecord::covariates);

    py::class_<StudyTable>(m, "StudyTable")
        .def_readonly("records", &StudyTable::records)
        .def_readonly("header", &StudyTable::header)
        .def_readonly("title", &StudyTable::title)
        .def_property_readonly("separator", [](const StudyTable& t) {
            return std::string(1, separator_char(t.separator));
        })
        .def("__len__", [](const StudyTable& t) { return t.records.size(); });

    py::class_<EffectEstimate>(m, "EffectEstimate")
        .def_readonly("study_label", &EffectEstimate::study_label)
        .def_readonly("effect", &EffectEstimate::effect)
        .def_readonly("variance", &EffectEstimate::variance)
        .def_readonly("n_total", &EffectEstimate::n_total)
        .def_property_readonly("measure", [](const EffectEstimate& e) {
            return std::string(measure_name(e.measure));
        });

    py::class_<PooledResult>(m, "PooledResult")
        .def_readonly("effect", &PooledResult::effect)
        .def_readonly("se", &PooledResult::se)
        .def_readonly("ci_low", &PooledResult::ci_low)
        .def_readonly("ci_high", &PooledResult::ci_high)
        .def_readonly("z", &PooledResult::z)
        .def_readonly("p", &PooledResult::p)
        .def_readonly("k", &PooledResult::k)
        .def_readonly("n_total", &PooledResult::n_total);

    py::class_<Heterogeneity>(m, "Heterogeneity")
        .def_readonly("Q", &Heterogeneity::q)
        .def_readonly("df", &Heterogeneity::df)
        .def_readonly("tau2", &Heterogeneity::tau2)
        .def_readonly("I2", &Heterogeneity::i2)
        .def_readonly("p_Q", &Heterogeneity::p_q);

    py::class_<MetaAnalysisResult>(m, "MetaAnalysisResult")
        .def_readonly("table", &MetaAnalysisResult::table)
        .def_readonly("estimates", &MetaAnalysisResult::estimates)
        .def_readonly("fixed", &MetaAnalysisResult::fixed)
        .def_readonly("random", &MetaAnalysisResult::random)
        .def_readonly("heterogeneity", &MetaAnalysisResult::heterogeneity)
        .def_readonly("title", &MetaAnalysisResult::title)
        .def_property_readonly("measure", [](const MetaAnalysisResult& r) {
            return std::string(measure_name(r.measure));
        });

    py::class_<MassPoint>(m, "MassPoint")
        .def(py::init([](std::string label, double effect, double se, long n_total) {
                 MassPoint p;
                 p.label = std::move(label);
                 p.effect = effect;
                 p.se = se;
                 p.n_total = n_total;
                 p.significant = std::abs(effect) >= kCritical95 * se;
                 return p;
             }),
             py::arg("label"), py::arg("effect"), py::arg("se"), py::arg("n_total"))
        .def_readonly("label", &MassPoint::label)
        .def_readonly("effect", &MassPoint::effect)
        .def_readonly("se", &MassPoint::se)
        .def_readonly("n_total", &MassPoint::n_total)
        .def_readonly("significant", &MassPoint::significant);

    m.def("guess_separator",
          [](const std::string& text) {
              return std::string(1, separator_char(guess_separator(text)));
          },
          py::arg("text"), "Guess the CSV separator; returns ',', ';' or '\\t'.");

    m.def("parse_table",
          [](const std::string& text, const py::dict& overrides) {
              return parse_table(text, overrides_from_dict(overrides));
          },
          py::arg("text"), py::arg("overrides") = py::dict(),
          "Parse CSV text into a study table. Override keys are role names "
          "such as 'group1_n'; values are 0-based column indices.");

    m.def("meta_analyze",
          [](const StudyTable& table, const std::string& measure) {
              AnalysisConfig config;
              config.measure = measure_or_throw(measure);
              return meta_analyze(table, config);
          },
          py::arg("table"), py::arg("measure") = "smd_hedges");

    m.def("analyze_csv",
          [](const std::string& text, const std::string& measure,
             const py::dict& overrides) {
              AnalysisConfig config;
              config.measure = measure_or_throw(measure);
              return meta_analyze(parse_table(text, overrides_from_dict(overrides)),
                                  config);
          },
          py::arg("text"), py::arg("measure") = "smd_hedges",
          py::arg("overrides") = py::dict(),
          "Parse and pool in one call.");

    m.def("smd",
          [](long n1, double mean1, double sd1, long n2, double mean2, double sd2,
             const std::string& variant) {
              return smd(GroupSummary{n1, mean1, sd1}, GroupSummary{n2, mean2, sd2},
                         variant == "cohen" ? SmdVariant::cohen : SmdVariant::hedges);
          },
          py::arg("n1"), py::arg("mean1"), py::arg("sd1"), py::arg("n2"),
          py::arg("mean2"), py::arg("sd2"), py::arg("variant") = "hedges");

    m.def("log_odds_ratio",
          [](long events1, long total1, long events2, long total2) {
              return log_odds_ratio(CountTable{events1, total1, events2, total2});
          },
          py::arg("events1"), py::arg("total1"), py::arg("events2"), py::arg("total2"));

    m.def("log_variance_ratio",
          [](long n1, double sd1, long n2, double sd2) {
              return log_variance_ratio(GroupSummary{n1, 0.0, sd1},
                                        GroupSummary{n2, 0.0, sd2});
          },
          py::arg("n1"), py::arg("sd1"), py::arg("n2"), py::arg("sd2"));

    m.def("pool_fixed",
          [](const std::vector<double>& effects, const std::vector<double>& variances) {
              return pool_fixed(estimates_from_lists(effects, variances));
          },
          py::arg("effects"), py::arg("variances"));

    m.def("pool_random_dl",
          [](const std::vector<double>& effects, const std::vector<double>& variances) {
              return pool_random_dl(estimates_from_lists(effects, variances));
          },
          py::arg("effects"), py::arg("variances"));

    m.def("heterogeneity",
          [](const std::vector<double>& effects, const std::vector<double>& variances) {
              const auto estimates = estimates_from_lists(effects, variances);
              return heterogeneity(estimates, pool_fixed(estimates).effect);
          },
          py::arg("effects"), py::arg("variances"));

    m.def("to_json", &to_json, py::arg("result"));
    m.def("to_csv", &to_csv, py::arg("result"));
    m.def("to_r_script",
          [](const StudyTable& table, const std::string& measure) {
              AnalysisConfig config;
              config.measure = measure_or_throw(measure);
              return to_r_script(table, config);
          },
          py::arg("table"), py::arg("measure") = "smd_hedges");
    m.def("write_csv",
          [](const StudyTable& table) { return write_csv(table); }, py::arg("table"));

    m.def("forest_svg",
          [](const MetaAnalysisResult& result) { return forest_svg(result).body; },
          py::arg("result"));
    m.def("funnel_svg",
          [](const MetaAnalysisResult& result) { return funnel_svg(result).body; },
          py::arg("result"));
    m.def("labbe_mass_svg",
          [](const std::vector<MassPoint>& points) { return labbe_mass_svg(points).body; },
          py::arg("points"));

    m.def("normal_cdf", &stats::normal_cdf, py::arg("x"));
    m.def("chi_square_sf", &stats::chi_square_sf, py::arg("x"), py::arg("df"));
}
