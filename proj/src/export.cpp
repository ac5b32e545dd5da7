#include "metacsv/export.hpp"

#include <cstdio>

#include "metacsv/errors.hpp"

namespace metacsv {

namespace {

std::string json_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size() + 2);
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

std::string quoted(std::string_view text) {
    return "\"" + json_escape(text) + "\"";
}

void pooled_json(std::string& out, const PooledResult& pooled, bool with_tau2,
                 double tau2) {
    out += "{\"effect\": " + format_sig12(pooled.effect);
    out += ", \"se\": " + format_sig12(pooled.se);
    out += ", \"ci_low\": " + format_sig12(pooled.ci_low);
    out += ", \"ci_high\": " + format_sig12(pooled.ci_high);
    out += ", \"z\": " + format_sig12(pooled.z);
    out += ", \"p\": " + format_sig12(pooled.p);
    if (with_tau2) out += ", \"tau2\": " + format_sig12(tau2);
    out += "}";
}

}  // namespace

std::string format_sig12(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

std::string to_json(const MetaAnalysisResult& result) {
    std::string out = "{\n";
    out += "  \"measure\": " + quoted(measure_name(result.measure)) + ",\n";
    out += "  \"title\": " + (result.title ? quoted(*result.title) : "null") + ",\n";
    out += "  \"studies\": [\n";
    for (std::size_t i = 0; i < result.estimates.size(); ++i) {
        const auto& est = result.estimates[i];
        out += "    {\"label\": " + quoted(est.study_label);
        out += ", \"effect\": " + format_sig12(est.effect);
        out += ", \"variance\": " + format_sig12(est.variance);
        out += ", \"n_total\": " + std::to_string(est.n_total) + "}";
        if (i + 1 < result.estimates.size()) out += ",";
        out += "\n";
    }
    out += "  ],\n";
    out += "  \"fixed\": ";
    pooled_json(out, result.fixed, false, 0.0);
    out += ",\n";
    out += "  \"random\": ";
    pooled_json(out, result.random, true, result.heterogeneity.tau2);
    out += ",\n";
    const auto& het = result.heterogeneity;
    out += "  \"heterogeneity\": {\"Q\": " + format_sig12(het.q);
    out += ", \"df\": " + std::to_string(het.df);
    out += ", \"I2\": " + format_sig12(het.i2);
    out += ", \"p_Q\": " + format_sig12(het.p_q) + "}\n";
    out += "}\n";
    return out;
}

std::string to_csv(const MetaAnalysisResult& result) {
    double sum_w_fixed = 0.0;
    double sum_w_random = 0.0;
    for (const auto& est : result.estimates) {
        sum_w_fixed += 1.0 / est.variance;
        sum_w_random += 1.0 / (est.variance + result.heterogeneity.tau2);
    }

    std::string out = "label,effect,variance,weight_fixed_pct,weight_random_pct\n";
    for (const auto& est : result.estimates) {
        const double wf = (1.0 / est.variance) / sum_w_fixed * 100.0;
        const double wr = (1.0 / (est.variance + result.heterogeneity.tau2)) /
                          sum_w_random * 100.0;
        out += csv_quote(est.study_label, ',') + "," + format_sig12(est.effect) + "," +
               format_sig12(est.variance) + "," + format_sig12(wf) + "," +
               format_sig12(wr) + "\n";
    }
    out += "FIXED," + format_sig12(result.fixed.effect) + "," +
           format_sig12(result.fixed.se * result.fixed.se) + ",,\n";
    out += "RANDOM," + format_sig12(result.random.effect) + "," +
           format_sig12(result.random.se * result.random.se) + ",,\n";
    return out;
}

namespace {

std::string r_string(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

std::string r_vector_labels(const std::vector<StudyRecord>& records) {
    std::string out = "labels <- c(";
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (i) out += ", ";
        out += r_string(records[i].label);
    }
    out += ")\n";
    return out;
}

template <typename Get>
std::string r_vector(const std::string& name, const std::vector<StudyRecord>& records,
                     Get get) {
    std::string out = name + " <- c(";
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (i) out += ", ";
        out += format_sig12(get(records[i]));
    }
    out += ")\n";
    return out;
}

}  // namespace

std::string to_r_script(const StudyTable& table, const AnalysisConfig& config) {
    const EffectMeasure measure = config.measure;
    if (measure == EffectMeasure::log_variance_ratio) {
        throw Error(errc::unsupported_measure,
                    "the sd-ratio measure has no direct `meta` equivalent");
    }
    const auto& records = table.records;
    std::string out = "# Generated by metacsv\n";
    out += "library(meta)\n\n";
    out += r_vector_labels(records);
    if (measure == EffectMeasure::log_odds_ratio) {
        out += r_vector("e1", records, [](const StudyRecord& r) {
            return static_cast<double>(r.counts->events1);
        });
        out += r_vector("t1", records, [](const StudyRecord& r) {
            return static_cast<double>(r.counts->total1);
        });
        out += r_vector("e2", records, [](const StudyRecord& r) {
            return static_cast<double>(r.counts->events2);
        });
        out += r_vector("t2", records, [](const StudyRecord& r) {
            return static_cast<double>(r.counts->total2);
        });
        out += "\nm <- metabin(e1, t1, e2, t2, studlab = labels, sm = \"OR\", "
               "method = \"Inverse\")\n";
    } else {
        out += r_vector("n1", records, [](const StudyRecord& r) {
            return static_cast<double>(r.group1->n);
        });
        out += r_vector("m1", records, [](const StudyRecord& r) { return r.group1->mean; });
        out += r_vector("sd1", records, [](const StudyRecord& r) { return r.group1->sd; });
        out += r_vector("n2", records, [](const StudyRecord& r) {
            return static_cast<double>(r.group2->n);
        });
        out += r_vector("m2", records, [](const StudyRecord& r) { return r.group2->mean; });
        out += r_vector("sd2", records, [](const StudyRecord& r) { return r.group2->sd; });
        const char* variant =
            measure == EffectMeasure::smd_cohen ? "Cohen" : "Hedges";
        out += "\nm <- metacont(n1, m1, sd1, n2, m2, sd2, studlab = labels, "
               "sm = \"SMD\", method.smd = \"" + std::string(variant) + "\")\n";
    }
    out += "summary(m)\n";
    out += "forest(m)\n";
    return out;
}

}  // namespace metacsv
