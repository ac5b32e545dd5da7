#include "metacsv/pooling.hpp"

#include <cmath>

#include "metacsv/errors.hpp"
#include "metacsv/stats.hpp"

namespace metacsv {

namespace {

void check_estimates(const std::vector<EffectEstimate>& estimates) {
    if (estimates.empty()) {
        throw Error(errc::empty_input, "no effect estimates to pool");
    }
    for (const auto& est : estimates) {
        if (est.measure != estimates.front().measure) {
            throw Error(errc::mixed_measures,
                        "estimates mix effect measures",
                        std::string(measure_name(estimates.front().measure)) + " vs " +
                            std::string(measure_name(est.measure)));
        }
        if (!(est.variance > 0.0)) {
            throw Error(errc::invariant_violation,
                        "estimate variance must be positive", est.study_label);
        }
    }
}

PooledResult pooled_from_weights(const std::vector<EffectEstimate>& estimates,
                                 const std::vector<double>& weights,
                                 PoolModel model) {
    double sum_w = 0.0;
    double sum_wy = 0.0;
    long n_total = 0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        sum_w += weights[i];
        sum_wy += weights[i] * estimates[i].effect;
        n_total += estimates[i].n_total;
    }
    PooledResult result;
    result.model = model;
    result.effect = sum_wy / sum_w;
    result.se = std::sqrt(1.0 / sum_w);
    result.ci_low = result.effect - kCritical95 * result.se;
    result.ci_high = result.effect + kCritical95 * result.se;
    result.z = result.effect / result.se;
    result.p = stats::two_sided_p(result.z);
    result.k = estimates.size();
    result.n_total = n_total;
    return result;
}

}  // namespace

PooledResult pool_fixed(const std::vector<EffectEstimate>& estimates) {
    check_estimates(estimates);
    std::vector<double> weights(estimates.size());
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        weights[i] = 1.0 / estimates[i].variance;
    }
    return pooled_from_weights(estimates, weights, PoolModel::fixed);
}

Heterogeneity heterogeneity(const std::vector<EffectEstimate>& estimates,
                            double fixed_effect) {
    check_estimates(estimates);
    const std::size_t k = estimates.size();

    double sum_w = 0.0;
    double sum_w2 = 0.0;
    double q = 0.0;
    for (const auto& est : estimates) {
        const double w = 1.0 / est.variance;
        const double resid = est.effect - fixed_effect;
        sum_w += w;
        sum_w2 += w * w;
        q += w * resid * resid;
    }
    // One study has no heterogeneity; keep Q at exactly zero rather than
    // the rounding residue of (w*y)/w - y.
    if (k == 1) q = 0.0;

    Heterogeneity het;
    het.q = q;
    het.df = static_cast<long>(k) - 1;
    if (k >= 2) {
        const double denom = sum_w - sum_w2 / sum_w;
        het.tau2 = std::max(0.0, (q - static_cast<double>(het.df)) / denom);
    } else {
        het.tau2 = 0.0;
    }
    het.i2 = q > 0.0 ? std::max(0.0, (q - static_cast<double>(het.df)) / q) * 100.0
                     : 0.0;
    het.p_q = k == 1 ? 1.0 : stats::chi_square_sf(q, static_cast<double>(het.df));
    return het;
}

PooledResult pool_random_dl(const std::vector<EffectEstimate>& estimates) {
    const PooledResult fixed = pool_fixed(estimates);
    const Heterogeneity het = heterogeneity(estimates, fixed.effect);
    std::vector<double> weights(estimates.size());
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        weights[i] = 1.0 / (estimates[i].variance + het.tau2);
    }
    return pooled_from_weights(estimates, weights, PoolModel::random_dl);
}

MetaAnalysisResult meta_analyze(const StudyTable& table, const AnalysisConfig& config) {
    const EffectMeasure measure = config.measure;
    const auto& map = table.column_map;
    if (is_continuous_measure(measure)) {
        if (!map.has_continuous()) {
            std::string missing;
            for (const Role role : map.missing_continuous()) {
                if (!missing.empty()) missing += ", ";
                missing += role_name(role);
            }
            throw Error(errc::missing_required_columns,
                        "measure needs the six group columns", missing);
        }
    } else if (!map.has_binary()) {
        std::string missing;
        for (const Role role : map.missing_binary()) {
            if (!missing.empty()) missing += ", ";
            missing += role_name(role);
        }
        throw Error(errc::missing_required_columns,
                    "measure needs the four count columns", missing);
    }

    MetaAnalysisResult result;
    result.table = table;
    result.measure = measure;
    result.title = table.title;
    result.estimates.reserve(table.records.size());
    for (const auto& record : table.records) {
        try {
            switch (measure) {
                case EffectMeasure::smd_cohen:
                    result.estimates.push_back(
                        smd(*record.group1, *record.group2, SmdVariant::cohen,
                            record.label));
                    break;
                case EffectMeasure::smd_hedges:
                    result.estimates.push_back(
                        smd(*record.group1, *record.group2, SmdVariant::hedges,
                            record.label));
                    break;
                case EffectMeasure::log_odds_ratio:
                    result.estimates.push_back(log_odds_ratio(*record.counts, record.label));
                    break;
                case EffectMeasure::log_variance_ratio:
                    result.estimates.push_back(
                        log_variance_ratio(*record.group1, *record.group2, record.label));
                    break;
            }
        } catch (const Error& e) {
            throw Error(e.code(), record.label + ": " + e.message(), e.detail());
        }
    }

    result.fixed = pool_fixed(result.estimates);
    result.heterogeneity = heterogeneity(result.estimates, result.fixed.effect);
    result.random = pool_random_dl(result.estimates);
    return result;
}

}  // namespace metacsv
