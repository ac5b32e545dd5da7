#ifndef METACSV_POOLING_HPP
#define METACSV_POOLING_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "metacsv/csv.hpp"
#include "metacsv/effects.hpp"

namespace metacsv {

/// 95% two-sided normal critical value, fixed so outputs are reproducible.
inline constexpr double kCritical95 = 1.959964;

struct Heterogeneity {
    double q = 0.0;
    long df = 0;
    double tau2 = 0.0;
    double i2 = 0.0;  // percent, in [0, 100]
    double p_q = 1.0;
};

enum class PoolModel { fixed, random_dl };

struct PooledResult {
    PoolModel model = PoolModel::fixed;
    double effect = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double z = 0.0;
    double p = 1.0;
    std::size_t k = 0;
    long n_total = 0;
};

struct AnalysisConfig {
    EffectMeasure measure = EffectMeasure::smd_hedges;
};

struct MetaAnalysisResult {
    StudyTable table;
    std::vector<EffectEstimate> estimates;
    PooledResult fixed;
    PooledResult random;
    Heterogeneity heterogeneity;
    EffectMeasure measure = EffectMeasure::smd_hedges;
    std::optional<std::string> title;
    std::vector<long> pubmed_ids;
};

/// Inverse-variance fixed-effect pool: weights 1/v_i.
PooledResult pool_fixed(const std::vector<EffectEstimate>& estimates);

/// Cochran's Q against the fixed pooled effect, DerSimonian-Laird tau^2
/// (truncated at zero), I^2 and the chi-square p-value for Q.
Heterogeneity heterogeneity(const std::vector<EffectEstimate>& estimates,
                            double fixed_effect);

/// DerSimonian-Laird random-effects pool: weights 1/(v_i + tau^2).
PooledResult pool_random_dl(const std::vector<EffectEstimate>& estimates);

/// Whole pipeline for one parsed table: per-study effects for the chosen
/// measure, then fixed, heterogeneity and random pooled results.
MetaAnalysisResult meta_analyze(const StudyTable& table,
                                const AnalysisConfig& config = {});

}  // namespace metacsv

#endif
