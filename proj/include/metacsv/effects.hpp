#ifndef METACSV_EFFECTS_HPP
#define METACSV_EFFECTS_HPP

#include <optional>
#include <string>
#include <string_view>

#include "metacsv/csv.hpp"

namespace metacsv {

enum class EffectMeasure { smd_cohen, smd_hedges, log_odds_ratio, log_variance_ratio };
enum class SmdVariant { cohen, hedges };

std::string_view measure_name(EffectMeasure measure) noexcept;
std::optional<EffectMeasure> measure_from_name(std::string_view name) noexcept;
bool is_continuous_measure(EffectMeasure measure) noexcept;

struct EffectEstimate {
    std::string study_label;
    double effect = 0.0;
    double variance = 0.0;
    EffectMeasure measure = EffectMeasure::smd_hedges;
    long n_total = 0;
};

/// Standardized mean difference between the two groups.
///
/// Cohen's d divides the mean difference by the pooled sd
///   s_p = sqrt(((n1-1) sd1^2 + (n2-1) sd2^2) / (n1+n2-2)),
/// with variance (n1+n2)/(n1 n2) + d^2 / (2 (n1+n2)).
/// Hedges' g applies the small-sample correction J = 1 - 3/(4(n1+n2-2)-1);
/// its variance is J^2 times the Cohen variance. Hedges requires
/// n1 + n2 >= 5.
EffectEstimate smd(const GroupSummary& g1, const GroupSummary& g2,
                   SmdVariant variant, std::string label = {});

/// Natural log of the odds ratio from a 2x2 table. When any cell is zero,
/// 0.5 is added to all four cells before taking logs; the variance is the
/// sum of reciprocals of the (corrected) cells.
EffectEstimate log_odds_ratio(const CountTable& counts, std::string label = {});

/// Natural log of the sd ratio, ln(sd1/sd2), with variance
/// 1/(2(n1-1)) + 1/(2(n2-1)). Compares group spreads rather than means.
/// Note this is the sd-ratio scale; the variance-ratio scale would be
/// exactly twice this effect.
EffectEstimate log_variance_ratio(const GroupSummary& g1, const GroupSummary& g2,
                                  std::string label = {});

}  // namespace metacsv

#endif
