#include "metacsv/effects.hpp"

#include <cmath>

#include "metacsv/errors.hpp"

namespace metacsv {

namespace {

void check_group(const GroupSummary& g, const char* which) {
    if (g.n < 2) {
        throw Error(errc::insufficient_subjects,
                    std::string(which) + " needs n >= 2");
    }
    if (!(g.sd > 0.0)) {
        throw Error(errc::invariant_violation,
                    std::string(which) + " needs sd > 0");
    }
}

}  // namespace

std::string_view measure_name(EffectMeasure measure) noexcept {
    switch (measure) {
        case EffectMeasure::smd_cohen: return "smd_cohen";
        case EffectMeasure::smd_hedges: return "smd_hedges";
        case EffectMeasure::log_odds_ratio: return "log_odds_ratio";
        case EffectMeasure::log_variance_ratio: return "log_variance_ratio";
    }
    return "smd_hedges";
}

std::optional<EffectMeasure> measure_from_name(std::string_view name) noexcept {
    if (name == "smd_cohen") return EffectMeasure::smd_cohen;
    if (name == "smd_hedges" || name == "smd") return EffectMeasure::smd_hedges;
    if (name == "log_odds_ratio" || name == "or" || name == "lor") {
        return EffectMeasure::log_odds_ratio;
    }
    if (name == "log_variance_ratio" || name == "vr" || name == "lvr") {
        return EffectMeasure::log_variance_ratio;
    }
    return std::nullopt;
}

bool is_continuous_measure(EffectMeasure measure) noexcept {
    return measure != EffectMeasure::log_odds_ratio;
}

EffectEstimate smd(const GroupSummary& g1, const GroupSummary& g2,
                   SmdVariant variant, std::string label) {
    check_group(g1, "group 1");
    check_group(g2, "group 2");
    const double n1 = static_cast<double>(g1.n);
    const double n2 = static_cast<double>(g2.n);
    const double n = n1 + n2;
    if (variant == SmdVariant::hedges && g1.n + g2.n < 5) {
        throw Error(errc::insufficient_subjects,
                    "Hedges correction needs n1 + n2 >= 5");
    }

    const double pooled_var =
        ((n1 - 1.0) * g1.sd * g1.sd + (n2 - 1.0) * g2.sd * g2.sd) / (n - 2.0);
    if (!(pooled_var > 0.0)) {
        throw Error(errc::degenerate_variance, "pooled sd is zero");
    }
    const double d = (g1.mean - g2.mean) / std::sqrt(pooled_var);
    const double var_d = n / (n1 * n2) + d * d / (2.0 * n);

    EffectEstimate est;
    est.study_label = std::move(label);
    est.n_total = g1.n + g2.n;
    if (variant == SmdVariant::cohen) {
        est.effect = d;
        est.variance = var_d;
        est.measure = EffectMeasure::smd_cohen;
    } else {
        const double j = 1.0 - 3.0 / (4.0 * (n - 2.0) - 1.0);
        est.effect = j * d;
        est.variance = j * j * var_d;
        est.measure = EffectMeasure::smd_hedges;
    }
    return est;
}

EffectEstimate log_odds_ratio(const CountTable& counts, std::string label) {
    if (counts.total1 < 1 || counts.total2 < 1) {
        throw Error(errc::all_zero_arm, "an arm has no subjects");
    }
    if (counts.events1 < 0 || counts.events2 < 0 ||
        counts.events1 > counts.total1 || counts.events2 > counts.total2) {
        throw Error(errc::invariant_violation, "events must lie in [0, total]");
    }
    double a = static_cast<double>(counts.events1);
    double b = static_cast<double>(counts.total1 - counts.events1);
    double c = static_cast<double>(counts.events2);
    double d = static_cast<double>(counts.total2 - counts.events2);
    if (a == 0.0 || b == 0.0 || c == 0.0 || d == 0.0) {
        a += 0.5;
        b += 0.5;
        c += 0.5;
        d += 0.5;
    }

    EffectEstimate est;
    est.study_label = std::move(label);
    est.effect = std::log((a * d) / (b * c));
    est.variance = 1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d;
    est.measure = EffectMeasure::log_odds_ratio;
    est.n_total = counts.total1 + counts.total2;
    return est;
}

EffectEstimate log_variance_ratio(const GroupSummary& g1, const GroupSummary& g2,
                                  std::string label) {
    check_group(g1, "group 1");
    check_group(g2, "group 2");
    EffectEstimate est;
    est.study_label = std::move(label);
    est.effect = std::log(g1.sd / g2.sd);
    est.variance = 1.0 / (2.0 * (g1.n - 1)) + 1.0 / (2.0 * (g2.n - 1));
    est.measure = EffectMeasure::log_variance_ratio;
    est.n_total = g1.n + g2.n;
    return est;
}

}  // namespace metacsv
