#ifndef METACSV_PLOTS_HPP
#define METACSV_PLOTS_HPP

#include <string>
#include <vector>

#include "metacsv/pooling.hpp"

namespace metacsv {

struct SvgDocument {
    int width = 0;
    int height = 0;
    std::string body;  // complete XML text
};

/// One meta-analysis reduced to a dot on the aggregate plot.
struct MassPoint {
    std::string label;
    double effect = 0.0;
    double se = 0.0;
    long n_total = 0;
    bool significant = false;
};

/// Build the aggregate-plot point from a finished analysis: random-model
/// effect and se, total subjects, significance at the fixed 95% critical
/// value.
MassPoint mass_point(const MetaAnalysisResult& result, std::string label);

/// Forest plot: one row per study (square sized by random-model weight
/// share, 95% CI whisker, label and effect text), diamonds for the fixed
/// and random pooled results, a zero reference line and a heterogeneity
/// caption. 800 px wide, 28*(k+2)+80 px tall.
SvgDocument forest_svg(const MetaAnalysisResult& result);

/// Funnel plot: effect vs standard error with se = 0 at the top, a
/// vertical line at the fixed pooled effect and the pseudo-95% funnel
/// boundaries. 640x480 px.
SvgDocument funnel_svg(const MetaAnalysisResult& result);

/// Aggregate plot over many meta-analyses: effect vs random-model se, dot
/// area grows with subject count, rays |effect| = 1.959964 * se mark the
/// 0.05 significance boundary. 640x480 px.
SvgDocument labbe_mass_svg(const std::vector<MassPoint>& points);

/// Escape &, <, >, " and ' for XML text and attribute values.
std::string xml_escape(std::string_view text);

}  // namespace metacsv

#endif
