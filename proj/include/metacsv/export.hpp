#ifndef METACSV_EXPORT_HPP
#define METACSV_EXPORT_HPP

#include <string>

#include "metacsv/pooling.hpp"

namespace metacsv {

enum class ExportFormat { json, csv, r_script };

/// Fixed-schema JSON: measure, title, studies[], fixed{}, random{ + tau2},
/// heterogeneity{}. Numbers carry 12 significant digits and the key order
/// never changes, so output is byte-stable.
std::string to_json(const MetaAnalysisResult& result);

/// One line per study (label, effect, variance, fixed/random weight
/// percentages) plus FIXED and RANDOM summary lines.
std::string to_csv(const MetaAnalysisResult& result);

/// A small R script that loads the study vectors and reruns the analysis
/// with the external `meta` package. Throws UnsupportedMeasure for the
/// sd-ratio measure, which has no direct equivalent there.
std::string to_r_script(const StudyTable& table, const AnalysisConfig& config);

/// "%.12g" rendering used by all exporters.
std::string format_sig12(double value);

}  // namespace metacsv

#endif
