#ifndef METACSV_ERRORS_HPP
#define METACSV_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace metacsv {

/// Every failure the toolkit raises carries a stable CamelCase code
/// (e.g. "NoConsistentSeparator", "MissingRequiredColumns") so the CLI
/// and the HTTP service can report machine-readable errors. `detail`
/// holds structured context such as line numbers or missing role names.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message, std::string detail = {})
        : std::runtime_error(message.empty() ? code : code + ": " + message),
          code_(std::move(code)),
          message_(message),
          detail_(std::move(detail)) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& message() const noexcept { return message_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string code_;
    std::string message_;
    std::string detail_;
};

namespace errc {
inline constexpr const char* no_consistent_separator = "NoConsistentSeparator";
inline constexpr const char* ambiguous_header = "AmbiguousHeader";
inline constexpr const char* missing_required_columns = "MissingRequiredColumns";
inline constexpr const char* row_arity_mismatch = "RowArityMismatch";
inline constexpr const char* non_numeric_cell = "NonNumericCell";
inline constexpr const char* invariant_violation = "InvariantViolation";
inline constexpr const char* degenerate_variance = "DegenerateVariance";
inline constexpr const char* insufficient_subjects = "InsufficientSubjects";
inline constexpr const char* all_zero_arm = "AllZeroArm";
inline constexpr const char* empty_input = "EmptyInput";
inline constexpr const char* mixed_measures = "MixedMeasures";
inline constexpr const char* unsupported_measure = "UnsupportedMeasure";
inline constexpr const char* not_csv_title = "NotCsvTitle";
inline constexpr const char* http_failure = "HttpFailure";
inline constexpr const char* empty_page = "EmptyPage";
inline constexpr const char* no_link_source = "NoLinkSource";
inline constexpr const char* bad_request = "BadRequest";
inline constexpr const char* io_failure = "IoFailure";
}  // namespace errc

}  // namespace metacsv

#endif
