#ifndef METACSV_CSV_HPP
#define METACSV_CSV_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metacsv/errors.hpp"

namespace metacsv {

enum class Separator { comma, semicolon, tab };

char separator_char(Separator sep) noexcept;
std::string separator_name(Separator sep);

/// Semantic roles a CSV column can play. Group 1 is the patient/treated
/// arm, group 2 the control arm; events/totals are the 2x2 count columns
/// for binary outcomes.
enum class Role {
    group1_n,
    group1_mean,
    group1_sd,
    group2_n,
    group2_mean,
    group2_sd,
    label,
    year,
    events1,
    total1,
    events2,
    total2,
};

std::string_view role_name(Role role) noexcept;
std::optional<Role> role_from_name(std::string_view name) noexcept;

/// label and year are descriptive; everything else feeds the statistics.
bool is_statistical(Role role) noexcept;

inline constexpr Role kContinuousRoles[] = {
    Role::group1_n, Role::group1_mean, Role::group1_sd,
    Role::group2_n, Role::group2_mean, Role::group2_sd,
};
inline constexpr Role kBinaryRoles[] = {
    Role::events1, Role::total1, Role::events2, Role::total2,
};

struct ColumnMap {
    enum class Source { guessed, explicit_overrides, mixed };

    std::map<Role, std::size_t> roles;
    /// Columns without a role, kept as named covariates in column order.
    std::vector<std::pair<std::string, std::size_t>> covariates;
    Source source = Source::guessed;

    std::optional<std::size_t> index_of(Role role) const;
    bool has_continuous() const;
    bool has_binary() const;
    std::vector<Role> missing_continuous() const;
    std::vector<Role> missing_binary() const;

    bool operator==(const ColumnMap&) const = default;
};

struct GroupSummary {
    long n = 0;
    double mean = 0.0;
    double sd = 0.0;
    bool operator==(const GroupSummary&) const = default;
};

struct CountTable {
    long events1 = 0;
    long total1 = 0;
    long events2 = 0;
    long total2 = 0;
    bool operator==(const CountTable&) const = default;
};

struct StudyRecord {
    std::string label;
    std::optional<GroupSummary> group1;
    std::optional<GroupSummary> group2;
    std::optional<CountTable> counts;
    std::map<std::string, std::string> covariates;
    bool operator==(const StudyRecord&) const = default;
};

struct StudyTable {
    std::vector<StudyRecord> records;
    ColumnMap column_map;
    /// Original trimmed header cells, kept so a table can be written back
    /// out with the exact same column naming and order.
    std::vector<std::string> header;
    Separator separator = Separator::comma;
    std::optional<std::string> source_uri;
    std::optional<std::string> title;
    bool operator==(const StudyTable&) const = default;
};

using Overrides = std::map<Role, std::size_t>;

/// Header-pattern dictionary. Patterns are stored in normalized form (see
/// normalize_header); the default table ships both compiled in and as the
/// editable data/column_synonyms.json.
class SynonymTable {
public:
    static const SynonymTable& defaults();
    static SynonymTable from_json_text(const std::string& json_text);
    static SynonymTable from_json_file(const std::string& path);
    /// The table named by METACSV_SYNONYMS, or the compiled defaults.
    static SynonymTable from_env();

    void add(Role role, std::string_view pattern);
    std::optional<Role> lookup(std::string_view normalized) const;
    std::size_t size() const { return patterns_.size(); }

private:
    std::map<std::string, Role, std::less<>> patterns_;
};

/// Lowercase, replace punctuation with spaces, collapse whitespace, trim.
/// "Number_of-Controls " -> "number of controls".
std::string normalize_header(std::string_view cell);

/// Pick the separator whose per-line count (outside quoted cells) is
/// positive and identical across all non-empty lines. Ties prefer comma,
/// then semicolon, then tab. Throws NoConsistentSeparator otherwise.
Separator guess_separator(std::string_view raw_text);

/// Map header cells to roles through the synonym dictionary; unmatched
/// headers become covariates. Throws AmbiguousHeader when two headers
/// resolve to one statistical role.
ColumnMap match_columns(const std::vector<std::string>& header,
                        const SynonymTable& synonyms = SynonymTable::defaults());

/// Full ingestion: guess separator, match columns, apply overrides
/// (overrides win role-by-role), parse every row into a StudyRecord.
StudyTable parse_table(std::string_view raw_text,
                       const Overrides& overrides = {},
                       const SynonymTable& synonyms = SynonymTable::defaults());

/// Serialize a table back to CSV text with the given separator. Fields are
/// quoted when they contain the separator, a quote, or a newline.
std::string write_csv(const StudyTable& table, Separator separator);
std::string write_csv(const StudyTable& table);

/// Split one line into cells, honoring double-quote quoting with
/// doubled-quote escapes.
std::vector<std::string> split_line(std::string_view line, char sep);

/// Quote a single cell for the given separator if needed.
std::string csv_quote(std::string_view cell, char sep);

}  // namespace metacsv

#endif
