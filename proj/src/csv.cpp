#include "metacsv/csv.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace metacsv {

namespace {

const std::array<std::pair<Separator, char>, 3> kSeparators{{
    {Separator::comma, ','},
    {Separator::semicolon, ';'},
    {Separator::tab, '\t'},
}};

struct RoleName {
    Role role;
    std::string_view name;
};

constexpr RoleName kRoleNames[] = {
    {Role::group1_n, "group1_n"},       {Role::group1_mean, "group1_mean"},
    {Role::group1_sd, "group1_sd"},     {Role::group2_n, "group2_n"},
    {Role::group2_mean, "group2_mean"}, {Role::group2_sd, "group2_sd"},
    {Role::label, "label"},             {Role::year, "year"},
    {Role::events1, "events1"},         {Role::total1, "total1"},
    {Role::events2, "events2"},         {Role::total2, "total2"},
};

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

/// Lines of the input keyed by their 1-based position; blank lines are
/// dropped but numbering is preserved for error reporting.
std::vector<std::pair<std::size_t, std::string_view>> nonblank_lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> lines;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = (nl == std::string_view::npos)
                                    ? text.substr(pos)
                                    : text.substr(pos, nl - pos);
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        bool blank = line.find_first_not_of(" \t") == std::string_view::npos;
        if (!blank) lines.emplace_back(lineno, line);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return lines;
}

std::size_t count_outside_quotes(std::string_view line, char c) {
    std::size_t count = 0;
    bool in_quotes = false;
    for (char ch : line) {
        if (ch == '"') in_quotes = !in_quotes;
        else if (ch == c && !in_quotes) ++count;
    }
    return count;
}

/// Strict numeric cell: optional sign, decimal or scientific notation,
/// whole cell consumed. A comma decimal mark is rejected by construction.
std::optional<double> parse_number(std::string_view cell) {
    std::string t = trim(cell);
    if (t.empty()) return std::nullopt;
    std::string_view v = t;
    if (v.front() == '+') v.remove_prefix(1);
    if (v.empty()) return std::nullopt;
    // from_chars accepts "inf"/"nan"; data cells must be plain numbers.
    if (!std::isdigit(static_cast<unsigned char>(v.front())) && v.front() != '-' &&
        v.front() != '.') {
        return std::nullopt;
    }
    double value = 0.0;
    const char* begin = v.data();
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::optional<long> parse_count(std::string_view cell) {
    auto value = parse_number(cell);
    if (!value) return std::nullopt;
    double rounded = std::nearbyint(*value);
    if (rounded != *value || *value < 0 || *value > 1e15) return std::nullopt;
    return static_cast<long>(rounded);
}

std::string join_roles(const std::vector<Role>& roles) {
    std::string out;
    for (const Role role : roles) {
        if (!out.empty()) out += ", ";
        out += role_name(role);
    }
    return out;
}

std::string render_number(double value) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    (void)ec;
    return std::string(buf.data(), ptr);
}

}  // namespace

char separator_char(Separator sep) noexcept {
    for (const auto& [s, c] : kSeparators) {
        if (s == sep) return c;
    }
    return ',';
}

std::string separator_name(Separator sep) {
    switch (sep) {
        case Separator::comma: return "comma";
        case Separator::semicolon: return "semicolon";
        case Separator::tab: return "tab";
    }
    return "comma";
}

std::string_view role_name(Role role) noexcept {
    for (const auto& rn : kRoleNames) {
        if (rn.role == role) return rn.name;
    }
    return "unknown";
}

std::optional<Role> role_from_name(std::string_view name) noexcept {
    for (const auto& rn : kRoleNames) {
        if (rn.name == name) return rn.role;
    }
    return std::nullopt;
}

bool is_statistical(Role role) noexcept {
    return role != Role::label && role != Role::year;
}

std::optional<std::size_t> ColumnMap::index_of(Role role) const {
    auto it = roles.find(role);
    if (it == roles.end()) return std::nullopt;
    return it->second;
}

bool ColumnMap::has_continuous() const { return missing_continuous().empty(); }
bool ColumnMap::has_binary() const { return missing_binary().empty(); }

std::vector<Role> ColumnMap::missing_continuous() const {
    std::vector<Role> missing;
    for (const Role role : kContinuousRoles) {
        if (!roles.count(role)) missing.push_back(role);
    }
    return missing;
}

std::vector<Role> ColumnMap::missing_binary() const {
    std::vector<Role> missing;
    for (const Role role : kBinaryRoles) {
        if (!roles.count(role)) missing.push_back(role);
    }
    return missing;
}

std::string normalize_header(std::string_view cell) {
    std::string out;
    out.reserve(cell.size());
    bool pending_space = false;
    for (char raw : cell) {
        const auto c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            if (pending_space && !out.empty()) out += ' ';
            pending_space = false;
            out += static_cast<char>(std::tolower(c));
        } else {
            pending_space = true;
        }
    }
    return out;
}

void SynonymTable::add(Role role, std::string_view pattern) {
    patterns_[normalize_header(pattern)] = role;
}

std::optional<Role> SynonymTable::lookup(std::string_view normalized) const {
    auto it = patterns_.find(normalized);
    if (it == patterns_.end()) return std::nullopt;
    return it->second;
}

const SynonymTable& SynonymTable::defaults() {
    static const SynonymTable table = [] {
        SynonymTable t;
        const auto seed = [&t](Role role, std::initializer_list<const char*> pats) {
            for (const char* p : pats) t.add(role, p);
        };
        seed(Role::group1_n,
             {"patients n", "patient n", "n patients", "patients number",
              "number of patients", "patient number", "n1", "group 1 n",
              "cases n", "treated n", "experimental n"});
        seed(Role::group1_mean,
             {"patients mean", "patient mean", "mean patients", "m1", "mean 1",
              "group 1 mean", "cases mean", "treated mean", "experimental mean"});
        seed(Role::group1_sd,
             {"patients sd", "patient sd", "sd patients",
              "patients standard deviation", "sd1", "sd 1", "group 1 sd",
              "cases sd", "treated sd", "experimental sd"});
        seed(Role::group2_n,
             {"controls n", "control n", "controls number", "number of controls",
              "control number", "n controls", "n2", "group 2 n", "comparison n"});
        seed(Role::group2_mean,
             {"controls mean", "control mean", "mean controls", "m2", "mean 2",
              "group 2 mean", "comparison mean"});
        seed(Role::group2_sd,
             {"controls sd", "control sd", "sd controls",
              "controls standard deviation", "sd2", "sd 2", "group 2 sd",
              "comparison sd"});
        seed(Role::label,
             {"study", "label", "study label", "name", "author", "paper",
              "reference", "study id"});
        seed(Role::year,
             {"year", "publication year", "year of publication", "pub year",
              "date"});
        seed(Role::events1,
             {"events treated", "treated events", "events patients",
              "patients events", "events 1", "e1", "events group 1",
              "cases events", "experimental events"});
        seed(Role::total1,
             {"total treated", "treated total", "total patients",
              "patients total", "total 1", "t1", "total group 1", "total cases"});
        seed(Role::events2,
             {"events control", "events controls", "control events",
              "controls events", "events 2", "e2", "events group 2"});
        seed(Role::total2,
             {"total control", "total controls", "control total",
              "controls total", "total 2", "t2", "total group 2"});
        return t;
    }();
    return table;
}

SynonymTable SynonymTable::from_json_text(const std::string& json_text) {
    SynonymTable table;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(errc::bad_request, std::string("invalid synonym file: ") + e.what());
    }
    if (!doc.is_object()) {
        throw Error(errc::bad_request, "synonym file must be a JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
        auto role = role_from_name(key);
        if (!role) {
            throw Error(errc::bad_request, "unknown column role in synonym file", key);
        }
        if (!value.is_array()) {
            throw Error(errc::bad_request, "synonym patterns must be an array", key);
        }
        for (const auto& pattern : value) {
            table.add(*role, pattern.get<std::string>());
        }
    }
    return table;
}

SynonymTable SynonymTable::from_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(errc::io_failure, "cannot read synonym file", path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

SynonymTable SynonymTable::from_env() {
    if (const char* path = std::getenv("METACSV_SYNONYMS")) {
        return from_json_file(path);
    }
    return defaults();
}

Separator guess_separator(std::string_view raw_text) {
    const auto lines = nonblank_lines(raw_text);
    if (!lines.empty()) {
        for (const auto& [sep, c] : kSeparators) {
            const std::size_t first = count_outside_quotes(lines.front().second, c);
            if (first == 0) continue;
            bool constant = true;
            for (const auto& [lineno, line] : lines) {
                if (count_outside_quotes(line, c) != first) {
                    constant = false;
                    break;
                }
            }
            if (constant) return sep;
        }
    }
    throw Error(errc::no_consistent_separator,
                "no candidate separator has a constant positive per-line count");
}

std::vector<std::string> split_line(std::string_view line, char sep) {
    std::vector<std::string> cells;
    std::string cell;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '"') {
            if (in_quotes && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else {
                in_quotes = !in_quotes;
            }
        } else if (c == sep && !in_quotes) {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::string csv_quote(std::string_view cell, char sep) {
    const bool needs_quotes =
        cell.find(sep) != std::string_view::npos ||
        cell.find('"') != std::string_view::npos ||
        cell.find('\n') != std::string_view::npos ||
        cell.find('\r') != std::string_view::npos;
    if (!needs_quotes) return std::string(cell);
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

ColumnMap match_columns(const std::vector<std::string>& header,
                        const SynonymTable& synonyms) {
    if (header.empty()) {
        throw Error(errc::invariant_violation, "empty header");
    }
    ColumnMap map;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string normalized = normalize_header(header[i]);
        const auto role = synonyms.lookup(normalized);
        if (role && is_statistical(*role)) {
            if (map.roles.count(*role)) {
                throw Error(errc::ambiguous_header,
                            "two headers resolve to one statistical role",
                            std::string(role_name(*role)));
            }
            map.roles[*role] = i;
            continue;
        }
        if (role && !map.roles.count(*role)) {
            map.roles[*role] = i;
            continue;
        }
        // Covariate column; keep the lowercased header as its name,
        // suffixing duplicates with their position.
        std::string name = lower(trim(header[i]));
        for (const auto& [existing, idx] : map.covariates) {
            if (existing == name) {
                name += "_" + std::to_string(i + 1);
                break;
            }
        }
        map.covariates.emplace_back(std::move(name), i);
    }
    map.source = ColumnMap::Source::guessed;
    return map;
}

namespace {

bool covers(const Overrides& overrides, const Role* roles, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!overrides.count(roles[i])) return false;
    }
    return true;
}

GroupSummary parse_group(const std::vector<std::string>& cells, const ColumnMap& map,
                         Role n_role, Role mean_role, Role sd_role,
                         std::size_t lineno) {
    const auto cell_at = [&](Role role) -> const std::string& {
        return cells[*map.index_of(role)];
    };
    const auto numeric = [&](Role role) {
        auto value = parse_number(cell_at(role));
        if (!value) {
            throw Error(errc::non_numeric_cell, "cell is not numeric",
                        "line " + std::to_string(lineno) + ", column " +
                            std::to_string(*map.index_of(role)) + " (" +
                            std::string(role_name(role)) + ")");
        }
        return *value;
    };
    GroupSummary g;
    const auto n = parse_count(cell_at(n_role));
    if (!n) {
        // distinguish non-numeric text from a numeric non-count
        if (!parse_number(cell_at(n_role))) {
            throw Error(errc::non_numeric_cell, "cell is not numeric",
                        "line " + std::to_string(lineno) + ", column " +
                            std::to_string(*map.index_of(n_role)) + " (" +
                            std::string(role_name(n_role)) + ")");
        }
        throw Error(errc::invariant_violation, "subject count must be a whole number",
                    "line " + std::to_string(lineno));
    }
    g.n = *n;
    g.mean = numeric(mean_role);
    g.sd = numeric(sd_role);
    if (g.n < 2) {
        throw Error(errc::invariant_violation, "group needs n >= 2",
                    "line " + std::to_string(lineno));
    }
    if (!(g.sd > 0.0)) {
        throw Error(errc::invariant_violation, "sd must be positive",
                    "line " + std::to_string(lineno));
    }
    return g;
}

CountTable parse_counts(const std::vector<std::string>& cells, const ColumnMap& map,
                        std::size_t lineno) {
    const auto count_at = [&](Role role) {
        auto value = parse_count(cells[*map.index_of(role)]);
        if (!value) {
            if (!parse_number(cells[*map.index_of(role)])) {
                throw Error(errc::non_numeric_cell, "cell is not numeric",
                            "line " + std::to_string(lineno) + ", column " +
                                std::to_string(*map.index_of(role)) + " (" +
                                std::string(role_name(role)) + ")");
            }
            throw Error(errc::invariant_violation,
                        "event and total counts must be whole non-negative numbers",
                        "line " + std::to_string(lineno));
        }
        return *value;
    };
    CountTable t;
    t.events1 = count_at(Role::events1);
    t.total1 = count_at(Role::total1);
    t.events2 = count_at(Role::events2);
    t.total2 = count_at(Role::total2);
    if (t.total1 < 1 || t.total2 < 1) {
        throw Error(errc::invariant_violation, "arm total must be >= 1",
                    "line " + std::to_string(lineno));
    }
    if (t.events1 > t.total1 || t.events2 > t.total2) {
        throw Error(errc::invariant_violation, "events exceed arm total",
                    "line " + std::to_string(lineno));
    }
    return t;
}

}  // namespace

StudyTable parse_table(std::string_view raw_text, const Overrides& overrides,
                       const SynonymTable& synonyms) {
    const Separator sep = guess_separator(raw_text);
    const char sep_char = separator_char(sep);
    const auto lines = nonblank_lines(raw_text);

    StudyTable table;
    table.separator = sep;
    for (auto& cell : split_line(lines.front().second, sep_char)) {
        table.header.push_back(trim(cell));
    }
    for (const auto& cell : table.header) {
        if (cell.empty()) {
            throw Error(errc::invariant_violation, "empty header cell",
                        "line " + std::to_string(lines.front().first));
        }
    }

    ColumnMap map = match_columns(table.header, synonyms);
    if (!overrides.empty()) {
        for (const auto& [role, index] : overrides) {
            if (index >= table.header.size()) {
                throw Error(errc::bad_request, "override column index out of range",
                            std::string(role_name(role)) + " -> " +
                                std::to_string(index));
            }
            map.roles[role] = index;
        }
        const bool all_continuous = covers(overrides, kContinuousRoles,
                                           std::size(kContinuousRoles));
        const bool all_binary = covers(overrides, kBinaryRoles, std::size(kBinaryRoles));
        map.source = (all_continuous || all_binary) ? ColumnMap::Source::explicit_overrides
                                                    : ColumnMap::Source::mixed;
        // Covariates are whatever no role claims.
        std::set<std::size_t> used;
        for (const auto& [role, index] : map.roles) used.insert(index);
        map.covariates.clear();
        for (std::size_t i = 0; i < table.header.size(); ++i) {
            if (used.count(i)) continue;
            std::string name = lower(trim(table.header[i]));
            for (const auto& [existing, idx] : map.covariates) {
                if (existing == name) {
                    name += "_" + std::to_string(i + 1);
                    break;
                }
            }
            map.covariates.emplace_back(std::move(name), i);
        }
    }

    const bool continuous = map.has_continuous();
    const bool binary = map.has_binary();
    if (!continuous && !binary) {
        const auto missing_c = map.missing_continuous();
        const auto missing_b = map.missing_binary();
        const auto& closer = missing_b.size() < missing_c.size() ? missing_b : missing_c;
        throw Error(errc::missing_required_columns,
                    "header provides neither the six continuous columns nor the four "
                    "count columns",
                    join_roles(closer));
    }
    table.column_map = map;

    const auto label_index = map.index_of(Role::label);
    const auto year_index = map.index_of(Role::year);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto [lineno, line] = lines[li];
        auto cells = split_line(line, sep_char);
        if (cells.size() != table.header.size()) {
            throw Error(errc::row_arity_mismatch,
                        "row has " + std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(table.header.size()),
                        "line " + std::to_string(lineno));
        }
        StudyRecord record;
        record.label = label_index ? trim(cells[*label_index])
                                   : "Study " + std::to_string(table.records.size() + 1);
        if (continuous) {
            record.group1 = parse_group(cells, map, Role::group1_n, Role::group1_mean,
                                        Role::group1_sd, lineno);
            record.group2 = parse_group(cells, map, Role::group2_n, Role::group2_mean,
                                        Role::group2_sd, lineno);
        }
        if (binary) {
            record.counts = parse_counts(cells, map, lineno);
        }
        if (year_index) {
            const std::string value = trim(cells[*year_index]);
            if (!value.empty()) record.covariates["year"] = value;
        }
        for (const auto& [name, index] : map.covariates) {
            const std::string& value = cells[index];
            if (!value.empty()) record.covariates[name] = value;
        }
        table.records.push_back(std::move(record));
    }

    if (table.records.empty()) {
        throw Error(errc::empty_input, "no data rows");
    }
    return table;
}

std::string write_csv(const StudyTable& table) { return write_csv(table, table.separator); }

std::string write_csv(const StudyTable& table, Separator separator) {
    const char sep = separator_char(separator);
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += sep;
        out += csv_quote(table.header[i], sep);
    }
    out += '\n';

    const auto& map = table.column_map;
    for (std::size_t r = 0; r < table.records.size(); ++r) {
        const auto& record = table.records[r];
        std::vector<std::string> cells(table.header.size());
        const auto put = [&](Role role, std::string value) {
            if (auto idx = map.index_of(role)) cells[*idx] = std::move(value);
        };
        put(Role::label, record.label);
        if (record.group1 && record.group2) {
            put(Role::group1_n, std::to_string(record.group1->n));
            put(Role::group1_mean, render_number(record.group1->mean));
            put(Role::group1_sd, render_number(record.group1->sd));
            put(Role::group2_n, std::to_string(record.group2->n));
            put(Role::group2_mean, render_number(record.group2->mean));
            put(Role::group2_sd, render_number(record.group2->sd));
        }
        if (record.counts) {
            put(Role::events1, std::to_string(record.counts->events1));
            put(Role::total1, std::to_string(record.counts->total1));
            put(Role::events2, std::to_string(record.counts->events2));
            put(Role::total2, std::to_string(record.counts->total2));
        }
        if (auto it = record.covariates.find("year");
            it != record.covariates.end() && map.index_of(Role::year)) {
            put(Role::year, it->second);
        }
        for (const auto& [name, index] : map.covariates) {
            auto it = record.covariates.find(name);
            if (it != record.covariates.end()) cells[index] = it->second;
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += sep;
            out += csv_quote(cells[i], sep);
        }
        out += '\n';
    }
    return out;
}

}  // namespace metacsv
