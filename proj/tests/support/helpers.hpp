#ifndef METACSV_TEST_HELPERS_HPP
#define METACSV_TEST_HELPERS_HPP

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace testutil {

inline std::string fixture_path(const std::string& name) {
    return std::string(METACSV_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

inline nlohmann::json load_fixture_json(const std::string& name) {
    return nlohmann::json::parse(read_file(fixture_path("expected/" + name + ".json")));
}

/// |a - b| <= tol relative to the expected magnitude; exact-zero
/// expectations require |a| <= tol.
inline bool close_rel(double actual, double expected, double tol) {
    if (expected == 0.0) return std::fabs(actual) <= tol;
    return std::fabs(actual - expected) <= tol * std::fabs(expected);
}

inline std::size_t count_occurrences(const std::string& haystack,
                                     const std::string& needle) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

/// Minimal XML well-formedness check: balanced tags, quoted attributes,
/// known entity references, a single root element. Good enough to catch
/// any escaping or nesting mistake in generated SVG.
inline bool xml_well_formed(const std::string& text, std::string* why = nullptr) {
    const auto fail = [&](const std::string& reason) {
        if (why) *why = reason;
        return false;
    };
    std::size_t i = 0;
    const std::size_t n = text.size();
    std::vector<std::string> stack;
    int roots = 0;

    const auto skip_ws = [&] {
        while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    const auto check_entities = [&](std::size_t from, std::size_t to) -> bool {
        for (std::size_t j = from; j < to; ++j) {
            if (text[j] == '<') return false;
            if (text[j] != '&') continue;
            const auto semi = text.find(';', j);
            if (semi == std::string::npos || semi - j > 8) return false;
            const std::string entity = text.substr(j + 1, semi - j - 1);
            if (entity != "amp" && entity != "lt" && entity != "gt" &&
                entity != "quot" && entity != "apos" &&
                !(entity.size() > 1 && entity[0] == '#')) {
                return false;
            }
            j = semi;
        }
        return true;
    };

    skip_ws();
    if (text.compare(i, 5, "<?xml") == 0) {
        const auto end = text.find("?>", i);
        if (end == std::string::npos) return fail("unterminated xml declaration");
        i = end + 2;
    }

    while (i < n) {
        skip_ws();
        if (i >= n) break;
        if (text[i] != '<') {
            const auto next = text.find('<', i);
            const auto end = next == std::string::npos ? n : next;
            if (stack.empty()) return fail("text outside root element");
            if (!check_entities(i, end)) return fail("bad entity or stray '<'");
            i = end;
            continue;
        }
        if (text.compare(i, 4, "<!--") == 0) {
            const auto end = text.find("-->", i);
            if (end == std::string::npos) return fail("unterminated comment");
            i = end + 3;
            continue;
        }
        if (text.compare(i, 2, "</") == 0) {
            const auto end = text.find('>', i);
            if (end == std::string::npos) return fail("unterminated close tag");
            std::string name = text.substr(i + 2, end - i - 2);
            while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back())))
                name.pop_back();
            if (stack.empty() || stack.back() != name)
                return fail("mismatched close tag: " + name);
            stack.pop_back();
            i = end + 1;
            continue;
        }
        // open tag
        std::size_t j = i + 1;
        while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) ||
                         text[j] == ':' || text[j] == '-' || text[j] == '_')) {
            ++j;
        }
        if (j == i + 1) return fail("empty tag name");
        const std::string name = text.substr(i + 1, j - i - 1);
        // attributes
        bool self_closing = false;
        while (j < n) {
            while (j < n && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
            if (j >= n) return fail("unterminated tag");
            if (text[j] == '>') {
                ++j;
                break;
            }
            if (text[j] == '/') {
                if (j + 1 >= n || text[j + 1] != '>') return fail("bad self-close");
                self_closing = true;
                j += 2;
                break;
            }
            // attribute name
            const auto eq = text.find('=', j);
            if (eq == std::string::npos) return fail("attribute without value");
            j = eq + 1;
            if (j >= n || (text[j] != '"' && text[j] != '\'')) {
                return fail("unquoted attribute value");
            }
            const char quote = text[j];
            const auto close = text.find(quote, j + 1);
            if (close == std::string::npos) return fail("unterminated attribute");
            if (!check_entities(j + 1, close)) return fail("bad entity in attribute");
            j = close + 1;
        }
        if (!self_closing) {
            if (stack.empty()) ++roots;
            stack.push_back(name);
        } else if (stack.empty()) {
            ++roots;
        }
        if (roots > 1) return fail("multiple root elements");
        i = j;
    }
    if (!stack.empty()) return fail("unclosed element: " + stack.back());
    if (roots != 1) return fail("no root element");
    return true;
}

/// Compare against (or regenerate with METACSV_REGEN_GOLDEN=1) a golden
/// file under fixtures/golden/.
inline bool matches_golden(const std::string& name, const std::string& actual,
                           std::string* why = nullptr) {
    const std::string path = fixture_path("golden/" + name);
    if (std::getenv("METACSV_REGEN_GOLDEN")) {
        write_file(path, actual);
        return true;
    }
    const std::string expected = read_file(path);
    if (expected == actual) return true;
    if (why) {
        std::size_t pos = 0;
        while (pos < expected.size() && pos < actual.size() &&
               expected[pos] == actual[pos]) {
            ++pos;
        }
        *why = "golden mismatch at byte " + std::to_string(pos) + " of " + name;
    }
    return false;
}

}  // namespace testutil

#endif
