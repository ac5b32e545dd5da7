#ifndef METACSV_WIKI_HPP
#define METACSV_WIKI_HPP

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace metacsv {

/// A raw CSV page fetched from a MediaWiki instance. Page titles carry
/// ".csv" so the toolkit can tell data pages from ordinary wiki pages.
struct WikiSource {
    std::string base_url;
    std::string page_title;
    std::string raw_text;
    std::chrono::system_clock::time_point fetched_at;
};

struct BackLink {
    enum class Kind { wiki_page, pubmed };
    Kind kind = Kind::wiki_page;
    std::string target;
    std::string anchor_text;
};

struct CsvPayload {
    std::string content_type;  // always exactly "text/csv"
    std::string filename;
    std::string body;
};

/// MediaWiki-style page URL: spaces become underscores, the rest is
/// percent-encoded.
std::string encode_title(std::string_view title);

/// index.php?title=...&action=raw URL under base_url.
std::string raw_page_url(const std::string& base_url, const std::string& title);

/// index.php?title=... page URL under base_url.
std::string page_url(const std::string& base_url, const std::string& title);

/// GET the raw page text. The title must contain ".csv". Trailing newline
/// runs are collapsed to a single "\n". Connection and read timeouts are
/// 5 s with one retry on transient failure.
WikiSource fetch_csv_page(const std::string& base_url, const std::string& title);

/// Wrap the fetched page as a text/csv download; the suggested filename is
/// the title with spaces replaced by underscores.
CsvPayload proxy_csv(const WikiSource& source);

/// Links back to the wiki page (title minus its ".csv" segment) and/or to
/// PubMed plus a wiki lookup for the identifier.
std::vector<BackLink> derive_backlinks(const std::optional<std::string>& title,
                                       std::optional<long> pubmed_id,
                                       const std::string& base_url);

/// Plain GET of an arbitrary CSV URL (the service's url= source).
std::string fetch_url(const std::string& url);

}  // namespace metacsv

#endif
