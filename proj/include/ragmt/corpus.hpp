#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ragmt {

/// Ordered (source, target) pair of lowercase ISO-639-1 codes.
struct LanguagePair {
    std::string src;
    std::string tgt;

    /// Parses "en-pl" / "EN-PL" / "en_pl". Throws ConfigError on malformed input.
    static LanguagePair parse(std::string_view text);
    /// Throws ConfigError unless both codes are two lowercase letters and differ.
    void validate() const;
    std::string to_string() const { return src + "-" + tgt; }

    friend bool operator==(const LanguagePair&, const LanguagePair&) = default;
};

/// Product-information domain. TBD is the query-time union of the three stored
/// domains and never appears on a stored record.
enum class Domain : std::uint8_t { TTL, BP, PD, TBD };

/// Accepts ttl/bp/pd/tbd (any case) and "t.b.d.". Throws ConfigError otherwise.
Domain parse_domain(std::string_view text);
/// Canonical upper-case tag: "TTL", "BP", "PD", "TBD".
std::string_view domain_tag(Domain domain) noexcept;
/// Lowercase flag spelling used on the command line and in report keys.
std::string_view domain_key(Domain domain) noexcept;

/// True when a record of domain `stored` belongs to the pool selected by `filter`.
constexpr bool domain_matches(Domain filter, Domain stored) noexcept
{
    return filter == Domain::TBD || filter == stored;
}

struct BilingualPair {
    std::uint32_t id = 0;
    std::string src_text;
    std::string tgt_text;
    Domain domain = Domain::TTL;
    LanguagePair lang;

    friend bool operator==(const BilingualPair&, const BilingualPair&) = default;
};

struct TestSegment {
    std::string src_title;
    std::string ref_translation;
};

enum class FileFormat { Jsonl, Tsv };

/// "jsonl" or "tsv"; throws ConfigError otherwise.
FileFormat parse_file_format(std::string_view text);

struct IngestOptions {
    bool strict = false;
};

/// A rejected input line.
struct MalformedLine {
    std::size_t line_number = 0;  // 1-based, as an editor shows it
    std::string reason;
};

/// Bilingual pairs of one language pair. Immutable once ingested.
class Corpus {
  public:
    Corpus() = default;
    Corpus(LanguagePair lang, std::vector<BilingualPair> pairs);

    const LanguagePair& lang() const noexcept { return lang_; }
    std::span<const BilingualPair> pairs() const noexcept { return pairs_; }
    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }

    /// Pairs whose domain belongs to `filter`, in id order.
    std::vector<BilingualPair> filter(Domain filter) const;

    const std::vector<MalformedLine>& malformed() const noexcept { return malformed_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  private:
    friend Corpus ingest_pairs(const std::filesystem::path&, FileFormat, const LanguagePair&,
                               const IngestOptions&);

    LanguagePair lang_;
    std::vector<BilingualPair> pairs_;
    std::vector<MalformedLine> malformed_;
    std::vector<std::string> warnings_;
};

/// Reads bilingual pairs. JSONL records carry src_text, tgt_text, domain; TSV
/// columns are src<TAB>tgt<TAB>domain. Ids are assigned densely in file order
/// over valid records. Lenient mode skips and counts malformed lines; strict mode
/// throws IngestError naming the first bad line. An unknown domain tag always throws.
Corpus ingest_pairs(const std::filesystem::path& path, FileFormat format, const LanguagePair& lang,
                    const IngestOptions& options = {});

/// Test set loader. JSONL records carry src_title and ref_translation; TSV is
/// src_title<TAB>ref_translation. Duplicates are kept.
std::vector<TestSegment> load_test_set(const std::filesystem::path& path, FileFormat format,
                                       const IngestOptions& options = {});

/// Draws `k` distinct pairs without replacement from the `domain`-filtered pool
/// using a partial Fisher-Yates shuffle, returned in draw order. Pure function of
/// (pool, domain, k, seed). Throws ConfigError if k == 0 or the pool is smaller than k.
std::vector<BilingualPair> sample_random(std::span<const BilingualPair> pool, Domain domain,
                                         std::size_t k, std::uint64_t seed);

inline std::vector<BilingualPair> sample_random(const Corpus& corpus, Domain domain, std::size_t k,
                                                std::uint64_t seed)
{
    return sample_random(corpus.pairs(), domain, k, seed);
}

/// True when the bytes form valid UTF-8.
bool is_valid_utf8(std::string_view text) noexcept;

}  // namespace ragmt
