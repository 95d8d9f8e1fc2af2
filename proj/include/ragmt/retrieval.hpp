#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ragmt/corpus.hpp"
#include "ragmt/textproc.hpp"

namespace ragmt {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    /// Throws ConfigError unless k1 >= 0 and 0 <= b <= 1.
    void validate() const;
    friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

struct Posting {
    std::uint32_t doc = 0;
    std::uint32_t tf = 0;
    friend bool operator==(const Posting&, const Posting&) = default;
};

struct RetrievalHit {
    BilingualPair pair;
    double score = 0.0;
    std::size_t rank = 0;
    std::uint32_t doc_id = 0;
};

/// Predicate deciding whether a stored pair may appear in results.
using HitFilter = std::function<bool(const BilingualPair&)>;

/// Okapi BM25 over the source side of one (language pair, domain), caching the
/// target texts. Document ids are insertion positions; postings are sorted by doc.
///
/// score(q, d) = sum over unique query terms t present in d of
///   idf(t) * tf (k1 + 1) / (tf + k1 (1 - b + b dl / avgdl)),
///   idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
class RetrievalIndex {
  public:
    RetrievalIndex(LanguagePair lang, Domain domain, Bm25Params params = {});

    /// Appends one pair. Statistics end up exactly as if rebuilt from scratch.
    /// Throws ConfigError if the pair's language or domain does not fit the index.
    void add(const BilingualPair& pair);

    /// BM25 score of a stored document. Throws ConfigError for an unknown doc id.
    double score(const TokenStream& query, std::uint32_t doc_id) const;

    /// Top-k documents with score > 0, ordered by (score desc, doc id asc).
    std::vector<RetrievalHit> search(std::string_view query, std::size_t k) const;
    std::vector<RetrievalHit> search(std::string_view query, std::size_t k,
                                     const HitFilter& keep) const;

    double idf(std::string_view term) const;
    std::size_t document_frequency(std::string_view term) const;

    const LanguagePair& lang() const noexcept { return lang_; }
    Domain domain() const noexcept { return domain_; }
    const Bm25Params& params() const noexcept { return params_; }
    std::size_t n_docs() const noexcept { return store_.size(); }
    double avg_doc_len() const noexcept;
    std::uint64_t total_doc_len() const noexcept { return total_len_; }
    std::uint32_t doc_len(std::uint32_t doc_id) const { return doc_len_.at(doc_id); }
    std::span<const std::uint32_t> doc_lens() const noexcept { return doc_len_; }
    std::span<const BilingualPair> store() const noexcept { return store_; }
    const BilingualPair& pair(std::uint32_t doc_id) const { return store_.at(doc_id); }
    std::span<const Posting> postings(std::string_view term) const;
    std::size_t vocabulary_size() const noexcept { return postings_.size(); }
    /// Vocabulary in byte-lexicographic order.
    std::vector<std::string> sorted_terms() const;

  private:
    friend RetrievalIndex load_index(const std::filesystem::path&);

    struct StringHash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept
        {
            return std::hash<std::string_view>{}(s);
        }
    };
    using PostingMap =
        std::unordered_map<std::string, std::vector<Posting>, StringHash, std::equal_to<>>;

    double term_weight(double idf, std::uint32_t tf, std::uint32_t dl, double avgdl) const noexcept;
    double idf_from_df(std::size_t df) const noexcept;

    LanguagePair lang_;
    Domain domain_;
    Bm25Params params_;
    PostingMap postings_;
    std::vector<std::uint32_t> doc_len_;
    std::uint64_t total_len_ = 0;
    std::vector<BilingualPair> store_;
};

/// Throws ConfigError if any pair has a different language pair or a domain outside `domain`.
RetrievalIndex build_index(std::span<const BilingualPair> pairs, const LanguagePair& lang,
                           Domain domain, const Bm25Params& params = {});

inline void add_pair(RetrievalIndex& index, const BilingualPair& pair) { index.add(pair); }

inline double bm25_score(const RetrievalIndex& index, const TokenStream& query, std::uint32_t doc_id)
{
    return index.score(query, doc_id);
}

inline std::vector<RetrievalHit> search_topk(const RetrievalIndex& index, std::string_view query,
                                             std::size_t k)
{
    return index.search(query, k);
}

/// Index directory layout:
///   manifest.json  format id, version, analyzer version, lang, domain, params,
///                  n_docs, byte size and SHA-256 of each data file
///   postings.bin   little-endian, length-prefixed (see docs/index-format.md)
///   store.jsonl    one stored pair per line in doc id order
inline constexpr std::uint32_t kIndexFormatVersion = 1;

void save_index(const RetrievalIndex& index, const std::filesystem::path& dir);

/// Throws IndexFormatError on version mismatch, checksum mismatch or malformed
/// content. Nothing is returned unless every file verified.
RetrievalIndex load_index(const std::filesystem::path& dir);

/// Single-writer / multi-reader wrapper: searches take a shared lock, add() an exclusive one.
class SharedIndex {
  public:
    explicit SharedIndex(RetrievalIndex index) : index_(std::move(index)) {}

    std::vector<RetrievalHit> search(std::string_view query, std::size_t k) const
    {
        std::shared_lock lock(mutex_);
        return index_.search(query, k);
    }

    void add(const BilingualPair& pair)
    {
        std::unique_lock lock(mutex_);
        index_.add(pair);
    }

    std::size_t n_docs() const
    {
        std::shared_lock lock(mutex_);
        return index_.n_docs();
    }

    void save(const std::filesystem::path& dir) const
    {
        std::shared_lock lock(mutex_);
        save_index(index_, dir);
    }

  private:
    RetrievalIndex index_;
    mutable std::shared_mutex mutex_;
};

}  // namespace ragmt
