#pragma once

// Brute-force reference implementations used only by tests. They share no code
// with the library: own UTF-8 decoding, own whitespace table, own counting.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ragmt::oracle {

std::vector<std::uint32_t> decode(const std::string& utf8);

/// chrF by explicit enumeration of distinct n-grams and occurrence counting.
double naive_chrf(const std::string& hyp, const std::string& ref, std::size_t max_n = 6,
                  double beta = 2.0, bool strip_ws = true);

/// Corpus chrF: sum per-order counts over all pairs, then apply the formula.
double naive_chrf_corpus(const std::vector<std::pair<std::string, std::string>>& pairs,
                         std::size_t max_n = 6, double beta = 2.0);

/// Occurrence count of every distinct n-gram, as (gram, count) sorted by gram.
std::vector<std::pair<std::vector<std::uint32_t>, std::size_t>> naive_ngrams(const std::string& text,
                                                                            std::size_t n, bool strip_ws);

struct OracleHit {
    std::size_t doc = 0;
    double score = 0.0;
};

/// BM25 over pre-tokenized documents, recomputing every statistic per call.
double naive_bm25(const std::vector<std::vector<std::string>>& docs, const std::vector<std::string>& query,
                  std::size_t doc, double k1 = 1.2, double b = 0.75);

/// Scores every document and sorts by (score desc, doc asc), keeping the top k with score > 0.
std::vector<OracleHit> brute_force_topk(const std::vector<std::vector<std::string>>& docs,
                                        const std::vector<std::string>& query, std::size_t k,
                                        double k1 = 1.2, double b = 0.75);

}  // namespace ragmt::oracle
