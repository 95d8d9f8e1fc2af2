#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ragmt {

struct ChrfParams {
    std::size_t max_n = 6;
    double beta = 2.0;
    bool strip_ws = true;

    /// Throws ConfigError unless max_n >= 1 and beta > 0.
    void validate() const;
    friend bool operator==(const ChrfParams&, const ChrfParams&) = default;
};

/// Per-order n-gram match counts; summable across segments.
struct ChrfStats {
    struct Order {
        std::size_t matched = 0;
        std::size_t hyp_total = 0;
        std::size_t ref_total = 0;
    };
    std::vector<Order> orders;  // index 0 holds n = 1

    ChrfStats& operator+=(const ChrfStats& other);
};

ChrfStats chrf_stats(std::string_view hyp, std::string_view ref, const ChrfParams& params = {});

/// F-beta score in [0, 100] from accumulated statistics. Precision is averaged over
/// orders with hypothesis n-grams, recall over orders with reference n-grams.
double chrf_from_stats(const ChrfStats& stats, double beta);

/// 100 * (1 + beta^2) P R / (beta^2 P + R); 0 when P + R = 0. P and R in [0, 1].
double f_beta(double precision, double recall, double beta) noexcept;

double chrf_sentence(std::string_view hyp, std::string_view ref, const ChrfParams& params = {});

using HypRef = std::pair<std::string, std::string>;

/// Micro-averaged corpus chrF. Throws ConfigError on an empty list.
double chrf_corpus(std::span<const HypRef> pairs, const ChrfParams& params = {});

/// Arithmetic mean of sentence scores. Throws ConfigError on an empty list.
double chrf_sentence_average(std::span<const HypRef> pairs, const ChrfParams& params = {});

/// Mean of chrf_sentence(example, test_src) over the examples. Throws ConfigError if empty.
double example_similarity(std::string_view test_src, std::span<const std::string> example_srcs,
                          const ChrfParams& params = {});

}  // namespace ragmt
