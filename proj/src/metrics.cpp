#include "ragmt/metrics.hpp"

#include <algorithm>

#include "ragmt/error.hpp"
#include "ragmt/textproc.hpp"

namespace ragmt {

void ChrfParams::validate() const
{
    if (max_n < 1)
        throw ConfigError("chrF max_n must be at least 1");
    if (!(beta > 0.0))
        throw ConfigError("chrF beta must be positive");
}

ChrfStats& ChrfStats::operator+=(const ChrfStats& other)
{
    if (orders.size() < other.orders.size())
        orders.resize(other.orders.size());
    for (std::size_t i = 0; i < other.orders.size(); ++i) {
        orders[i].matched += other.orders[i].matched;
        orders[i].hyp_total += other.orders[i].hyp_total;
        orders[i].ref_total += other.orders[i].ref_total;
    }
    return *this;
}

ChrfStats chrf_stats(std::string_view hyp, std::string_view ref, const ChrfParams& params)
{
    params.validate();
    std::u32string hyp_chars = decode_utf8(hyp);
    std::u32string ref_chars = decode_utf8(ref);
    if (params.strip_ws) {
        hyp_chars = strip_whitespace(hyp_chars);
        ref_chars = strip_whitespace(ref_chars);
    }

    ChrfStats stats;
    stats.orders.resize(params.max_n);
    for (std::size_t n = 1; n <= params.max_n; ++n) {
        const NgramMultiset hyp_grams = char_ngrams(hyp_chars, n);
        const NgramMultiset ref_grams = char_ngrams(ref_chars, n);
        auto& order = stats.orders[n - 1];
        order.hyp_total = hyp_grams.total();
        order.ref_total = ref_grams.total();
        // Both maps are sorted; merge to count the clipped intersection.
        auto h = hyp_grams.counts.begin();
        auto r = ref_grams.counts.begin();
        while (h != hyp_grams.counts.end() && r != ref_grams.counts.end()) {
            if (h->first < r->first) {
                ++h;
            } else if (r->first < h->first) {
                ++r;
            } else {
                order.matched += std::min(h->second, r->second);
                ++h;
                ++r;
            }
        }
    }
    return stats;
}

double f_beta(double precision, double recall, double beta) noexcept
{
    const double beta2 = beta * beta;
    const double denom = beta2 * precision + recall;
    if (precision + recall <= 0.0 || denom <= 0.0)
        return 0.0;
    return 100.0 * (1.0 + beta2) * precision * recall / denom;
}

double chrf_from_stats(const ChrfStats& stats, double beta)
{
    double precision_sum = 0.0;
    double recall_sum = 0.0;
    std::size_t precision_orders = 0;
    std::size_t recall_orders = 0;
    for (const auto& order : stats.orders) {
        if (order.hyp_total > 0) {
            precision_sum += static_cast<double>(order.matched) / static_cast<double>(order.hyp_total);
            ++precision_orders;
        }
        if (order.ref_total > 0) {
            recall_sum += static_cast<double>(order.matched) / static_cast<double>(order.ref_total);
            ++recall_orders;
        }
    }
    const double precision = precision_orders ? precision_sum / precision_orders : 0.0;
    const double recall = recall_orders ? recall_sum / recall_orders : 0.0;
    return f_beta(precision, recall, beta);
}

double chrf_sentence(std::string_view hyp, std::string_view ref, const ChrfParams& params)
{
    return chrf_from_stats(chrf_stats(hyp, ref, params), params.beta);
}

double chrf_corpus(std::span<const HypRef> pairs, const ChrfParams& params)
{
    if (pairs.empty())
        throw ConfigError("chrf_corpus: empty segment list");
    ChrfStats total;
    for (const auto& [hyp, ref] : pairs)
        total += chrf_stats(hyp, ref, params);
    return chrf_from_stats(total, params.beta);
}

double chrf_sentence_average(std::span<const HypRef> pairs, const ChrfParams& params)
{
    if (pairs.empty())
        throw ConfigError("chrf_sentence_average: empty segment list");
    double sum = 0.0;
    for (const auto& [hyp, ref] : pairs)
        sum += chrf_sentence(hyp, ref, params);
    return sum / static_cast<double>(pairs.size());
}

double example_similarity(std::string_view test_src, std::span<const std::string> example_srcs,
                          const ChrfParams& params)
{
    if (example_srcs.empty())
        throw ConfigError("example_similarity: no examples");
    double sum = 0.0;
    for (const auto& example : example_srcs)
        sum += chrf_sentence(example, test_src, params);
    return sum / static_cast<double>(example_srcs.size());
}

}  // namespace ragmt
