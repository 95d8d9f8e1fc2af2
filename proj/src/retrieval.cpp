#include "ragmt/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "ragmt/error.hpp"

namespace ragmt {
namespace {

/// Unique terms in first-occurrence order.
std::vector<std::string_view> unique_terms(const TokenStream& tokens)
{
    std::vector<std::string_view> terms;
    std::unordered_set<std::string_view> seen;
    for (const auto& token : tokens)
        if (seen.insert(token).second)
            terms.push_back(token);
    return terms;
}

struct Scored {
    double score;
    std::uint32_t doc;
};

/// Strict "ranks before" ordering: higher score first, then lower doc id.
bool ranks_before(const Scored& a, const Scored& b) noexcept
{
    return a.score > b.score || (a.score == b.score && a.doc < b.doc);
}

}  // namespace

void Bm25Params::validate() const
{
    if (!(k1 >= 0.0) || !std::isfinite(k1))
        throw ConfigError("BM25 k1 must be a finite value >= 0");
    if (!(b >= 0.0 && b <= 1.0))
        throw ConfigError("BM25 b must lie in [0, 1]");
}

RetrievalIndex::RetrievalIndex(LanguagePair lang, Domain domain, Bm25Params params)
    : lang_(std::move(lang)), domain_(domain), params_(params)
{
    lang_.validate();
    params_.validate();
}

void RetrievalIndex::add(const BilingualPair& pair)
{
    if (pair.lang != lang_)
        throw ConfigError("pair " + std::to_string(pair.id) + " has language " +
                          pair.lang.to_string() + " but the index is " + lang_.to_string());
    if (pair.domain == Domain::TBD || !domain_matches(domain_, pair.domain))
        throw ConfigError("pair " + std::to_string(pair.id) + " of domain " +
                          std::string(domain_tag(pair.domain)) + " does not belong in a " +
                          std::string(domain_tag(domain_)) + " index");
    if (store_.size() >= std::numeric_limits<std::uint32_t>::max())
        throw ConfigError("index is full");

    const auto doc = static_cast<std::uint32_t>(store_.size());
    const TokenStream tokens = tokenize(pair.src_text);
    std::unordered_map<std::string_view, std::uint32_t> tf;
    std::vector<std::string_view> order;
    for (const auto& token : tokens)
        if (tf[token]++ == 0)
            order.push_back(token);
    for (const auto term : order) {
        auto it = postings_.find(term);
        if (it == postings_.end())
            it = postings_.emplace(std::string(term), std::vector<Posting>{}).first;
        it->second.push_back({doc, tf[term]});
    }
    doc_len_.push_back(static_cast<std::uint32_t>(tokens.size()));
    total_len_ += tokens.size();
    store_.push_back(pair);
}

double RetrievalIndex::avg_doc_len() const noexcept
{
    return store_.empty() ? 0.0
                          : static_cast<double>(total_len_) / static_cast<double>(store_.size());
}

double RetrievalIndex::idf_from_df(std::size_t df) const noexcept
{
    const auto n = static_cast<double>(store_.size());
    const auto d = static_cast<double>(df);
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double RetrievalIndex::term_weight(double idf, std::uint32_t tf, std::uint32_t dl,
                                   double avgdl) const noexcept
{
    const double f = tf;
    const double norm = 1.0 - params_.b + params_.b * static_cast<double>(dl) / avgdl;
    return idf * f * (params_.k1 + 1.0) / (f + params_.k1 * norm);
}

std::size_t RetrievalIndex::document_frequency(std::string_view term) const
{
    const auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

double RetrievalIndex::idf(std::string_view term) const
{
    return idf_from_df(document_frequency(term));
}

std::span<const Posting> RetrievalIndex::postings(std::string_view term) const
{
    const auto it = postings_.find(term);
    if (it == postings_.end())
        return {};
    return it->second;
}

std::vector<std::string> RetrievalIndex::sorted_terms() const
{
    std::vector<std::string> terms;
    terms.reserve(postings_.size());
    for (const auto& [term, list] : postings_)
        terms.push_back(term);
    std::sort(terms.begin(), terms.end());
    return terms;
}

double RetrievalIndex::score(const TokenStream& query, std::uint32_t doc_id) const
{
    if (doc_id >= store_.size())
        throw ConfigError("unknown doc id " + std::to_string(doc_id));
    const double avgdl = avg_doc_len();
    double total = 0.0;
    for (const auto term : unique_terms(query)) {
        const auto list = postings(term);
        const auto it = std::lower_bound(list.begin(), list.end(), doc_id,
                                         [](const Posting& p, std::uint32_t d) { return p.doc < d; });
        if (it == list.end() || it->doc != doc_id)
            continue;
        total += term_weight(idf_from_df(list.size()), it->tf, doc_len_[doc_id], avgdl);
    }
    return total;
}

std::vector<RetrievalHit> RetrievalIndex::search(std::string_view query, std::size_t k) const
{
    return search(query, k, HitFilter{});
}

std::vector<RetrievalHit> RetrievalIndex::search(std::string_view query, std::size_t k,
                                                 const HitFilter& keep) const
{
    if (k == 0)
        throw ConfigError("search: k must be at least 1");
    if (store_.empty())
        return {};

    const double avgdl = avg_doc_len();
    std::unordered_map<std::uint32_t, double> accumulator;
    const TokenStream tokens = tokenize(query);  // unique_terms() views into it
    for (const auto term : unique_terms(tokens)) {
        const auto list = postings(term);
        if (list.empty())
            continue;
        const double term_idf = idf_from_df(list.size());
        for (const auto& posting : list)
            accumulator[posting.doc] += term_weight(term_idf, posting.tf, doc_len_[posting.doc], avgdl);
    }

    // Bounded heap whose top is the worst hit kept so far.
    std::priority_queue<Scored, std::vector<Scored>, decltype(&ranks_before)> heap(&ranks_before);
    for (const auto& [doc, value] : accumulator) {
        if (!(value > 0.0))
            continue;
        const Scored candidate{value, doc};
        if (heap.size() == k && !ranks_before(candidate, heap.top()))
            continue;
        if (keep && !keep(store_[doc]))
            continue;
        heap.push(candidate);
        if (heap.size() > k)
            heap.pop();
    }

    std::vector<Scored> ranked;
    ranked.reserve(heap.size());
    while (!heap.empty()) {
        ranked.push_back(heap.top());
        heap.pop();
    }
    std::reverse(ranked.begin(), ranked.end());

    std::vector<RetrievalHit> hits;
    hits.reserve(ranked.size());
    for (std::size_t rank = 0; rank < ranked.size(); ++rank)
        hits.push_back({store_[ranked[rank].doc], ranked[rank].score, rank, ranked[rank].doc});
    return hits;
}

RetrievalIndex build_index(std::span<const BilingualPair> pairs, const LanguagePair& lang,
                           Domain domain, const Bm25Params& params)
{
    RetrievalIndex index(lang, domain, params);
    for (const auto& pair : pairs)
        index.add(pair);
    return index;
}

}  // namespace ragmt
