#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ragmt {

/// Analyzer version stored in index manifests; bump whenever tokenize() changes.
inline constexpr int kAnalyzerVersion = 1;

/// Lowercased word tokens; never empty, never containing whitespace.
using TokenStream = std::vector<std::string>;

/// Decodes UTF-8 into code points. Invalid sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

/// Maximal runs of letters (L*) and digits (N*) become tokens, everything else
/// separates. Tokens are lowercased with Unicode simple case folding.
TokenStream tokenize(std::string_view text);

/// Removes Unicode White_Space code points.
std::u32string strip_whitespace(std::u32string_view text);

/// Multiset of character n-grams of one order.
struct NgramMultiset {
    std::size_t n = 0;
    std::map<std::u32string, std::size_t> counts;

    std::size_t total() const noexcept;
};

/// Character n-grams over code points. With `strip_ws` all whitespace is removed
/// before the window slides. Text shorter than n yields an empty multiset.
NgramMultiset char_ngrams(std::string_view text, std::size_t n, bool strip_ws = true);
NgramMultiset char_ngrams(std::u32string_view chars, std::size_t n);

}  // namespace ragmt
