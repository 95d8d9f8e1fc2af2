#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "ragmt/textproc.hpp"

using namespace ragmt;

namespace {

std::map<std::u32string, std::size_t> to_map(const NgramMultiset& grams) { return grams.counts; }

std::string random_text(std::mt19937_64& rng, std::size_t max_len)
{
    static const std::vector<std::string> alphabet = {"a", "B", "z", "Ä", "ö", "ß", "7", "0", " ", "-", ",",
                                                      ".", "\t", "é", "Ł", "ç", "Ω", "中", " ", "(", "X"};
    std::uniform_int_distribution<std::size_t> len(0, max_len), pick(0, alphabet.size() - 1);
    std::string out;
    for (std::size_t i = 0, n = len(rng); i < n; ++i)
        out += alphabet[pick(rng)];
    return out;
}

}  // namespace

TEST(Tokenize, PartNumberTitle)
{
    EXPECT_EQ(tokenize("KYB Shock Absorber, Part Number: 343441"),
              (TokenStream{"kyb", "shock", "absorber", "part", "number", "343441"}));
}

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, PunctuationSplitsDecimals)
{
    EXPECT_EQ(tokenize("ultra-slim 0.70 mm"), (TokenStream{"ultra", "slim", "0", "70", "mm"}));
}

TEST(Tokenize, UnicodeLettersAndFolding)
{
    EXPECT_EQ(tokenize("KYB-Stoßdämpfer VORNE"), (TokenStream{"kyb", "stoßdämpfer", "vorne"}));
    EXPECT_EQ(tokenize("ŁÓDŹ ΣΟΦΊΑ"), (TokenStream{"łódź", "σοφία"}));
    EXPECT_EQ(tokenize("中文标题 123"), (TokenStream{"中文标题", "123"}));
    // Simple folding maps capital sharp s to ß rather than "ss".
    EXPECT_EQ(tokenize("ẞ"), (TokenStream{"ß"}));
}

TEST(Tokenize, InvalidUtf8ActsAsSeparator)
{
    EXPECT_EQ(tokenize("ab\xff" "cd"), (TokenStream{"ab", "cd"}));
}

TEST(Tokenize, IdempotentUnderRejoin)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        const auto tokens = tokenize(random_text(rng, 40));
        std::string joined;
        for (const auto& t : tokens)
            joined += (joined.empty() ? "" : " ") + t;
        EXPECT_EQ(tokenize(joined), tokens);
        for (const auto& t : tokens) {
            EXPECT_FALSE(t.empty());
            EXPECT_EQ(t.find(' '), std::string::npos);
        }
    }
}

TEST(Tokenize, CaseInsensitive)
{
    // Per-code-point upper/lower mappings over letters whose simple mappings round-trip.
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"RED SHOE 42", "red shoe 42"},
        {"ÄÖÜ ÉÈ ÇØ", "äöü éè çø"},
        {"ŁÓDŹ ŚWIĘTY", "łódź święty"},
        {"ΑΒΓ ΔΕΖ", "αβγ δεζ"},
    };
    for (const auto& [upper, lower] : cases)
        EXPECT_EQ(tokenize(upper), tokenize(lower)) << upper;
}

TEST(CharNgrams, CountsByEye)
{
    const auto grams = char_ngrams("abab", 2);
    EXPECT_EQ(to_map(grams), (std::map<std::u32string, std::size_t>{{U"ab", 2}, {U"ba", 1}}));
    EXPECT_EQ(to_map(char_ngrams("a b", 2, true)), (std::map<std::u32string, std::size_t>{{U"ab", 1}}));
    EXPECT_EQ(to_map(char_ngrams("a b", 2, false)),
              (std::map<std::u32string, std::size_t>{{U"a ", 1}, {U" b", 1}}));
    EXPECT_TRUE(char_ngrams("ab", 3).counts.empty());
}

TEST(CharNgrams, MatchesNaiveWindowCounter)
{
    const auto check = [](const std::string& text, std::size_t n) {
        const auto grams = char_ngrams(text, n, true);
        const auto expected = oracle::naive_ngrams(text, n, true);
        ASSERT_EQ(grams.counts.size(), expected.size()) << text;
        std::size_t i = 0;
        for (const auto& [gram, count] : grams.counts) {
            EXPECT_EQ(std::vector<std::uint32_t>(gram.begin(), gram.end()), expected[i].first);
            EXPECT_EQ(count, expected[i].second);
            ++i;
        }
    };
    check("cat sat", 3);  // {cat:1, ats:1, tsa:1, sat:1}
    EXPECT_EQ(char_ngrams("cat sat", 3).counts.at(U"cat"), 1u);
    EXPECT_EQ(char_ngrams("cat sat", 3).total(), 4u);

    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i)
        check(random_text(rng, 30), 1 + i % 6);
}

TEST(CharNgrams, TotalIsWindowCount)
{
    std::mt19937_64 rng(9);
    for (int i = 0; i < 300; ++i) {
        const auto text = random_text(rng, 50);
        const auto stripped = strip_whitespace(decode_utf8(text));
        for (std::size_t n = 1; n <= 6; ++n) {
            const std::size_t expected = stripped.size() >= n ? stripped.size() - n + 1 : 0;
            EXPECT_EQ(char_ngrams(text, n).total(), expected);
        }
    }
}

TEST(Utf8, RoundTrip)
{
    const std::string text = "Stoßdämpfer 中 Ω 😀";
    EXPECT_EQ(encode_utf8(decode_utf8(text)), text);
    EXPECT_EQ(decode_utf8("\xe2\x82").size(), 1u);  // truncated sequence -> one replacement
    EXPECT_EQ(decode_utf8("\xe2\x82")[0], U'�');
}
