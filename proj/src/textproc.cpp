#include "ragmt/textproc.hpp"

#include <unicode/uchar.h>

namespace ragmt {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool is_token_char(char32_t c) noexcept
{
    const auto category = static_cast<UCharCategory>(u_charType(static_cast<UChar32>(c)));
    switch (category) {
        case U_UPPERCASE_LETTER:
        case U_LOWERCASE_LETTER:
        case U_TITLECASE_LETTER:
        case U_MODIFIER_LETTER:
        case U_OTHER_LETTER:
        case U_DECIMAL_DIGIT_NUMBER:
        case U_LETTER_NUMBER:
        case U_OTHER_NUMBER:
            return true;
        default:
            return false;
    }
}

char32_t fold(char32_t c) noexcept
{
    return static_cast<char32_t>(u_foldCase(static_cast<UChar32>(c), U_FOLD_CASE_DEFAULT));
}

bool is_whitespace(char32_t c) noexcept { return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0; }

void append_utf8(std::string& out, char32_t c)
{
    if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (c >> 18)));
        out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
}

}  // namespace

std::u32string decode_utf8(std::string_view text)
{
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto lead = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        char32_t min = 0;
        if (lead < 0x80) {
            out.push_back(lead);
            ++i;
            continue;
        } else if ((lead & 0xE0) == 0xC0) {
            len = 2;
            cp = lead & 0x1F;
            min = 0x80;
        } else if ((lead & 0xF0) == 0xE0) {
            len = 3;
            cp = lead & 0x0F;
            min = 0x800;
        } else if ((lead & 0xF8) == 0xF0) {
            len = 4;
            cp = lead & 0x07;
            min = 0x10000;
        } else {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        std::size_t j = 1;
        for (; j < len && i + j < text.size(); ++j) {
            const auto cont = static_cast<unsigned char>(text[i + j]);
            if ((cont & 0xC0) != 0x80)
                break;
            cp = (cp << 6) | (cont & 0x3F);
        }
        if (j != len || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            out.push_back(kReplacement);
            i += j;  // resynchronise on the first byte that is not a continuation
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(std::u32string_view text)
{
    std::string out;
    out.reserve(text.size());
    for (char32_t c : text)
        append_utf8(out, c);
    return out;
}

TokenStream tokenize(std::string_view text)
{
    TokenStream tokens;
    std::string current;
    for (char32_t c : decode_utf8(text)) {
        if (is_token_char(c)) {
            append_utf8(current, fold(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty())
        tokens.push_back(std::move(current));
    return tokens;
}

std::u32string strip_whitespace(std::u32string_view text)
{
    std::u32string out;
    out.reserve(text.size());
    for (char32_t c : text)
        if (!is_whitespace(c))
            out.push_back(c);
    return out;
}

std::size_t NgramMultiset::total() const noexcept
{
    std::size_t sum = 0;
    for (const auto& [gram, count] : counts)
        sum += count;
    return sum;
}

NgramMultiset char_ngrams(std::u32string_view chars, std::size_t n)
{
    NgramMultiset grams;
    grams.n = n;
    if (n == 0 || chars.size() < n)
        return grams;
    for (std::size_t i = 0; i + n <= chars.size(); ++i)
        ++grams.counts[std::u32string(chars.substr(i, n))];
    return grams;
}

NgramMultiset char_ngrams(std::string_view text, std::size_t n, bool strip_ws)
{
    const std::u32string chars = decode_utf8(text);
    return strip_ws ? char_ngrams(strip_whitespace(chars), n) : char_ngrams(chars, n);
}

}  // namespace ragmt
