#include "ragmt/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "ragmt/error.hpp"
#include "ragmt/random.hpp"
#include "ragmt/textproc.hpp"

namespace ragmt {
namespace {

std::string lowercase_ascii(std::string_view text)
{
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_blank(std::string_view text) { return strip_whitespace(decode_utf8(text)).empty(); }

/// Line reader shared by both loaders: rejects a BOM, strips CR, skips blank lines.
template <typename OnLine>
void for_each_line(const std::filesystem::path& path, OnLine&& on_line)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IngestError("cannot read " + path.string());
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line_number == 1 && line.starts_with("\xEF\xBB\xBF"))
            throw IngestError(path.string() + ": UTF-8 byte order mark is not allowed");
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (is_blank(line))
            continue;
        on_line(line_number, line);
    }
    if (in.bad())
        throw IngestError("read error on " + path.string());
}

std::vector<std::string> split_tabs(std::string_view line)
{
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        fields.emplace_back(line.substr(start, tab - start));
        if (tab == std::string_view::npos)
            break;
        start = tab + 1;
    }
    return fields;
}

/// Reads field `key` as a non-blank string, or sets `reason`.
std::optional<std::string> text_field(const nlohmann::json& record, const char* key,
                                      std::string& reason)
{
    const auto it = record.find(key);
    if (it == record.end()) {
        reason = std::string("missing ") + key;
        return std::nullopt;
    }
    if (!it->is_string()) {
        reason = std::string(key) + " is not a string";
        return std::nullopt;
    }
    auto value = it->get<std::string>();
    if (is_blank(value)) {
        reason = std::string(key) + " is empty";
        return std::nullopt;
    }
    return value;
}

Domain record_domain(std::string_view tag, const std::filesystem::path& path, std::size_t line)
{
    Domain domain{};
    try {
        domain = parse_domain(tag);
    } catch (const ConfigError&) {
        throw IngestError(path.string() + ":" + std::to_string(line) + ": unknown domain tag '" +
                          std::string(tag) + "'");
    }
    if (domain == Domain::TBD)
        throw IngestError(path.string() + ":" + std::to_string(line) +
                          ": TBD is a query-time union and cannot be stored on a record");
    return domain;
}

struct LineOutcome {
    std::vector<MalformedLine> malformed;

    void reject(const std::filesystem::path& path, std::size_t line, std::string reason,
                bool strict)
    {
        if (strict)
            throw IngestError(path.string() + ":" + std::to_string(line) + ": " + reason);
        malformed.push_back({line, std::move(reason)});
    }
};

}  // namespace

LanguagePair LanguagePair::parse(std::string_view text)
{
    const auto sep = text.find_first_of("-_");
    if (sep == std::string_view::npos)
        throw ConfigError("language pair must look like 'en-de', got '" + std::string(text) + "'");
    LanguagePair lang{lowercase_ascii(text.substr(0, sep)), lowercase_ascii(text.substr(sep + 1))};
    lang.validate();
    return lang;
}

void LanguagePair::validate() const
{
    const auto valid_code = [](const std::string& code) {
        return code.size() == 2 &&
               std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; });
    };
    if (!valid_code(src) || !valid_code(tgt))
        throw ConfigError("language codes must be two lowercase letters: '" + to_string() + "'");
    if (src == tgt)
        throw ConfigError("source and target language must differ: '" + to_string() + "'");
}

Domain parse_domain(std::string_view text)
{
    const std::string key = lowercase_ascii(text);
    if (key == "ttl")
        return Domain::TTL;
    if (key == "bp")
        return Domain::BP;
    if (key == "pd")
        return Domain::PD;
    if (key == "tbd" || key == "t.b.d." || key == "t.b.d")
        return Domain::TBD;
    throw ConfigError("unknown domain '" + std::string(text) + "'");
}

std::string_view domain_tag(Domain domain) noexcept
{
    switch (domain) {
        case Domain::TTL: return "TTL";
        case Domain::BP: return "BP";
        case Domain::PD: return "PD";
        case Domain::TBD: return "TBD";
    }
    return "?";
}

std::string_view domain_key(Domain domain) noexcept
{
    switch (domain) {
        case Domain::TTL: return "ttl";
        case Domain::BP: return "bp";
        case Domain::PD: return "pd";
        case Domain::TBD: return "tbd";
    }
    return "?";
}

FileFormat parse_file_format(std::string_view text)
{
    const std::string key = lowercase_ascii(text);
    if (key == "jsonl")
        return FileFormat::Jsonl;
    if (key == "tsv")
        return FileFormat::Tsv;
    throw ConfigError("unknown file format '" + std::string(text) + "' (expected jsonl or tsv)");
}

Corpus::Corpus(LanguagePair lang, std::vector<BilingualPair> pairs)
    : lang_(std::move(lang)), pairs_(std::move(pairs))
{
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
        if (pairs_[i].id != i)
            throw ConfigError("corpus ids must be dense and in order");
        if (pairs_[i].lang != lang_)
            throw ConfigError("corpus pair " + std::to_string(i) + " has language " +
                              pairs_[i].lang.to_string() + ", expected " + lang_.to_string());
        if (pairs_[i].domain == Domain::TBD)
            throw ConfigError("corpus pair " + std::to_string(i) + " is tagged TBD");
    }
}

std::vector<BilingualPair> Corpus::filter(Domain domain) const
{
    std::vector<BilingualPair> out;
    for (const auto& pair : pairs_)
        if (domain_matches(domain, pair.domain))
            out.push_back(pair);
    return out;
}

Corpus ingest_pairs(const std::filesystem::path& path, FileFormat format, const LanguagePair& lang,
                    const IngestOptions& options)
{
    lang.validate();
    Corpus corpus;
    corpus.lang_ = lang;
    LineOutcome outcome;

    for_each_line(path, [&](std::size_t line_number, const std::string& line) {
        if (!is_valid_utf8(line)) {
            outcome.reject(path, line_number, "invalid UTF-8", options.strict);
            return;
        }
        std::string reason;
        std::optional<std::string> src;
        std::optional<std::string> tgt;
        std::string tag;
        if (format == FileFormat::Jsonl) {
            nlohmann::json record;
            try {
                record = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error&) {
                outcome.reject(path, line_number, "not valid JSON", options.strict);
                return;
            }
            if (!record.is_object()) {
                outcome.reject(path, line_number, "record is not a JSON object", options.strict);
                return;
            }
            src = text_field(record, "src_text", reason);
            if (src)
                tgt = text_field(record, "tgt_text", reason);
            std::optional<std::string> domain;
            if (tgt)
                domain = text_field(record, "domain", reason);
            if (!domain) {
                outcome.reject(path, line_number, reason, options.strict);
                return;
            }
            tag = *domain;
        } else {
            auto fields = split_tabs(line);
            if (fields.size() != 3) {
                outcome.reject(path, line_number,
                               "expected 3 tab-separated columns, got " +
                                   std::to_string(fields.size()),
                               options.strict);
                return;
            }
            if (is_blank(fields[0]) || is_blank(fields[1])) {
                outcome.reject(path, line_number,
                               is_blank(fields[0]) ? "src_text is empty" : "tgt_text is empty",
                               options.strict);
                return;
            }
            src = std::move(fields[0]);
            tgt = std::move(fields[1]);
            tag = std::move(fields[2]);
        }
        const Domain domain = record_domain(tag, path, line_number);
        corpus.pairs_.push_back(BilingualPair{static_cast<std::uint32_t>(corpus.pairs_.size()),
                                              std::move(*src), std::move(*tgt), domain, lang});
    });

    corpus.malformed_ = std::move(outcome.malformed);
    if (corpus.pairs_.empty() && corpus.malformed_.empty())
        corpus.warnings_.push_back(path.string() + ": no records (empty input)");
    if (!corpus.malformed_.empty())
        corpus.warnings_.push_back(path.string() + ": skipped " +
                                   std::to_string(corpus.malformed_.size()) + " malformed line(s)");
    return corpus;
}

std::vector<TestSegment> load_test_set(const std::filesystem::path& path, FileFormat format,
                                       const IngestOptions& options)
{
    std::vector<TestSegment> segments;
    LineOutcome outcome;
    for_each_line(path, [&](std::size_t line_number, const std::string& line) {
        if (!is_valid_utf8(line)) {
            outcome.reject(path, line_number, "invalid UTF-8", options.strict);
            return;
        }
        std::string reason;
        std::optional<std::string> title;
        std::optional<std::string> ref;
        if (format == FileFormat::Jsonl) {
            nlohmann::json record;
            try {
                record = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error&) {
                outcome.reject(path, line_number, "not valid JSON", options.strict);
                return;
            }
            if (!record.is_object()) {
                outcome.reject(path, line_number, "record is not a JSON object", options.strict);
                return;
            }
            title = text_field(record, "src_title", reason);
            if (title)
                ref = text_field(record, "ref_translation", reason);
        } else {
            auto fields = split_tabs(line);
            if (fields.size() != 2)
                reason = "expected 2 tab-separated columns, got " + std::to_string(fields.size());
            else if (is_blank(fields[0]))
                reason = "src_title is empty";
            else if (is_blank(fields[1]))
                reason = "ref_translation is empty";
            else {
                title = std::move(fields[0]);
                ref = std::move(fields[1]);
            }
        }
        if (!title || !ref) {
            outcome.reject(path, line_number, reason, options.strict);
            return;
        }
        segments.push_back({std::move(*title), std::move(*ref)});
    });
    return segments;
}

std::vector<BilingualPair> sample_random(std::span<const BilingualPair> pool, Domain domain,
                                         std::size_t k, std::uint64_t seed)
{
    if (k == 0)
        throw ConfigError("sample_random: k must be at least 1");
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (domain_matches(domain, pool[i].domain))
            candidates.push_back(i);
    if (candidates.size() < k)
        throw ConfigError("sample_random: pool of " + std::to_string(candidates.size()) +
                          " pairs for domain " + std::string(domain_tag(domain)) +
                          " is smaller than k = " + std::to_string(k));

    std::mt19937_64 engine(seed);
    std::vector<BilingualPair> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + uniform_below(engine, candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
        out.push_back(pool[candidates[i]]);
    }
    return out;
}

bool is_valid_utf8(std::string_view text) noexcept
{
    std::size_t i = 0;
    while (i < text.size()) {
        const auto lead = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        char32_t min = 0;
        if (lead < 0x80) {
            ++i;
            continue;
        }
        if ((lead & 0xE0) == 0xC0) {
            len = 2, cp = lead & 0x1F, min = 0x80;
        } else if ((lead & 0xF0) == 0xE0) {
            len = 3, cp = lead & 0x0F, min = 0x800;
        } else if ((lead & 0xF8) == 0xF0) {
            len = 4, cp = lead & 0x07, min = 0x10000;
        } else {
            return false;
        }
        if (i + len > text.size())
            return false;
        for (std::size_t j = 1; j < len; ++j) {
            const auto cont = static_cast<unsigned char>(text[i + j]);
            if ((cont & 0xC0) != 0x80)
                return false;
            cp = (cp << 6) | (cont & 0x3F);
        }
        if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
            return false;
        i += len;
    }
    return true;
}

}  // namespace ragmt
