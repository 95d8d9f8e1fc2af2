#include "ragmt/prompting.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>
#include <utility>

#include "ragmt/error.hpp"

namespace ragmt {
namespace detail {
extern const std::string_view kTemplateA;
extern const std::string_view kTemplateB;
}  // namespace detail

namespace {

constexpr std::string_view kSourceLanguage = "<source language e.g. English>";
constexpr std::string_view kTitle = "<title in the source language>";
constexpr std::string_view kTargetLanguage = "<target language>";
constexpr std::string_view kExampleSource = "<source title>";
constexpr std::string_view kExampleTarget = "<title translation>";
constexpr std::string_view kExampleLead = "    Example ";

using Substitutions = std::vector<std::pair<std::string_view, std::string_view>>;

/// Single left-to-right pass; substituted values are never rescanned, so user text
/// that happens to contain a placeholder spelling is inserted verbatim.
void substitute(std::string& out, std::string_view text, const Substitutions& subs)
{
    std::size_t i = 0;
    while (i < text.size()) {
        const auto open = text.find('<', i);
        if (open == std::string_view::npos) {
            out.append(text.substr(i));
            break;
        }
        out.append(text.substr(i, open - i));
        i = open;
        const auto match = std::find_if(subs.begin(), subs.end(), [&](const auto& sub) {
            return text.substr(i).starts_with(sub.first);
        });
        if (match == subs.end()) {
            out.push_back('<');
            ++i;
        } else {
            out.append(match->second);
            i += match->first.size();
        }
    }
}

/// Template B split into the text before the examples, one example block (after
/// its number) and the text after the last example.
struct FewShotLayout {
    std::string_view prefix;
    std::string_view block_tail;
    std::string_view suffix;
};

FewShotLayout parse_fewshot_layout(std::string_view tpl)
{
    const auto first = tpl.find(std::string(kExampleLead) + "1: ");
    const auto second = tpl.find(std::string(kExampleLead) + "2: ");
    if (first == std::string_view::npos || second == std::string_view::npos || second < first)
        throw std::logic_error("template B asset lacks the Example 1/2 blocks");
    const auto block_tail = tpl.substr(first + kExampleLead.size() + 1, second - first - kExampleLead.size() - 1);

    std::size_t end = first;
    for (int number = 1;; ++number) {
        const std::string block = std::string(kExampleLead) + std::to_string(number) + std::string(block_tail);
        if (tpl.substr(end, block.size()) != block)
            break;
        end += block.size();
    }
    if (end == first)
        throw std::logic_error("template B asset has an irregular example block");
    return {tpl.substr(0, first), block_tail, tpl.substr(end)};
}

const FewShotLayout& fewshot_layout()
{
    static const FewShotLayout layout = parse_fewshot_layout(detail::kTemplateB);
    return layout;
}

void require_title(std::string_view title)
{
    if (title.find_first_not_of(" \t\r\n") == std::string_view::npos)
        throw ConfigError("title must not be empty");
}

}  // namespace

ShotMode ShotMode::rand(std::size_t k)
{
    if (k == 0)
        throw ConfigError("RAND mode needs k >= 1");
    return {Kind::Rand, k};
}

ShotMode ShotMode::rag(std::size_t k)
{
    if (k == 0)
        throw ConfigError("RAG mode needs k >= 1");
    return {Kind::Rag, k};
}

ShotMode ShotMode::parse(std::string_view text)
{
    std::string key;
    for (char c : text)
        if (c != '-' && c != '_' && c != ' ')
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (key == "baseline")
        return baseline();
    const auto number = [&](std::size_t from) -> std::size_t {
        const std::string digits = key.substr(from);
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit))
            throw ConfigError("shot mode '" + std::string(text) + "' needs a shot count, e.g. rag5");
        return std::stoul(digits);
    };
    if (key.starts_with("rand"))
        return rand(number(4));
    if (key.starts_with("rag"))
        return rag(number(3));
    throw ConfigError("unknown shot mode '" + std::string(text) + "'");
}

std::string ShotMode::key() const
{
    switch (kind) {
        case Kind::Baseline: return "baseline";
        case Kind::Rand: return "rand-" + std::to_string(k);
        case Kind::Rag: return "rag-" + std::to_string(k);
    }
    return "?";
}

std::string ShotMode::label() const
{
    switch (kind) {
        case Kind::Baseline: return "Baseline";
        case Kind::Rand: return "RAND " + std::to_string(k) + "-shot";
        case Kind::Rag: return "RAG " + std::to_string(k) + "-shot";
    }
    return "?";
}

std::string_view template_name(TemplateId id) noexcept { return id == TemplateId::A ? "A" : "B"; }

std::string_view template_text(TemplateId id) noexcept
{
    return id == TemplateId::A ? detail::kTemplateA : detail::kTemplateB;
}

LanguageNames::LanguageNames()
    : names_{{"cs", "Czech"},   {"de", "German"}, {"en", "English"}, {"it", "Italian"},
             {"nl", "Dutch"},   {"pl", "Polish"}, {"sv", "Swedish"}, {"tr", "Turkish"}}
{
}

void LanguageNames::set(std::string code, std::string name)
{
    names_.insert_or_assign(std::move(code), std::move(name));
}

const std::string& LanguageNames::name(std::string_view code) const
{
    const auto it = names_.find(code);
    if (it == names_.end())
        throw ConfigError("no display name for language '" + std::string(code) + "'");
    return it->second;
}

bool LanguageNames::contains(std::string_view code) const { return names_.find(code) != names_.end(); }

RenderedPrompt render_baseline(std::string_view title, const LanguagePair& lang,
                               const LanguageNames& names)
{
    require_title(title);
    RenderedPrompt prompt;
    prompt.template_id = TemplateId::A;
    prompt.lang = lang;
    prompt.source_title = std::string(title);
    substitute(prompt.text, detail::kTemplateA,
               {{kSourceLanguage, names.name(lang.src)},
                {kTitle, title},
                {kTargetLanguage, names.name(lang.tgt)}});
    return prompt;
}

RenderedPrompt render_fewshot(std::string_view title, const LanguagePair& lang,
                              const LanguageNames& names, std::span<const BilingualPair> examples)
{
    require_title(title);
    if (examples.empty())
        throw ConfigError("render_fewshot needs at least one example; use render_baseline for zero shots");

    const auto& layout = fewshot_layout();
    const Substitutions header{{kSourceLanguage, names.name(lang.src)},
                               {kTitle, title},
                               {kTargetLanguage, names.name(lang.tgt)}};

    RenderedPrompt prompt;
    prompt.template_id = TemplateId::B;
    prompt.lang = lang;
    prompt.source_title = std::string(title);
    prompt.requested_k = examples.size();
    substitute(prompt.text, layout.prefix, header);
    for (std::size_t i = 0; i < examples.size(); ++i) {
        prompt.text.append(kExampleLead);
        prompt.text.append(std::to_string(i + 1));
        substitute(prompt.text, layout.block_tail,
                   {{kExampleSource, examples[i].src_text}, {kExampleTarget, examples[i].tgt_text}});
        prompt.example_ids.push_back(examples[i].id);
        prompt.examples.push_back({examples[i].src_text, examples[i].tgt_text});
    }
    substitute(prompt.text, layout.suffix, header);
    return prompt;
}

RenderedPrompt render_prompt(std::string_view title, const LanguagePair& lang,
                             const LanguageNames& names, std::span<const BilingualPair> examples,
                             std::size_t requested_k)
{
    RenderedPrompt prompt = examples.empty() ? render_baseline(title, lang, names)
                                             : render_fewshot(title, lang, names, examples);
    prompt.requested_k = requested_k;
    return prompt;
}

std::vector<BilingualPair> select_examples(const ShotMode& mode, const ExampleSource& source,
                                           std::string_view title, std::uint64_t seed)
{
    switch (mode.kind) {
        case ShotMode::Kind::Baseline:
            return {};
        case ShotMode::Kind::Rag: {
            if (source.index == nullptr)
                throw ConfigError("RAG mode needs a retrieval index");
            std::vector<BilingualPair> pairs;
            for (auto& hit : source.index->search(title, mode.k, source.keep))
                pairs.push_back(std::move(hit.pair));
            return pairs;
        }
        case ShotMode::Kind::Rand: {
            auto pool = source.pool;
            if (pool.empty() && source.index != nullptr)
                pool = source.index->store();
            if (!source.keep)
                return sample_random(pool, source.domain, mode.k, seed);
            std::vector<BilingualPair> kept;
            std::copy_if(pool.begin(), pool.end(), std::back_inserter(kept), source.keep);
            return sample_random(kept, source.domain, mode.k, seed);
        }
    }
    return {};
}

}  // namespace ragmt
