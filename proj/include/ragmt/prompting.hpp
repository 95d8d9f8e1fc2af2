#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ragmt/corpus.hpp"
#include "ragmt/retrieval.hpp"

namespace ragmt {

/// How few-shot examples are chosen: none, k random pairs, or top-k retrieved pairs.
struct ShotMode {
    enum class Kind { Baseline, Rand, Rag };

    Kind kind = Kind::Baseline;
    std::size_t k = 0;  // 0 for Baseline, >= 1 otherwise

    static ShotMode baseline() noexcept { return {}; }
    static ShotMode rand(std::size_t k);
    static ShotMode rag(std::size_t k);

    /// Accepts "baseline", "rand1", "rand-5", "rag5", "RAG-1", ...
    static ShotMode parse(std::string_view text);
    /// Short key used in configs and JSON reports: "baseline", "rand-1", "rag-5".
    std::string key() const;
    /// Row label in the report tables: "Baseline", "RAND 1-shot", "RAG 5-shot".
    std::string label() const;

    friend bool operator==(const ShotMode&, const ShotMode&) = default;
};

enum class TemplateId { A, B };

std::string_view template_name(TemplateId id) noexcept;
/// Raw template asset text, placeholders intact.
std::string_view template_text(TemplateId id) noexcept;

struct PromptExample {
    std::string src;
    std::string tgt;
};

struct RenderedPrompt {
    std::string text;
    TemplateId template_id = TemplateId::A;
    std::vector<std::uint32_t> example_ids;
    LanguagePair lang;
    std::optional<std::uint64_t> seed;
    /// Inputs the text was rendered from; mock backends read these.
    std::string source_title;
    std::vector<PromptExample> examples;
    /// Shots asked for; larger than examples.size() when retrieval came up short.
    std::size_t requested_k = 0;
};

/// Display names for language codes; ships the eight languages of the experiments.
class LanguageNames {
  public:
    LanguageNames();

    void set(std::string code, std::string name);
    /// Throws ConfigError when the code has no display name.
    const std::string& name(std::string_view code) const;
    bool contains(std::string_view code) const;

  private:
    std::map<std::string, std::string, std::less<>> names_;
};

/// Template A. Throws ConfigError on an empty title or unknown language name.
RenderedPrompt render_baseline(std::string_view title, const LanguagePair& lang,
                               const LanguageNames& names);

/// Template B with one block per example, numbered from 1 in the given order.
/// Throws ConfigError on an empty example list, empty title or unknown language name.
RenderedPrompt render_fewshot(std::string_view title, const LanguagePair& lang,
                              const LanguageNames& names, std::span<const BilingualPair> examples);

/// Template A when `examples` is empty, template B otherwise. `requested_k` is recorded.
RenderedPrompt render_prompt(std::string_view title, const LanguagePair& lang,
                             const LanguageNames& names, std::span<const BilingualPair> examples,
                             std::size_t requested_k);

/// Where examples come from. Rag needs `index`; Rand samples `pool` (falling back
/// to the index store when the pool is empty) restricted to `domain`.
struct ExampleSource {
    const RetrievalIndex* index = nullptr;
    std::span<const BilingualPair> pool;
    Domain domain = Domain::TBD;
    /// Optional exclusion, e.g. hiding exact copies of the test title.
    HitFilter keep;
};

std::vector<BilingualPair> select_examples(const ShotMode& mode, const ExampleSource& source,
                                           std::string_view title, std::uint64_t seed);

}  // namespace ragmt
