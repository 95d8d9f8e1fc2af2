#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ragmt/corpus.hpp"
#include "ragmt/llm.hpp"
#include "ragmt/metrics.hpp"
#include "ragmt/prompting.hpp"
#include "ragmt/retrieval.hpp"

namespace ragmt {

inline constexpr int kReportSchemaVersion = 1;

/// One cell of the experiment grid.
struct RunConfig {
    LanguagePair lang;
    ShotMode mode;
    std::optional<Domain> domain;  // required for Rand/Rag; recorded but unused by Baseline
    BackendConfig backend;
    ChrfParams chrf;
    bool sentence_average = false;
    std::uint64_t seed = 0;
    std::filesystem::path test_set;
    FileFormat test_format = FileFormat::Jsonl;
    std::filesystem::path index_dir;
    bool exclude_exact_match = false;

    /// Throws ConfigError when Rand/Rag has no domain.
    void validate() const;
};

struct SegmentResult {
    TranslationRecord record;
    double sentence_chrf = 0.0;
    std::optional<double> example_similarity;
    std::uint64_t seed = 0;
    /// BM25 score of every example against the segment title, in prompt order.
    std::vector<double> example_bm25;
};

struct FailureCounts {
    std::size_t ok = 0;
    std::size_t parse_failed = 0;
    std::size_t transport_failed = 0;
    std::size_t shortfall = 0;  // segments that got fewer shots than requested
};

struct ConfigResult {
    RunConfig config;
    double corpus_chrf = 0.0;
    std::vector<SegmentResult> per_segment;
    std::optional<double> mean_example_similarity;
    FailureCounts failures;
};

/// Everything run_config needs once files are loaded.
struct RunInputs {
    std::span<const TestSegment> segments;
    const RetrievalIndex* index = nullptr;  // Rand samples its store, Rag searches it
    const Translator* translator = nullptr;
    const LanguageNames* names = nullptr;
};

/// Select examples, render, translate and score every segment in order.
/// Per-segment failures are recorded, never thrown.
ConfigResult run_config(const RunConfig& config, const RunInputs& inputs);

/// Loads test set and index from the paths in `config`, then runs it.
ConfigResult run_config(const RunConfig& config);

/// Relative percent change 100 (config - baseline) / baseline.
/// Throws ConfigError when the baseline score is 0.
double delta_percent(double config_chrf, double baseline_chrf);

/// "+15.3%", "-1.0%", "+0.0%" (one decimal, always signed, no negative zero).
std::string format_delta_percent(double delta);
/// "+6.1" style signed one-decimal chrF points.
std::string format_delta_points(double delta);

struct DeltaCell {
    double percent = 0.0;
    double points = 0.0;
};

struct DeltaRow {
    ShotMode mode;
    std::map<Domain, DeltaCell> cells;
};

struct SimilarityRow {
    ShotMode mode;
    std::map<Domain, double> cells;
};

struct ConfigSummary {
    ShotMode mode;
    std::optional<Domain> domain;
    double corpus_chrf = 0.0;
    std::optional<double> mean_example_similarity;
    FailureCounts failures;
};

struct EvalReport {
    LanguagePair lang;
    double baseline_chrf = 0.0;
    std::vector<Domain> domains;
    std::vector<DeltaRow> delta;
    std::vector<SimilarityRow> similarity;
    std::vector<ConfigSummary> configs;
    std::vector<std::string> aborted;  // "<mode>/<domain>: <error>"
    nlohmann::ordered_json manifest;
};

/// Relative-change table: one row per mode (Baseline first, identically +0.0%), one column
/// per domain. Throws ConfigError if results disagree on language or test-set size,
/// or if the baseline score is 0.
std::vector<DeltaRow> delta_table(std::span<const ConfigResult> results,
                                  const ConfigResult& baseline, std::span<const Domain> domains);

/// Mean example similarity per non-baseline mode and domain.
std::vector<SimilarityRow> similarity_table(std::span<const ConfigResult> results,
                                            std::span<const Domain> domains);

/// Declarative description of a full run (JSON document; see README).
struct GridConfig {
    LanguagePair lang;
    std::filesystem::path test_set;
    FileFormat test_format = FileFormat::Jsonl;
    /// Either a bilingual corpus (indexes built in memory per domain) ...
    std::filesystem::path corpus;
    FileFormat corpus_format = FileFormat::Jsonl;
    /// ... or prebuilt index directories per domain.
    std::map<Domain, std::filesystem::path> index_dirs;
    std::vector<ShotMode> modes;
    std::vector<Domain> domains;
    std::uint64_t seed = 0;
    BackendConfig backend;
    ChrfParams chrf;
    bool sentence_average = false;
    Bm25Params bm25;
    bool exclude_exact_match = false;
    bool strict_ingest = false;
    std::map<std::string, std::string> language_names;

    static GridConfig from_json_text(std::string_view text, const std::filesystem::path& base_dir);
    static GridConfig load(const std::filesystem::path& path);
    void validate() const;
};

struct GridOutcome {
    EvalReport report;
    std::vector<ConfigResult> results;
    bool ok() const noexcept { return report.aborted.empty(); }
};

/// Runs Baseline once, then every (mode, domain) cell sequentially. A cell whose
/// setup fails is recorded in report.aborted and the remaining cells still run.
GridOutcome run_grid(const GridConfig& grid);

nlohmann::ordered_json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::ordered_json& json);
std::string render_markdown(const EvalReport& report);
/// One JSON object per segment per config, in grid then segment order.
std::string segments_to_jsonl(std::span<const ConfigResult> results);

/// Writes report.json, report.md and segments.jsonl into `out_dir`.
void write_reports(const GridOutcome& outcome, const std::filesystem::path& out_dir);

}  // namespace ragmt
