#include "ragmt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "ragmt/checksum.hpp"
#include "ragmt/error.hpp"
#include "ragmt/random.hpp"
#include "ragmt/version.hpp"

namespace ragmt {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_fixed(double value, int decimals)
{
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*f", decimals, value);
    return buffer;
}

std::string column_title(Domain domain)
{
    return domain == Domain::TBD ? "T.B.D." : std::string(domain_tag(domain));
}

std::string upper(std::string text)
{
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return text;
}

std::string domain_label(const std::optional<Domain>& domain)
{
    return domain ? std::string(domain_key(*domain)) : "-";
}

ordered_json optional_number(const std::optional<double>& value)
{
    return value ? ordered_json(*value) : ordered_json(nullptr);
}

/// Maps stored pair ids to index positions so example scores can be looked up.
std::unordered_map<std::uint32_t, std::uint32_t> doc_ids_by_pair(const RetrievalIndex& index)
{
    std::unordered_map<std::uint32_t, std::uint32_t> map;
    const auto store = index.store();
    for (std::uint32_t doc = 0; doc < store.size(); ++doc)
        map.emplace(store[doc].id, doc);
    return map;
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return std::move(text).str();
}

void write_text(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw Error("write failed on " + path.string());
}

ordered_json failures_json(const FailureCounts& f)
{
    return {{"ok", f.ok},
            {"parse_failed", f.parse_failed},
            {"transport_failed", f.transport_failed},
            {"shortfall", f.shortfall}};
}

}  // namespace

void RunConfig::validate() const
{
    lang.validate();
    chrf.validate();
    if (mode.kind != ShotMode::Kind::Baseline && !domain)
        throw ConfigError(mode.label() + " needs a domain");
}

ConfigResult run_config(const RunConfig& config, const RunInputs& inputs)
{
    config.validate();
    if (inputs.translator == nullptr || inputs.names == nullptr)
        throw ConfigError("run_config needs a translator and language names");
    const bool needs_index = config.mode.kind != ShotMode::Kind::Baseline;
    if (needs_index) {
        if (inputs.index == nullptr)
            throw ConfigError(config.mode.label() + " needs a retrieval index");
        if (inputs.index->lang() != config.lang)
            throw ConfigError("index language " + inputs.index->lang().to_string() +
                              " does not match run language " + config.lang.to_string());
        if (inputs.index->domain() != *config.domain)
            throw ConfigError("index domain " + std::string(domain_tag(inputs.index->domain())) +
                              " does not match run domain " + std::string(domain_tag(*config.domain)));
        if (config.mode.kind == ShotMode::Kind::Rand && inputs.index->n_docs() < config.mode.k)
            throw ConfigError("RAND pool of " + std::to_string(inputs.index->n_docs()) +
                              " pairs is smaller than k = " + std::to_string(config.mode.k));
    }

    const auto segments = inputs.segments;
    std::vector<RenderedPrompt> prompts;
    prompts.reserve(segments.size());
    std::vector<std::vector<BilingualPair>> chosen(segments.size());
    std::vector<std::uint64_t> seeds(segments.size());

    for (std::size_t i = 0; i < segments.size(); ++i) {
        const std::string& title = segments[i].src_title;
        seeds[i] = derive_segment_seed(config.seed, i);
        ExampleSource source;
        source.index = inputs.index;
        source.domain = config.domain.value_or(Domain::TBD);
        if (config.exclude_exact_match)
            source.keep = [&title](const BilingualPair& pair) { return pair.src_text != title; };
        chosen[i] = select_examples(config.mode, source, title, seeds[i]);
        RenderedPrompt prompt = render_prompt(title, config.lang, *inputs.names, chosen[i], config.mode.k);
        if (config.mode.kind == ShotMode::Kind::Rand)
            prompt.seed = seeds[i];
        prompts.push_back(std::move(prompt));
    }

    auto records = inputs.translator->translate_batch(prompts);

    ConfigResult result;
    result.config = config;
    result.per_segment.reserve(segments.size());
    std::vector<HypRef> scored;
    scored.reserve(segments.size());
    std::unordered_map<std::uint32_t, std::uint32_t> doc_of;
    if (needs_index)
        doc_of = doc_ids_by_pair(*inputs.index);
    double similarity_sum = 0.0;
    std::size_t similarity_count = 0;

    for (std::size_t i = 0; i < segments.size(); ++i) {
        SegmentResult segment;
        segment.seed = seeds[i];
        segment.record = std::move(records[i]);
        const std::string hypothesis = segment.record.translation.value_or(std::string{});
        segment.sentence_chrf = chrf_sentence(hypothesis, segments[i].ref_translation, config.chrf);
        scored.emplace_back(hypothesis, segments[i].ref_translation);

        switch (segment.record.status) {
            case TranslationStatus::Ok: ++result.failures.ok; break;
            case TranslationStatus::ParseFailed: ++result.failures.parse_failed; break;
            case TranslationStatus::TransportFailed: ++result.failures.transport_failed; break;
        }
        if (needs_index && chosen[i].size() < config.mode.k)
            ++result.failures.shortfall;

        if (!chosen[i].empty()) {
            std::vector<std::string> sources;
            const TokenStream query = tokenize(segments[i].src_title);
            for (const auto& pair : chosen[i]) {
                sources.push_back(pair.src_text);
                segment.example_bm25.push_back(inputs.index->score(query, doc_of.at(pair.id)));
            }
            segment.example_similarity = example_similarity(segments[i].src_title, sources, config.chrf);
            similarity_sum += *segment.example_similarity;
            ++similarity_count;
        }
        result.per_segment.push_back(std::move(segment));
    }

    if (!scored.empty())
        result.corpus_chrf = config.sentence_average ? chrf_sentence_average(scored, config.chrf)
                                                     : chrf_corpus(scored, config.chrf);
    if (needs_index && similarity_count > 0)
        result.mean_example_similarity = similarity_sum / static_cast<double>(similarity_count);
    return result;
}

ConfigResult run_config(const RunConfig& config)
{
    config.validate();
    const auto segments = load_test_set(config.test_set, config.test_format);
    std::optional<RetrievalIndex> index;
    if (config.mode.kind != ShotMode::Kind::Baseline)
        index = load_index(config.index_dir);
    const Translator translator(config.backend);
    const LanguageNames names;
    return run_config(config, RunInputs{segments, index ? &*index : nullptr, &translator, &names});
}

double delta_percent(double config_chrf, double baseline_chrf)
{
    if (baseline_chrf == 0.0)
        throw ConfigError("baseline chrF is 0; relative deltas are undefined");
    return 100.0 * (config_chrf - baseline_chrf) / baseline_chrf;
}

std::string format_delta_points(double delta)
{
    double rounded = std::round(delta * 10.0) / 10.0;
    if (rounded == 0.0)
        rounded = 0.0;  // drop the sign of -0.0
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%+.1f", rounded);
    return buffer;
}

std::string format_delta_percent(double delta) { return format_delta_points(delta) + "%"; }

std::vector<DeltaRow> delta_table(std::span<const ConfigResult> results, const ConfigResult& baseline,
                                  std::span<const Domain> domains)
{
    if (baseline.config.mode.kind != ShotMode::Kind::Baseline)
        throw ConfigError("delta_table: the reference result is not a baseline run");
    if (baseline.corpus_chrf == 0.0)
        throw ConfigError("delta_table: baseline chrF is 0; relative deltas are undefined");

    std::vector<DeltaRow> rows;
    DeltaRow base_row{ShotMode::baseline(), {}};
    for (const Domain domain : domains)
        base_row.cells[domain] = DeltaCell{0.0, 0.0};
    rows.push_back(std::move(base_row));

    for (const auto& result : results) {
        if (result.config.mode.kind == ShotMode::Kind::Baseline)
            continue;
        if (result.config.lang != baseline.config.lang)
            throw ConfigError("delta_table: results mix language pairs");
        if (result.per_segment.size() != baseline.per_segment.size())
            throw ConfigError("delta_table: results were run on different test sets");
        if (!(result.config.chrf == baseline.config.chrf) ||
            result.config.sentence_average != baseline.config.sentence_average)
            throw ConfigError("delta_table: results use different chrF parameters");
        if (!result.config.domain ||
            std::find(domains.begin(), domains.end(), *result.config.domain) == domains.end())
            continue;
        auto row = std::find_if(rows.begin(), rows.end(),
                                [&](const DeltaRow& r) { return r.mode == result.config.mode; });
        if (row == rows.end()) {
            rows.push_back(DeltaRow{result.config.mode, {}});
            row = std::prev(rows.end());
        }
        row->cells[*result.config.domain] =
            DeltaCell{delta_percent(result.corpus_chrf, baseline.corpus_chrf),
                      result.corpus_chrf - baseline.corpus_chrf};
    }
    return rows;
}

std::vector<SimilarityRow> similarity_table(std::span<const ConfigResult> results,
                                            std::span<const Domain> domains)
{
    std::vector<SimilarityRow> rows;
    for (const auto& result : results) {
        if (result.config.mode.kind == ShotMode::Kind::Baseline || !result.config.domain ||
            !result.mean_example_similarity)
            continue;
        if (std::find(domains.begin(), domains.end(), *result.config.domain) == domains.end())
            continue;
        auto row = std::find_if(rows.begin(), rows.end(),
                                [&](const SimilarityRow& r) { return r.mode == result.config.mode; });
        if (row == rows.end()) {
            rows.push_back(SimilarityRow{result.config.mode, {}});
            row = std::prev(rows.end());
        }
        row->cells[*result.config.domain] = *result.mean_example_similarity;
    }
    return rows;
}

GridConfig GridConfig::from_json_text(std::string_view text, const std::filesystem::path& base_dir)
{
    const auto resolve = [&](const std::string& value) {
        std::filesystem::path path(value);
        return path.is_relative() ? base_dir / path : path;
    };

    GridConfig grid;
    try {
        const auto json = nlohmann::json::parse(text);
        grid.lang = LanguagePair::parse(json.at("lang").get<std::string>());
        grid.test_set = resolve(json.at("test_set").get<std::string>());
        grid.test_format = parse_file_format(json.value("test_format", std::string("jsonl")));
        if (json.contains("corpus"))
            grid.corpus = resolve(json.at("corpus").get<std::string>());
        grid.corpus_format = parse_file_format(json.value("corpus_format", std::string("jsonl")));
        if (json.contains("indexes"))
            for (const auto& [key, value] : json.at("indexes").items())
                grid.index_dirs[parse_domain(key)] = resolve(value.get<std::string>());

        const std::vector<std::string> default_modes{"baseline", "rand-1", "rand-5", "rag-1", "rag-5"};
        for (const auto& mode : json.value("modes", default_modes))
            grid.modes.push_back(ShotMode::parse(mode));
        const std::vector<std::string> default_domains{"ttl", "bp", "pd", "tbd"};
        for (const auto& domain : json.value("domains", default_domains))
            grid.domains.push_back(parse_domain(domain));

        grid.seed = json.value("seed", std::uint64_t{0});
        if (json.contains("backend")) {
            const auto& backend = json.at("backend");
            grid.backend = backend.is_string() ? BackendConfig::from_spec(backend.get<std::string>(), base_dir)
                                               : BackendConfig::from_json_text(backend.dump(), base_dir);
        }
        if (json.contains("chrf")) {
            const auto& chrf = json.at("chrf");
            grid.chrf.max_n = chrf.value("max_n", grid.chrf.max_n);
            grid.chrf.beta = chrf.value("beta", grid.chrf.beta);
            grid.chrf.strip_ws = chrf.value("strip_ws", grid.chrf.strip_ws);
            grid.sentence_average = chrf.value("sentence_average", false);
        }
        if (json.contains("bm25")) {
            grid.bm25.k1 = json.at("bm25").value("k1", grid.bm25.k1);
            grid.bm25.b = json.at("bm25").value("b", grid.bm25.b);
        }
        grid.exclude_exact_match = json.value("exclude_exact_match", false);
        grid.strict_ingest = json.value("strict_ingest", false);
        if (json.contains("language_names"))
            grid.language_names = json.at("language_names").get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid grid config: " + std::string(e.what()));
    }
    grid.validate();
    return grid;
}

GridConfig GridConfig::load(const std::filesystem::path& path)
{
    return from_json_text(read_text(path), path.parent_path());
}

void GridConfig::validate() const
{
    lang.validate();
    chrf.validate();
    bm25.validate();
    backend.validate();
    if (std::count(modes.begin(), modes.end(), ShotMode::baseline()) != 1)
        throw ConfigError("grid must contain the baseline mode exactly once");
    const bool needs_index = std::any_of(modes.begin(), modes.end(), [](const ShotMode& m) {
        return m.kind != ShotMode::Kind::Baseline;
    });
    if (needs_index && domains.empty())
        throw ConfigError("grid has few-shot modes but no domains");
    if (needs_index && corpus.empty())
        for (const Domain domain : domains)
            if (!index_dirs.contains(domain))
                throw ConfigError("grid needs a corpus or an index directory for domain " +
                                  std::string(domain_key(domain)));
}

GridOutcome run_grid(const GridConfig& grid)
{
    grid.validate();
    const auto segments = load_test_set(grid.test_set, grid.test_format, {grid.strict_ingest});
    if (segments.empty())
        throw ConfigError("test set " + grid.test_set.string() + " has no segments");

    LanguageNames names;
    for (const auto& [code, name] : grid.language_names)
        names.set(code, name);
    const Translator translator(grid.backend);

    ordered_json manifest;
    manifest["schema_version"] = kReportSchemaVersion;
    manifest["tool"] = "ragmt";
    manifest["tool_version"] = kVersion;
    manifest["lang"] = grid.lang.to_string();
    manifest["seed"] = grid.seed;
    manifest["seed_derivation"] = "segment_seed = splitmix64(seed ^ splitmix64(segment_index))";
    manifest["modes"] = ordered_json::array();
    for (const auto& mode : grid.modes)
        manifest["modes"].push_back(mode.key());
    manifest["domains"] = ordered_json::array();
    for (const Domain domain : grid.domains)
        manifest["domains"].push_back(domain_key(domain));
    manifest["templates"] = {{"A", {{"sha256", sha256_hex(template_text(TemplateId::A))}}},
                             {"B", {{"sha256", sha256_hex(template_text(TemplateId::B))}}}};
    manifest["chrf"] = {{"max_n", grid.chrf.max_n},
                        {"beta", grid.chrf.beta},
                        {"strip_ws", grid.chrf.strip_ws},
                        {"averaging", grid.sentence_average ? "sentence" : "micro"}};
    manifest["bm25"] = {{"k1", grid.bm25.k1}, {"b", grid.bm25.b}};
    manifest["analyzer_version"] = kAnalyzerVersion;
    manifest["backend"] = {{"kind", backend_kind_name(grid.backend.kind)},
                           {"model", grid.backend.model},
                           {"endpoint", grid.backend.endpoint},
                           {"temperature", grid.backend.temperature},
                           {"max_retries", grid.backend.max_retries},
                           {"script_sha256", grid.backend.script.empty()
                                                 ? ordered_json(nullptr)
                                                 : ordered_json(sha256_file(grid.backend.script))}};
    manifest["test_set"] = {{"file", grid.test_set.filename().string()},
                            {"sha256", sha256_file(grid.test_set)},
                            {"segments", segments.size()}};
    manifest["exclude_exact_match"] = grid.exclude_exact_match;

    std::optional<Corpus> corpus;
    const bool needs_index = std::any_of(grid.modes.begin(), grid.modes.end(), [](const ShotMode& m) {
        return m.kind != ShotMode::Kind::Baseline;
    });
    if (!grid.corpus.empty() && needs_index) {
        corpus = ingest_pairs(grid.corpus, grid.corpus_format, grid.lang, {grid.strict_ingest});
        manifest["corpus"] = {{"file", grid.corpus.filename().string()},
                              {"sha256", sha256_file(grid.corpus)},
                              {"pairs", corpus->size()},
                              {"malformed_lines", corpus->malformed().size()}};
    } else {
        manifest["corpus"] = nullptr;
    }

    GridOutcome outcome;
    EvalReport& report = outcome.report;
    report.lang = grid.lang;
    report.domains = grid.domains;

    RunConfig base_config;
    base_config.lang = grid.lang;
    base_config.backend = grid.backend;
    base_config.chrf = grid.chrf;
    base_config.sentence_average = grid.sentence_average;
    base_config.seed = grid.seed;
    base_config.test_set = grid.test_set;
    base_config.test_format = grid.test_format;
    base_config.exclude_exact_match = grid.exclude_exact_match;

    const RunInputs base_inputs{segments, nullptr, &translator, &names};
    RunConfig baseline_config = base_config;
    baseline_config.mode = ShotMode::baseline();
    outcome.results.push_back(run_config(baseline_config, base_inputs));
    report.baseline_chrf = outcome.results.front().corpus_chrf;

    manifest["indexes"] = ordered_json::object();
    if (needs_index) {
        for (const Domain domain : grid.domains) {
            std::optional<RetrievalIndex> index;
            std::string setup_error;
            try {
                if (const auto dir = grid.index_dirs.find(domain); dir != grid.index_dirs.end()) {
                    index = load_index(dir->second);
                    if (!(index->params() == grid.bm25))
                        throw ConfigError("index BM25 parameters differ from the grid's");
                    manifest["indexes"][std::string(domain_key(domain))] = {
                        {"source", "directory"},
                        {"manifest_sha256", sha256_file(dir->second / "manifest.json")},
                        {"n_docs", index->n_docs()},
                        {"avg_doc_len", index->avg_doc_len()}};
                } else {
                    const auto pool = corpus->filter(domain);
                    index = build_index(pool, grid.lang, domain, grid.bm25);
                    manifest["indexes"][std::string(domain_key(domain))] = {
                        {"source", "corpus"}, {"n_docs", index->n_docs()}, {"avg_doc_len", index->avg_doc_len()}};
                }
            } catch (const Error& e) {
                setup_error = e.what();
            }

            for (const auto& mode : grid.modes) {
                if (mode.kind == ShotMode::Kind::Baseline)
                    continue;
                const std::string cell = mode.key() + "/" + std::string(domain_key(domain));
                if (!index) {
                    report.aborted.push_back(cell + ": " + setup_error);
                    continue;
                }
                RunConfig config = base_config;
                config.mode = mode;
                config.domain = domain;
                if (const auto dir = grid.index_dirs.find(domain); dir != grid.index_dirs.end())
                    config.index_dir = dir->second;
                try {
                    outcome.results.push_back(
                        run_config(config, RunInputs{segments, &*index, &translator, &names}));
                } catch (const Error& e) {
                    report.aborted.push_back(cell + ": " + e.what());
                }
            }
        }
    }

    // Grid order puts domains outermost; reports list modes first, as the tables do.
    std::stable_sort(outcome.results.begin() + 1, outcome.results.end(),
                     [&](const ConfigResult& a, const ConfigResult& b) {
                         const auto rank = [&](const ShotMode& m) {
                             return std::find(grid.modes.begin(), grid.modes.end(), m) - grid.modes.begin();
                         };
                         return rank(a.config.mode) < rank(b.config.mode);
                     });

    try {
        report.delta = delta_table(outcome.results, outcome.results.front(), grid.domains);
    } catch (const ConfigError& e) {
        report.aborted.push_back(std::string("delta table: ") + e.what());
    }
    report.similarity = similarity_table(outcome.results, grid.domains);
    for (const auto& result : outcome.results)
        report.configs.push_back(ConfigSummary{result.config.mode, result.config.domain, result.corpus_chrf,
                                               result.mean_example_similarity, result.failures});
    report.manifest = std::move(manifest);
    return outcome;
}

nlohmann::ordered_json report_to_json(const EvalReport& report)
{
    ordered_json json;
    json["schema_version"] = kReportSchemaVersion;
    json["lang"] = report.lang.to_string();
    json["baseline_chrf"] = report.baseline_chrf;
    json["domains"] = ordered_json::array();
    for (const Domain domain : report.domains)
        json["domains"].push_back(domain_key(domain));

    json["delta_table"] = ordered_json::array();
    for (const auto& row : report.delta) {
        ordered_json cells = ordered_json::object();
        for (const Domain domain : report.domains)
            if (const auto it = row.cells.find(domain); it != row.cells.end())
                cells[std::string(domain_key(domain))] = {{"percent", it->second.percent},
                                                          {"points", it->second.points},
                                                          {"display", format_delta_percent(it->second.percent)}};
        json["delta_table"].push_back({{"mode", row.mode.key()}, {"label", row.mode.label()}, {"cells", cells}});
    }

    json["similarity_table"] = ordered_json::array();
    for (const auto& row : report.similarity) {
        ordered_json cells = ordered_json::object();
        for (const Domain domain : report.domains)
            if (const auto it = row.cells.find(domain); it != row.cells.end())
                cells[std::string(domain_key(domain))] = {{"mean_chrf", it->second},
                                                          {"display", format_fixed(it->second, 1)}};
        json["similarity_table"].push_back(
            {{"mode", row.mode.key()}, {"label", row.mode.label()}, {"cells", cells}});
    }

    json["configs"] = ordered_json::array();
    for (const auto& config : report.configs)
        json["configs"].push_back({{"mode", config.mode.key()},
                                   {"domain", config.domain ? ordered_json(domain_key(*config.domain))
                                                            : ordered_json(nullptr)},
                                   {"corpus_chrf", config.corpus_chrf},
                                   {"mean_example_similarity", optional_number(config.mean_example_similarity)},
                                   {"failures", failures_json(config.failures)}});
    json["aborted"] = report.aborted;
    json["manifest"] = report.manifest;
    return json;
}

EvalReport report_from_json(const nlohmann::ordered_json& json)
{
    EvalReport report;
    try {
        if (json.at("schema_version").get<int>() != kReportSchemaVersion)
            throw ConfigError("unsupported report schema version");
        report.lang = LanguagePair::parse(json.at("lang").get<std::string>());
        report.baseline_chrf = json.at("baseline_chrf").get<double>();
        for (const auto& domain : json.at("domains"))
            report.domains.push_back(parse_domain(domain.get<std::string>()));
        for (const auto& row : json.at("delta_table")) {
            DeltaRow parsed{ShotMode::parse(row.at("mode").get<std::string>()), {}};
            for (const auto& [key, cell] : row.at("cells").items())
                parsed.cells[parse_domain(key)] = {cell.at("percent").get<double>(), cell.at("points").get<double>()};
            report.delta.push_back(std::move(parsed));
        }
        for (const auto& row : json.at("similarity_table")) {
            SimilarityRow parsed{ShotMode::parse(row.at("mode").get<std::string>()), {}};
            for (const auto& [key, cell] : row.at("cells").items())
                parsed.cells[parse_domain(key)] = cell.at("mean_chrf").get<double>();
            report.similarity.push_back(std::move(parsed));
        }
        for (const auto& config : json.at("configs")) {
            ConfigSummary summary;
            summary.mode = ShotMode::parse(config.at("mode").get<std::string>());
            if (!config.at("domain").is_null())
                summary.domain = parse_domain(config.at("domain").get<std::string>());
            summary.corpus_chrf = config.at("corpus_chrf").get<double>();
            if (!config.at("mean_example_similarity").is_null())
                summary.mean_example_similarity = config.at("mean_example_similarity").get<double>();
            const auto& f = config.at("failures");
            summary.failures = {f.at("ok").get<std::size_t>(), f.at("parse_failed").get<std::size_t>(),
                                f.at("transport_failed").get<std::size_t>(), f.at("shortfall").get<std::size_t>()};
            report.configs.push_back(summary);
        }
        report.aborted = json.at("aborted").get<std::vector<std::string>>();
        report.manifest = json.at("manifest");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed report: " + std::string(e.what()));
    }
    return report;
}

std::string render_markdown(const EvalReport& report)
{
    std::ostringstream md;
    const std::string pair_title = upper(report.lang.to_string());
    const auto header = [&](std::ostringstream& out) {
        out << "| " << pair_title << " |";
        for (const Domain domain : report.domains)
            out << ' ' << column_title(domain) << " |";
        out << "\n|:--|";
        for (std::size_t i = 0; i < report.domains.size(); ++i)
            out << "--:|";
        out << '\n';
    };

    md << "# Title translation evaluation (" << pair_title << ")\n\n";
    std::size_t segments = 0;
    if (report.manifest.contains("test_set"))
        segments = report.manifest["test_set"].value("segments", std::size_t{0});
    const std::string averaging =
        report.manifest.contains("chrf") ? report.manifest["chrf"].value("averaging", std::string("micro")) : "micro";
    md << "Baseline chrF: " << format_fixed(report.baseline_chrf, 2) << " (" << averaging << "-averaged, "
       << segments << " segments)\n\n";

    md << "## Delta chrF% against baseline generation\n\n";
    header(md);
    for (const auto& row : report.delta) {
        md << "| " << row.mode.label() << " |";
        for (const Domain domain : report.domains) {
            const auto it = row.cells.find(domain);
            md << ' ' << (it == row.cells.end() ? std::string("n/a") : format_delta_percent(it->second.percent))
               << " |";
        }
        md << '\n';
    }

    md << "\n## Delta chrF points against baseline generation\n\n";
    header(md);
    for (const auto& row : report.delta) {
        md << "| " << row.mode.label() << " |";
        for (const Domain domain : report.domains) {
            const auto it = row.cells.find(domain);
            md << ' ' << (it == row.cells.end() ? std::string("n/a") : format_delta_points(it->second.points))
               << " |";
        }
        md << '\n';
    }

    md << "\n## Textual similarity (chrF) between source titles and few-shot example sources\n\n";
    header(md);
    for (const auto& row : report.similarity) {
        md << "| " << row.mode.label() << " |";
        for (const Domain domain : report.domains) {
            const auto it = row.cells.find(domain);
            md << ' ' << (it == row.cells.end() ? std::string("n/a") : format_fixed(it->second, 1)) << " |";
        }
        md << '\n';
    }

    md << "\n## Configurations\n\n"
       << "| Mode | Domain | chrF | Example similarity | ok | parse_failed | transport_failed | shortfall |\n"
       << "|:--|:--|--:|--:|--:|--:|--:|--:|\n";
    for (const auto& config : report.configs) {
        md << "| " << config.mode.label() << " | " << domain_label(config.domain) << " | "
           << format_fixed(config.corpus_chrf, 2) << " | "
           << (config.mean_example_similarity ? format_fixed(*config.mean_example_similarity, 2) : "-") << " | "
           << config.failures.ok << " | " << config.failures.parse_failed << " | "
           << config.failures.transport_failed << " | " << config.failures.shortfall << " |\n";
    }

    if (!report.aborted.empty()) {
        md << "\n## Aborted\n\n";
        for (const auto& line : report.aborted)
            md << "- " << line << '\n';
    }

    md << "\n## Manifest\n\n```json\n" << report.manifest.dump(2) << "\n```\n";
    return md.str();
}

std::string segments_to_jsonl(std::span<const ConfigResult> results)
{
    std::string out;
    for (const auto& result : results) {
        for (const auto& segment : result.per_segment) {
            const auto& record = segment.record;
            ordered_json line;
            line["mode"] = result.config.mode.key();
            line["domain"] =
                result.config.domain ? ordered_json(domain_key(*result.config.domain)) : ordered_json(nullptr);
            line["segment"] = record.segment_index;
            line["seed"] = segment.seed;
            line["template"] = template_name(record.prompt.template_id);
            line["requested_k"] = record.prompt.requested_k;
            line["example_ids"] = record.prompt.example_ids;
            line["example_bm25"] = segment.example_bm25;
            line["example_similarity"] = optional_number(segment.example_similarity);
            line["status"] = status_name(record.status);
            line["attempts"] = record.attempts;
            line["translation"] = record.translation ? ordered_json(*record.translation) : ordered_json(nullptr);
            line["raw_response"] = record.raw_response;
            line["error"] = record.error;
            line["sentence_chrf"] = segment.sentence_chrf;
            out += line.dump();
            out += '\n';
        }
    }
    return out;
}

void write_reports(const GridOutcome& outcome, const std::filesystem::path& out_dir)
{
    std::filesystem::create_directories(out_dir);
    write_text(out_dir / "report.json", report_to_json(outcome.report).dump(2) + "\n");
    write_text(out_dir / "report.md", render_markdown(outcome.report));
    write_text(out_dir / "segments.jsonl", segments_to_jsonl(outcome.results));
}

}  // namespace ragmt
