// ragmt: build BM25 indexes over bilingual product data, retrieve few-shot
// examples, translate through a pluggable LLM backend and evaluate with chrF.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ragmt/corpus.hpp"
#include "ragmt/error.hpp"
#include "ragmt/harness.hpp"
#include "ragmt/llm.hpp"
#include "ragmt/prompting.hpp"
#include "ragmt/retrieval.hpp"
#include "ragmt/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSetup = 1;
constexpr int kExitTranslation = 2;
constexpr int kJsonSchemaVersion = 1;

struct BuildIndexArgs {
    std::string corpus;
    std::string format = "jsonl";
    std::string lang;
    std::string domain;
    std::string out;
    double k1 = 1.2;
    double b = 0.75;
    bool strict = false;
};

struct AddArgs {
    std::string index;
    std::string pairs;
    std::string format = "jsonl";
    bool strict = false;
};

struct SearchArgs {
    std::string index;
    std::string query;
    std::size_t k = 5;
    bool json = false;
};

struct TranslateArgs {
    std::string index;
    std::string title;
    std::string mode = "baseline";
    std::size_t k = 5;
    std::string backend = "mock_echo";
    std::string lang;
    std::uint64_t seed = 0;
    bool show_prompt = false;
    bool json = false;
};

struct EvaluateArgs {
    std::string grid;
    std::string out;
};

struct ReportArgs {
    std::string in;
    std::string format = "md";
};

void print_warnings(const ragmt::Corpus& corpus)
{
    for (const auto& warning : corpus.warnings())
        std::cerr << "warning: " << warning << '\n';
    for (const auto& bad : corpus.malformed())
        std::cerr << "warning: line " << bad.line_number << ": " << bad.reason << '\n';
}

int cmd_build_index(const BuildIndexArgs& args)
{
    const auto lang = ragmt::LanguagePair::parse(args.lang);
    const auto domain = ragmt::parse_domain(args.domain);
    const auto corpus = ragmt::ingest_pairs(args.corpus, ragmt::parse_file_format(args.format), lang,
                                            {args.strict});
    print_warnings(corpus);
    const auto pool = corpus.filter(domain);
    const auto index = ragmt::build_index(pool, lang, domain, {args.k1, args.b});
    ragmt::save_index(index, args.out);
    std::cout << "n_docs=" << index.n_docs() << " avg_doc_len=" << index.avg_doc_len() << '\n';
    return kExitOk;
}

int cmd_add(const AddArgs& args)
{
    auto index = ragmt::load_index(args.index);
    const auto corpus = ragmt::ingest_pairs(args.pairs, ragmt::parse_file_format(args.format), index.lang(),
                                            {args.strict});
    print_warnings(corpus);
    std::uint32_t next_id = 0;
    for (const auto& pair : index.store())
        next_id = std::max(next_id, pair.id + 1);
    std::size_t added = 0;
    std::size_t skipped = 0;
    for (auto pair : corpus.pairs()) {
        if (!ragmt::domain_matches(index.domain(), pair.domain)) {
            ++skipped;
            continue;
        }
        pair.id = next_id++;
        index.add(pair);
        ++added;
    }
    ragmt::save_index(index, args.index);
    if (skipped > 0)
        std::cerr << "warning: skipped " << skipped << " pair(s) outside domain "
                  << ragmt::domain_tag(index.domain()) << '\n';
    std::cout << "added=" << added << " n_docs=" << index.n_docs() << " avg_doc_len=" << index.avg_doc_len()
              << '\n';
    return kExitOk;
}

int cmd_search(const SearchArgs& args)
{
    const auto index = ragmt::load_index(args.index);
    const auto hits = index.search(args.query, args.k);
    if (args.json) {
        nlohmann::ordered_json out;
        out["schema_version"] = kJsonSchemaVersion;
        out["query"] = args.query;
        out["k"] = args.k;
        out["hits"] = nlohmann::ordered_json::array();
        for (const auto& hit : hits)
            out["hits"].push_back({{"rank", hit.rank},
                                   {"score", hit.score},
                                   {"doc_id", hit.doc_id},
                                   {"id", hit.pair.id},
                                   {"domain", ragmt::domain_tag(hit.pair.domain)},
                                   {"src", hit.pair.src_text},
                                   {"tgt", hit.pair.tgt_text}});
        std::cout << out.dump() << '\n';
        return kExitOk;
    }
    for (const auto& hit : hits)
        std::cout << hit.rank << '\t' << hit.score << '\t' << hit.pair.src_text << '\t' << hit.pair.tgt_text
                  << '\n';
    return kExitOk;
}

int cmd_translate(const TranslateArgs& args)
{
    const auto mode_kind = ragmt::ShotMode::parse(args.mode == "baseline" ? args.mode
                                                                            : args.mode + std::to_string(args.k));
    std::optional<ragmt::RetrievalIndex> index;
    if (!args.index.empty())
        index = ragmt::load_index(args.index);
    if (mode_kind.kind != ragmt::ShotMode::Kind::Baseline && !index)
        throw ragmt::ConfigError("--mode " + args.mode + " needs --index");
    if (!index && args.lang.empty())
        throw ragmt::ConfigError("baseline translation without --index needs --lang");
    const auto lang = args.lang.empty() ? index->lang() : ragmt::LanguagePair::parse(args.lang);

    ragmt::ExampleSource source;
    source.index = index ? &*index : nullptr;
    source.domain = index ? index->domain() : ragmt::Domain::TBD;
    const auto examples = ragmt::select_examples(mode_kind, source, args.title, args.seed);
    const ragmt::LanguageNames names;
    auto prompt = ragmt::render_prompt(args.title, lang, names, examples, mode_kind.k);
    if (mode_kind.kind == ragmt::ShotMode::Kind::Rand)
        prompt.seed = args.seed;

    const ragmt::Translator translator(ragmt::BackendConfig::from_spec(args.backend));
    const auto record = translator.translate(prompt);

    if (args.json) {
        nlohmann::ordered_json out;
        out["schema_version"] = kJsonSchemaVersion;
        out["status"] = ragmt::status_name(record.status);
        out["translation"] = record.translation ? nlohmann::ordered_json(*record.translation)
                                                : nlohmann::ordered_json(nullptr);
        out["template"] = ragmt::template_name(prompt.template_id);
        out["example_ids"] = prompt.example_ids;
        out["requested_k"] = prompt.requested_k;
        out["attempts"] = record.attempts;
        out["raw_response"] = record.raw_response;
        if (args.show_prompt)
            out["prompt"] = prompt.text;
        std::cout << out.dump() << '\n';
    } else {
        if (args.show_prompt)
            std::cout << prompt.text << "\n\n";
        if (record.translation)
            std::cout << *record.translation << '\n';
    }
    if (prompt.examples.size() < prompt.requested_k)
        std::cerr << "note: retrieved " << prompt.examples.size() << " of " << prompt.requested_k
                  << " requested examples\n";
    if (record.status != ragmt::TranslationStatus::Ok) {
        std::cerr << "error: " << ragmt::status_name(record.status) << ": " << record.error << '\n';
        std::cerr << "raw response: " << record.raw_response << '\n';
        return kExitTranslation;
    }
    return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& args)
{
    const auto grid = ragmt::GridConfig::load(args.grid);
    const auto outcome = ragmt::run_grid(grid);
    ragmt::write_reports(outcome, args.out);
    std::cout << "baseline chrF " << outcome.report.baseline_chrf << "; reports written to " << args.out << '\n';
    for (const auto& aborted : outcome.report.aborted)
        std::cerr << "aborted: " << aborted << '\n';
    return outcome.ok() ? kExitOk : kExitSetup;
}

int cmd_report(const ReportArgs& args)
{
    std::filesystem::path path(args.in);
    if (std::filesystem::is_directory(path))
        path /= "report.json";
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ragmt::ConfigError("cannot read " + path.string());
    const auto report = ragmt::report_from_json(nlohmann::ordered_json::parse(in));
    if (args.format == "json")
        std::cout << ragmt::report_to_json(report).dump(2) << '\n';
    else
        std::cout << ragmt::render_markdown(report);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ragmt - retrieval-augmented few-shot prompting for product title translation"};
    app.set_version_flag("--version", std::string(ragmt::kVersion));
    app.set_config("--config", "", "TOML/INI file with option defaults; command-line flags win");
    app.require_subcommand(1);

    BuildIndexArgs build;
    auto* build_cmd = app.add_subcommand("build-index", "Index the source side of a bilingual corpus");
    build_cmd->add_option("--corpus", build.corpus, "Bilingual pairs file")->required();
    build_cmd->add_option("--format", build.format, "jsonl or tsv")->capture_default_str();
    build_cmd->add_option("--lang", build.lang, "Language pair, e.g. en-de")->required();
    build_cmd->add_option("--domain", build.domain, "ttl, bp, pd or tbd")->required();
    build_cmd->add_option("--out", build.out, "Index directory")->required();
    build_cmd->add_option("--k1", build.k1, "BM25 k1")->capture_default_str();
    build_cmd->add_option("--b", build.b, "BM25 b")->capture_default_str();
    build_cmd->add_flag("--strict", build.strict, "Fail on the first malformed line");

    AddArgs add;
    auto* add_cmd = app.add_subcommand("add", "Append bilingual pairs to an existing index");
    add_cmd->add_option("--index", add.index, "Index directory")->required();
    add_cmd->add_option("--pairs", add.pairs, "Bilingual pairs file")->required();
    add_cmd->add_option("--format", add.format, "jsonl or tsv")->capture_default_str();
    add_cmd->add_flag("--strict", add.strict, "Fail on the first malformed line");

    SearchArgs search;
    auto* search_cmd = app.add_subcommand("search", "Top-k BM25 retrieval");
    search_cmd->add_option("--index", search.index, "Index directory")->required();
    search_cmd->add_option("--query", search.query, "Query text")->required();
    search_cmd->add_option("--k", search.k, "Number of hits")->capture_default_str()->check(CLI::PositiveNumber);
    search_cmd->add_flag("--json", search.json, "Emit JSON");

    TranslateArgs translate;
    auto* translate_cmd = app.add_subcommand("translate", "Translate one title");
    translate_cmd->add_option("--index", translate.index, "Index directory (required for rand/rag)");
    translate_cmd->add_option("--title", translate.title, "Source title")->required();
    translate_cmd->add_option("--mode", translate.mode, "baseline, rand or rag")
        ->capture_default_str()
        ->check(CLI::IsMember({"baseline", "rand", "rag"}));
    translate_cmd->add_option("--k", translate.k, "Number of shots")->capture_default_str()->check(CLI::PositiveNumber);
    translate_cmd->add_option("--backend", translate.backend, "mock_echo, mock_copy_best or a backend JSON file")
        ->capture_default_str();
    translate_cmd->add_option("--lang", translate.lang, "Language pair when no index is given");
    translate_cmd->add_option("--seed", translate.seed, "Seed for rand mode")->capture_default_str();
    translate_cmd->add_flag("--show-prompt", translate.show_prompt, "Print the rendered prompt");
    translate_cmd->add_flag("--json", translate.json, "Emit JSON");

    EvaluateArgs evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Run an experiment grid and write reports");
    evaluate_cmd->add_option("--grid", evaluate.grid, "Grid JSON file")->required();
    evaluate_cmd->add_option("--out", evaluate.out, "Report directory")->required();

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "Re-render a report.json");
    report_cmd->add_option("--in", report.in, "report.json or its directory")->required();
    report_cmd->add_option("--format", report.format, "md or json")
        ->capture_default_str()
        ->check(CLI::IsMember({"md", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitSetup;
    }

    for (const auto* sub : app.get_subcommands())
        std::cerr << "# effective configuration: " << sub->get_name() << '\n' << sub->config_to_str(true, false);

    try {
        if (*build_cmd)
            return cmd_build_index(build);
        if (*add_cmd)
            return cmd_add(add);
        if (*search_cmd)
            return cmd_search(search);
        if (*translate_cmd)
            return cmd_translate(translate);
        if (*evaluate_cmd)
            return cmd_evaluate(evaluate);
        if (*report_cmd)
            return cmd_report(report);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSetup;
    }
    return kExitSetup;
}
