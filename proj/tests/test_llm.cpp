#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

#include "golden_cases.hpp"
#include "httplib.h"
#include "json.hpp"
#include "oracles.hpp"
#include "ragmt/error.hpp"
#include "ragmt/llm.hpp"
#include "tempdir.hpp"

using namespace ragmt;
using ragmt::testutil::TempDir;

namespace {

RenderedPrompt prompt_for(std::string title, std::vector<PromptExample> examples = {})
{
    RenderedPrompt prompt;
    prompt.text = "PROMPT " + title;
    prompt.source_title = std::move(title);
    prompt.examples = std::move(examples);
    return prompt;
}

BackendConfig fast(BackendKind kind)
{
    BackendConfig config;
    config.kind = kind;
    config.backoff_ms = 1;
    return config;
}

/// Serves a fixed sequence of replies, then repeats the last one.
class SequenceBackend final : public Backend {
  public:
    explicit SequenceBackend(std::vector<std::optional<std::string>> replies) : replies_(std::move(replies)) {}
    std::string complete(const RenderedPrompt&) override
    {
        const auto i = std::min(calls++, replies_.size() - 1);
        if (!replies_[i])
            throw TransportError("down");
        return *replies_[i];
    }
    std::size_t calls = 0;

  private:
    std::vector<std::optional<std::string>> replies_;
};

/// Echoes the title after a random delay so completions arrive out of order.
class JitterBackend final : public Backend {
  public:
    bool concurrent() const noexcept override { return true; }
    std::string complete(const RenderedPrompt& prompt) override
    {
        thread_local std::mt19937_64 rng(std::hash<std::thread::id>{}(std::this_thread::get_id()));
        std::this_thread::sleep_for(std::chrono::microseconds(rng() % 3000));
        return nlohmann::json{{"translation", prompt.source_title}}.dump();
    }
};

class StubServer {
  public:
    explicit StubServer(std::function<void(const httplib::Request&, httplib::Response&)> handler)
    {
        server_.Post("/v1/chat/completions", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer()
    {
        server_.stop();
        thread_.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

  private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

std::string chat_reply(const std::string& content)
{
    return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

}  // namespace

TEST(ParseTranslation, PlainObject)
{
    EXPECT_EQ(parse_translation(R"({"translation": "KYB Stoßdämpfer, Teilenummer: 343441"})"),
              "KYB Stoßdämpfer, Teilenummer: 343441");
}

TEST(ParseTranslation, WrappedInProseAndFences)
{
    EXPECT_EQ(parse_translation("Sure! Here it is:\n```json\n{\"translation\": \"roter Becher\"}\n```\nThanks"),
              "roter Becher");
    EXPECT_EQ(parse_translation(R"(note {not json} then {"translation": "a } b"})"), "a } b");
    EXPECT_EQ(parse_translation(R"({"translation": "x", "notes": {"y": 1}})"), "x");
    EXPECT_EQ(parse_translation(R"({"translation": "Hülle \"Mandala\"\n"})"), "Hülle \"Mandala\"\n");
}

TEST(ParseTranslation, Failures)
{
    EXPECT_THROW(parse_translation("roter Becher"), ParseError);
    EXPECT_THROW(parse_translation(R"({"Translation": "x"})"), ParseError);
    EXPECT_THROW(parse_translation(R"({"translation": 5})"), ParseError);
    EXPECT_THROW(parse_translation(R"({"translation": "unterminated)"), ParseError);
    EXPECT_THROW(parse_translation(""), ParseError);
}

TEST(PromptHash, Sha256OfText)
{
    EXPECT_EQ(prompt_hash(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(prompt_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Mocks, EchoReturnsTitle)
{
    const Translator translator(fast(BackendKind::MockEcho));
    const auto record = translator.translate(prompt_for("Red Mug"), 3);
    EXPECT_EQ(record.status, TranslationStatus::Ok);
    EXPECT_EQ(record.translation, "Red Mug");
    EXPECT_EQ(record.segment_index, 3u);
    EXPECT_EQ(record.attempts, 1u);
}

TEST(Mocks, CopyBestPicksClosestExample)
{
    const Translator translator(fast(BackendKind::MockCopyBest));
    const auto prompt = prompt_for("KYB Shock Absorber 343441", {{"Monroe Shock Absorber G8018", "Monroe"},
                                                                 {"KYB Shock Absorber 343441", "KYB exact"},
                                                                 {"KYB Shock Absorber 343441", "KYB later"}});
    EXPECT_EQ(translator.translate(prompt).translation, "KYB exact");
    EXPECT_EQ(translator.translate(prompt_for("No examples")).translation, "No examples");
}

TEST(Mocks, CopyBestOnGoldenPrompt)
{
    const auto examples = golden::shock_examples();
    std::vector<PromptExample> shots;
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        shots.push_back({examples[i].src_text, examples[i].tgt_text});
        const double score = oracle::naive_chrf(examples[i].src_text, golden::kShockTitle);
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    const Translator translator(fast(BackendKind::MockCopyBest));
    const auto record = translator.translate(prompt_for(golden::kShockTitle, shots));
    ASSERT_TRUE(record.translation);
    EXPECT_EQ(*record.translation, examples[best].tgt_text);
}

TEST(Mocks, ScriptedFixture)
{
    TempDir dir;
    const auto a = prompt_for("A");
    const auto b = prompt_for("B");
    const auto c = prompt_for("C");
    std::ofstream(dir / "script.jsonl")
        << nlohmann::json{{"prompt_hash", prompt_hash(a.text)}, {"response", R"({"translation": "α"})"}}.dump() << "\n"
        << nlohmann::json{{"prompt_hash", prompt_hash(b.text)}, {"response", "I cannot help"}}.dump() << "\n";
    auto config = fast(BackendKind::MockScripted);
    config.script = dir / "script.jsonl";
    const Translator translator(config);

    EXPECT_EQ(translator.translate(a).translation, "α");

    const auto bad = translator.translate(b);
    EXPECT_EQ(bad.status, TranslationStatus::ParseFailed);
    EXPECT_FALSE(bad.translation);
    EXPECT_EQ(bad.raw_response, "I cannot help");
    EXPECT_EQ(bad.attempts, 2u);

    const auto missing = translator.translate(c);
    EXPECT_EQ(missing.status, TranslationStatus::TransportFailed);
    EXPECT_EQ(missing.attempts, 1u + static_cast<std::size_t>(config.max_retries));
}

TEST(TranslatorRetry, TransportRecovers)
{
    auto backend = std::make_unique<SequenceBackend>(
        std::vector<std::optional<std::string>>{std::nullopt, std::nullopt, R"({"translation": "ok"})"});
    auto* raw = backend.get();
    const Translator translator(fast(BackendKind::MockEcho), std::move(backend));
    const auto record = translator.translate(prompt_for("x"));
    EXPECT_EQ(record.status, TranslationStatus::Ok);
    EXPECT_EQ(record.attempts, 3u);
    EXPECT_EQ(raw->calls, 3u);
}

TEST(TranslatorRetry, ReaskOnceAfterParseFailure)
{
    auto backend = std::make_unique<SequenceBackend>(
        std::vector<std::optional<std::string>>{std::string("nope"), R"({"translation": "ok"})"});
    const Translator translator(fast(BackendKind::MockEcho), std::move(backend));
    const auto record = translator.translate(prompt_for("x"));
    EXPECT_EQ(record.status, TranslationStatus::Ok);
    EXPECT_EQ(record.attempts, 2u);
}

TEST(TranslatorRetry, GivesUpAfterMaxRetries)
{
    auto config = fast(BackendKind::MockEcho);
    config.max_retries = 2;
    auto backend = std::make_unique<SequenceBackend>(std::vector<std::optional<std::string>>{std::nullopt});
    auto* raw = backend.get();
    const Translator translator(config, std::move(backend));
    const auto record = translator.translate(prompt_for("x"));
    EXPECT_EQ(record.status, TranslationStatus::TransportFailed);
    EXPECT_EQ(raw->calls, 3u);
    EXPECT_FALSE(record.error.empty());
}

TEST(TranslatorBatch, OrderPreservedUnderParallelism)
{
    std::vector<RenderedPrompt> prompts;
    for (int i = 0; i < 64; ++i)
        prompts.push_back(prompt_for("title " + std::to_string(i)));
    for (std::size_t parallelism : {1u, 4u, 16u}) {
        auto config = fast(BackendKind::MockEcho);
        config.parallelism = parallelism;
        const Translator translator(config, std::make_unique<JitterBackend>());
        const auto records = translator.translate_batch(prompts);
        ASSERT_EQ(records.size(), prompts.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            EXPECT_EQ(records[i].segment_index, i);
            EXPECT_EQ(records[i].translation, prompts[i].source_title);
        }
    }
}

TEST(BackendConfigTest, ParsingAndValidation)
{
    const auto config = BackendConfig::from_json_text(
        R"({"kind": "http_chat", "endpoint": "http://localhost:1/v1/chat/completions", "model": "m",
            "api_key_env": "RAGMT_TEST_KEY", "timeout": 5, "max_retries": 1, "parallelism": 4})");
    EXPECT_EQ(config.kind, BackendKind::HttpChat);
    EXPECT_EQ(config.parallelism, 4u);
    EXPECT_EQ(config.timeout_seconds, 5.0);
    EXPECT_THROW(BackendConfig::from_json_text(R"({"kind": "mock_echo", "api_key": "sk-secret"})"), ConfigError);
    EXPECT_THROW(BackendConfig::from_json_text(R"({"kind": "http_chat"})"), ConfigError);
    EXPECT_THROW(BackendConfig::from_json_text(R"({"kind": "carrier_pigeon"})"), ConfigError);
    EXPECT_EQ(BackendConfig::from_spec("mock_copy_best").kind, BackendKind::MockCopyBest);
    EXPECT_EQ(config.to_json_text().find("sk-"), std::string::npos);
}

TEST(HttpChat, RoundTripAgainstStub)
{
    ::setenv("RAGMT_TEST_KEY", "test-key-123", 1);
    std::string seen_auth;
    nlohmann::json seen_body;
    StubServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = nlohmann::json::parse(req.body);
        res.set_content(chat_reply(R"({"translation": "roter Becher"})"), "application/json");
    });
    BackendConfig config = fast(BackendKind::HttpChat);
    config.endpoint = server.endpoint();
    config.model = "test-model";
    config.api_key_env = "RAGMT_TEST_KEY";
    config.timeout_seconds = 5;
    const Translator translator(config);
    const auto record = translator.translate(prompt_for("Red Mug"));
    EXPECT_EQ(record.status, TranslationStatus::Ok);
    EXPECT_EQ(record.translation, "roter Becher");
    EXPECT_EQ(seen_auth, "Bearer test-key-123");
    EXPECT_EQ(seen_body["model"], "test-model");
    EXPECT_EQ(seen_body["temperature"], 0.0);
    EXPECT_EQ(seen_body["messages"][0]["role"], "user");
    EXPECT_EQ(seen_body["messages"][0]["content"], "PROMPT Red Mug");
}

TEST(HttpChat, RetriesServerErrors)
{
    std::atomic<int> calls{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
        if (calls++ < 2) {
            res.status = 503;
            return;
        }
        res.set_content(chat_reply(R"({"translation": "ok"})"), "application/json");
    });
    BackendConfig config = fast(BackendKind::HttpChat);
    config.endpoint = server.endpoint();
    config.model = "m";
    config.timeout_seconds = 5;
    const auto record = Translator(config).translate(prompt_for("x"));
    EXPECT_EQ(record.status, TranslationStatus::Ok);
    EXPECT_EQ(record.attempts, 3u);
}

TEST(HttpChat, UnreachableEndpointIsTransportFailure)
{
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    BackendConfig config = fast(BackendKind::HttpChat);
    config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    config.model = "m";
    config.timeout_seconds = 1;
    config.max_retries = 1;
    const auto record = Translator(config).translate(prompt_for("x"));
    EXPECT_EQ(record.status, TranslationStatus::TransportFailed);
    EXPECT_EQ(record.attempts, 2u);
}

TEST(HttpChat, ParallelBatchKeepsOrder)
{
    StubServer server([](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        std::string content = body["messages"][0]["content"];
        std::this_thread::sleep_for(std::chrono::milliseconds(content.size() % 7));
        res.set_content(chat_reply(nlohmann::json{{"translation", content}}.dump()), "application/json");
    });
    BackendConfig config = fast(BackendKind::HttpChat);
    config.endpoint = server.endpoint();
    config.model = "m";
    config.parallelism = 4;
    config.timeout_seconds = 5;
    std::vector<RenderedPrompt> prompts;
    for (int i = 0; i < 24; ++i)
        prompts.push_back(prompt_for(std::string(static_cast<std::size_t>(i), 'x')));
    const auto records = Translator(config).translate_batch(prompts);
    for (std::size_t i = 0; i < records.size(); ++i)
        EXPECT_EQ(records[i].translation, prompts[i].text);
}

TEST(HttpChat, MissingKeyVariableIsConfigError)
{
    ::unsetenv("RAGMT_DEFINITELY_UNSET");
    BackendConfig config = fast(BackendKind::HttpChat);
    config.endpoint = "http://127.0.0.1:1/v1/chat/completions";
    config.model = "m";
    config.api_key_env = "RAGMT_DEFINITELY_UNSET";
    EXPECT_THROW(Translator{config}, ConfigError);
}
