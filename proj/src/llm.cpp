#include "ragmt/llm.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "httplib.h"
#include "json.hpp"
#include "ragmt/checksum.hpp"
#include "ragmt/error.hpp"
#include "ragmt/metrics.hpp"

namespace ragmt {
namespace {

std::string translation_json(std::string_view text)
{
    return nlohmann::json{{"translation", std::string(text)}}.dump();
}

class EchoBackend final : public Backend {
  public:
    std::string complete(const RenderedPrompt& prompt) override
    {
        return translation_json(prompt.source_title);
    }
};

/// Copies the target of the example whose source is closest (chrF) to the title;
/// the first such example wins ties. Without examples the title comes back unchanged.
class CopyBestBackend final : public Backend {
  public:
    std::string complete(const RenderedPrompt& prompt) override
    {
        if (prompt.examples.empty())
            return translation_json(prompt.source_title);
        std::size_t best = 0;
        double best_score = -1.0;
        for (std::size_t i = 0; i < prompt.examples.size(); ++i) {
            const double score = chrf_sentence(prompt.examples[i].src, prompt.source_title);
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        return translation_json(prompt.examples[best].tgt);
    }
};

class ScriptedBackend final : public Backend {
  public:
    explicit ScriptedBackend(const std::filesystem::path& script)
    {
        std::ifstream in(script, std::ios::binary);
        if (!in)
            throw ConfigError("cannot read scripted backend fixture " + script.string());
        std::string line;
        std::size_t line_number = 0;
        while (std::getline(in, line)) {
            ++line_number;
            if (line.empty())
                continue;
            try {
                const auto record = nlohmann::json::parse(line);
                responses_.insert_or_assign(record.at("prompt_hash").get<std::string>(),
                                            record.at("response").get<std::string>());
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(script.string() + ":" + std::to_string(line_number) + ": " + e.what());
            }
        }
    }

    std::string complete(const RenderedPrompt& prompt) override
    {
        const auto hash = prompt_hash(prompt.text);
        const auto it = responses_.find(hash);
        if (it == responses_.end())
            throw TransportError("scripted backend has no response for prompt " + hash);
        return it->second;
    }

  private:
    std::unordered_map<std::string, std::string> responses_;
};

/// Single-turn chat-completion POST: {model, messages: [{role: user, content}], temperature}.
/// The reply is read from choices[0].message.content.
class HttpChatBackend final : public Backend {
  public:
    explicit HttpChatBackend(const BackendConfig& config) : config_(config)
    {
        static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
        std::smatch match;
        if (!std::regex_match(config.endpoint, match, url))
            throw ConfigError("http_chat endpoint must be an http(s) URL: '" + config.endpoint + "'");
        origin_ = match[1].str();
        path_ = match[2].matched ? match[2].str() : "/";
        if (!config.api_key_env.empty()) {
            const char* key = std::getenv(config.api_key_env.c_str());
            if (key == nullptr)
                throw ConfigError("environment variable " + config.api_key_env + " is not set");
            api_key_ = key;
        }
    }

    bool concurrent() const noexcept override { return true; }

    std::string complete(const RenderedPrompt& prompt) override
    {
        nlohmann::json body{{"model", config_.model},
                            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt.text}}})},
                            {"temperature", config_.temperature}};

        httplib::Client client(origin_);
        const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        httplib::Headers headers;
        if (!api_key_.empty())
            headers.emplace("Authorization", "Bearer " + api_key_);

        const auto result = client.Post(path_, headers, body.dump(), "application/json");
        if (!result)
            throw TransportError("request failed: " + httplib::to_string(result.error()));
        if (result->status != 200)
            throw TransportError("HTTP " + std::to_string(result->status));
        try {
            const auto reply = nlohmann::json::parse(result->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw TransportError("unexpected chat-completion response: " + std::string(e.what()));
        }
    }

  private:
    BackendConfig config_;
    std::string origin_;
    std::string path_;
    std::string api_key_;
};

/// End of the balanced {...} starting at `open`, honouring JSON strings; npos if unbalanced.
std::size_t balanced_end(std::string_view text, std::size_t open)
{
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}' && --depth == 0) {
            return i;
        }
    }
    return std::string_view::npos;
}

}  // namespace

std::string_view backend_kind_name(BackendKind kind) noexcept
{
    switch (kind) {
        case BackendKind::HttpChat: return "http_chat";
        case BackendKind::MockEcho: return "mock_echo";
        case BackendKind::MockCopyBest: return "mock_copy_best";
        case BackendKind::MockScripted: return "mock_scripted";
    }
    return "?";
}

BackendKind parse_backend_kind(std::string_view text)
{
    for (auto kind : {BackendKind::HttpChat, BackendKind::MockEcho, BackendKind::MockCopyBest,
                      BackendKind::MockScripted})
        if (backend_kind_name(kind) == text)
            return kind;
    throw ConfigError("unknown backend kind '" + std::string(text) + "'");
}

void BackendConfig::validate() const
{
    if (kind == BackendKind::HttpChat && (endpoint.empty() || model.empty()))
        throw ConfigError("http_chat backend needs both endpoint and model");
    if (kind == BackendKind::MockScripted && script.empty())
        throw ConfigError("mock_scripted backend needs a script fixture");
    if (!(timeout_seconds > 0.0))
        throw ConfigError("backend timeout must be positive");
    if (max_retries < 0 || max_retries > 10)
        throw ConfigError("backend max_retries must be in [0, 10]");
    if (parallelism < 1)
        throw ConfigError("backend parallelism must be at least 1");
    if (backoff_ms < 0)
        throw ConfigError("backend backoff_ms must be >= 0");
}

BackendConfig BackendConfig::from_json_text(std::string_view text, const std::filesystem::path& base_dir)
{
    BackendConfig config;
    try {
        const auto json = nlohmann::json::parse(text);
        config.kind = parse_backend_kind(json.at("kind").get<std::string>());
        config.endpoint = json.value("endpoint", config.endpoint);
        config.model = json.value("model", config.model);
        config.api_key_env = json.value("api_key_env", config.api_key_env);
        config.timeout_seconds = json.value("timeout", config.timeout_seconds);
        config.max_retries = json.value("max_retries", config.max_retries);
        config.parallelism = json.value("parallelism", config.parallelism);
        config.temperature = json.value("temperature", config.temperature);
        config.backoff_ms = json.value("backoff_ms", config.backoff_ms);
        if (json.contains("api_key"))
            throw ConfigError("API keys are read from the environment only; use api_key_env");
        if (json.contains("script")) {
            std::filesystem::path script = json.at("script").get<std::string>();
            config.script = script.is_relative() && !base_dir.empty() ? base_dir / script : script;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid backend config: " + std::string(e.what()));
    }
    config.validate();
    return config;
}

BackendConfig BackendConfig::from_spec(std::string_view spec, const std::filesystem::path& base_dir)
{
    for (auto kind : {BackendKind::MockEcho, BackendKind::MockCopyBest})
        if (backend_kind_name(kind) == spec) {
            BackendConfig config;
            config.kind = kind;
            return config;
        }
    std::filesystem::path path(spec);
    if (path.is_relative() && !base_dir.empty())
        path = base_dir / path;
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("backend '" + std::string(spec) +
                          "' is neither mock_echo, mock_copy_best nor a readable config file");
    std::ostringstream text;
    text << in.rdbuf();
    return from_json_text(text.str(), path.parent_path());
}

std::string BackendConfig::to_json_text() const
{
    nlohmann::ordered_json json{{"kind", backend_kind_name(kind)},
                                {"endpoint", endpoint},
                                {"model", model},
                                {"api_key_env", api_key_env},
                                {"timeout", timeout_seconds},
                                {"max_retries", max_retries},
                                {"parallelism", parallelism},
                                {"temperature", temperature},
                                {"backoff_ms", backoff_ms},
                                {"script", script.string()}};
    return json.dump();
}

std::string_view status_name(TranslationStatus status) noexcept
{
    switch (status) {
        case TranslationStatus::Ok: return "ok";
        case TranslationStatus::ParseFailed: return "parse_failed";
        case TranslationStatus::TransportFailed: return "transport_failed";
    }
    return "?";
}

std::string parse_translation(std::string_view raw)
{
    for (auto open = raw.find('{'); open != std::string_view::npos; open = raw.find('{', open + 1)) {
        const auto close = balanced_end(raw, open);
        if (close == std::string_view::npos)
            continue;
        const auto object = nlohmann::json::parse(raw.substr(open, close - open + 1), nullptr, false);
        if (object.is_discarded() || !object.is_object())
            continue;
        const auto it = object.find("translation");
        if (it == object.end())
            throw ParseError("JSON object has no \"translation\" key");
        if (!it->is_string())
            throw ParseError("\"translation\" value is not a string");
        return it->get<std::string>();
    }
    throw ParseError("no JSON object in response");
}

std::string prompt_hash(std::string_view prompt_text) { return sha256_hex(prompt_text); }

std::unique_ptr<Backend> make_backend(const BackendConfig& config)
{
    config.validate();
    switch (config.kind) {
        case BackendKind::HttpChat: return std::make_unique<HttpChatBackend>(config);
        case BackendKind::MockEcho: return std::make_unique<EchoBackend>();
        case BackendKind::MockCopyBest: return std::make_unique<CopyBestBackend>();
        case BackendKind::MockScripted: return std::make_unique<ScriptedBackend>(config.script);
    }
    throw ConfigError("unsupported backend");
}

Translator::Translator(BackendConfig config) : config_(std::move(config)), backend_(make_backend(config_)) {}

Translator::Translator(BackendConfig config, std::unique_ptr<Backend> backend)
    : config_(std::move(config)), backend_(std::move(backend))
{
    config_.validate();
}

Translator::~Translator() = default;

TranslationRecord Translator::translate(const RenderedPrompt& prompt, std::size_t segment_index) const
{
    TranslationRecord record;
    record.segment_index = segment_index;
    record.prompt = prompt;

    int transport_retries = 0;
    bool reasked = false;
    while (true) {
        ++record.attempts;
        try {
            record.raw_response = backend_->complete(prompt);
        } catch (const TransportError& e) {
            record.error = e.what();
            if (transport_retries >= config_.max_retries) {
                record.status = TranslationStatus::TransportFailed;
                return record;
            }
            const auto delay = std::chrono::milliseconds(config_.backoff_ms) * (1LL << transport_retries);
            ++transport_retries;
            std::this_thread::sleep_for(delay);
            continue;
        }
        try {
            record.translation = parse_translation(record.raw_response);
            record.status = TranslationStatus::Ok;
            record.error.clear();
            return record;
        } catch (const ParseError& e) {
            record.error = e.what();
            if (reasked) {
                record.status = TranslationStatus::ParseFailed;
                return record;
            }
            reasked = true;
        }
    }
}

std::vector<TranslationRecord> Translator::translate_batch(std::span<const RenderedPrompt> prompts) const
{
    std::vector<TranslationRecord> records(prompts.size());
    const std::size_t workers = std::min(config_.parallelism, prompts.size());
    if (!backend_->concurrent() || workers <= 1) {
        for (std::size_t i = 0; i < prompts.size(); ++i)
            records[i] = translate(prompts[i], i);
        return records;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < prompts.size(); i = next++)
                    records[i] = translate(prompts[i], i);
            });
    }
    return records;
}

}  // namespace ragmt
