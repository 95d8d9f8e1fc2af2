#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ragmt/prompting.hpp"

namespace ragmt {

enum class BackendKind { HttpChat, MockEcho, MockCopyBest, MockScripted };

std::string_view backend_kind_name(BackendKind kind) noexcept;
BackendKind parse_backend_kind(std::string_view text);

struct BackendConfig {
    BackendKind kind = BackendKind::MockEcho;
    std::string endpoint;     // http_chat: full URL of the chat-completions route
    std::string model;        // http_chat
    std::string api_key_env;  // name of the environment variable holding the key
    double timeout_seconds = 60.0;
    int max_retries = 3;
    std::size_t parallelism = 1;
    double temperature = 0.0;
    int backoff_ms = 500;  // first retry delay; doubles per attempt
    std::filesystem::path script;  // mock_scripted: JSONL of {prompt_hash, response}

    /// Throws ConfigError when a required field is missing or out of range.
    void validate() const;

    /// JSON object with keys kind, endpoint, model, api_key_env, timeout, max_retries,
    /// parallelism, temperature, backoff_ms, script. Relative script paths resolve
    /// against `base_dir`.
    static BackendConfig from_json_text(std::string_view text,
                                        const std::filesystem::path& base_dir = {});
    /// A bare kind name ("mock_echo") or a path to a JSON backend file, relative
    /// paths taken from `base_dir` when given.
    static BackendConfig from_spec(std::string_view spec, const std::filesystem::path& base_dir = {});
    /// Effective configuration without secrets.
    std::string to_json_text() const;
};

enum class TranslationStatus { Ok, ParseFailed, TransportFailed };

std::string_view status_name(TranslationStatus status) noexcept;

struct TranslationRecord {
    std::size_t segment_index = 0;
    RenderedPrompt prompt;
    std::string raw_response;
    std::optional<std::string> translation;  // present iff status == Ok
    TranslationStatus status = TranslationStatus::TransportFailed;
    std::size_t attempts = 0;
    std::string error;
};

/// Extracts the "translation" string of the first balanced JSON object in `raw`.
/// Throws ParseError when there is no object, the key is missing (the key is
/// case-sensitive), or the value is not a string.
std::string parse_translation(std::string_view raw);

/// Lowercase hex SHA-256 of the prompt text; keys scripted-mock fixtures.
std::string prompt_hash(std::string_view prompt_text);

/// One request/response exchange. Implementations throw TransportError.
class Backend {
  public:
    virtual ~Backend() = default;
    virtual std::string complete(const RenderedPrompt& prompt) = 0;
    /// Mocks are answered inline; only real transports use worker threads.
    virtual bool concurrent() const noexcept { return false; }
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

/// Translation client: retries transport failures with exponential backoff, re-asks
/// once on a parse failure, and never throws for per-prompt failures.
/// Safe to share across threads.
class Translator {
  public:
    explicit Translator(BackendConfig config);
    Translator(BackendConfig config, std::unique_ptr<Backend> backend);
    ~Translator();

    TranslationRecord translate(const RenderedPrompt& prompt, std::size_t segment_index = 0) const;

    /// Results come back in input order whatever the completion order.
    std::vector<TranslationRecord> translate_batch(std::span<const RenderedPrompt> prompts) const;

    const BackendConfig& config() const noexcept { return config_; }

  private:
    BackendConfig config_;
    std::unique_ptr<Backend> backend_;
};

inline TranslationRecord translate(const RenderedPrompt& prompt, const BackendConfig& config)
{
    return Translator(config).translate(prompt);
}

}  // namespace ragmt
