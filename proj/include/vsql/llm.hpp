#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "vsql/error.hpp"

namespace vsql::llm {

enum class TemplateId { view_creation, dummy_generation, reconstruction };

const char* to_string(TemplateId id) noexcept;

struct PromptTemplate {
  TemplateId id = TemplateId::dummy_generation;
  std::string body;  // `{name}` placeholders, name = [A-Za-z_][A-Za-z0-9_]*

  // Distinct placeholder names in order of first appearance.
  std::vector<std::string> placeholders() const;
};

// The three templates of one variant ("cleaned" or "paper-verbatim").
struct TemplateSet {
  std::string variant;
  PromptTemplate view_creation;
  PromptTemplate dummy_generation;
  PromptTemplate reconstruction;

  const PromptTemplate& get(TemplateId id) const;
};

inline constexpr const char* kDefaultTemplateVariant = "cleaned";

std::vector<std::string> builtin_template_variants();
TemplateSet builtin_templates(std::string_view variant = kDefaultTemplateVariant);
// Reads view_creation.txt, dummy_generation.txt and reconstruction.txt.
TemplateSet load_templates(const std::string& directory);

struct Demonstration {
  std::string input;
  std::string output_sql;
};

// Empty = zero-shot, which is the default everywhere.
struct FewShotSet {
  std::vector<Demonstration> demonstrations;
};

using Bindings = std::map<std::string, std::string>;

// Single-pass substitution: text inside bindings is never re-expanded.
// Demonstrations, if any, go right before the section holding {query} (or
// before the last section when there is no {query}). Throws ValidationError
// naming the first unbound placeholder.
std::string render_prompt(const PromptTemplate& tmpl, const Bindings& bindings, const FewShotSet& few_shot = {});

// First ```sql fenced block (two-backtick fences are accepted too); else
// the text from the first SELECT/CREATE/WITH keyword with trailing prose
// dropped. Throws GatewayError(no_sql) when neither exists.
std::string extract_sql(std::string_view completion);

std::string wrap_in_fence(std::string_view sql);

// Lower-case hex SHA-256 of the prompt bytes; the mock's lookup key.
std::string prompt_digest(std::string_view prompt);

struct GenerationSettings {
  std::string model_id = "gpt-4";
  double temperature = 0.0;
  double top_p = 1.0;
  std::size_t max_tokens = 800;
};

class GatewayError : public Error {
 public:
  enum class Reason { transient, auth, context_overflow, exhausted, bad_response, no_sql, missing_completion };

  GatewayError(Reason reason, const std::string& message) : Error(ErrorKind::gateway, message), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

struct Completion {
  std::string text;
  std::optional<std::size_t> prompt_tokens;
  std::optional<std::size_t> completion_tokens;
};

// One chat-completion endpoint. Implementations throw GatewayError; only
// Reason::transient is retried.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual Completion complete(const std::string& prompt, const GenerationSettings& settings) = 0;
  virtual std::string name() const = 0;
};

// Replays {prompt_digest, completion} JSONL. Gateway transcripts carry both
// fields, so a recorded run can be replayed as is.
class MockProvider : public Provider {
 public:
  static std::shared_ptr<MockProvider> from_file(const std::string& path);
  static std::shared_ptr<MockProvider> from_text(std::string_view jsonl);

  void add(std::string_view prompt, std::string completion);
  std::size_t size() const;

  Completion complete(const std::string& prompt, const GenerationSettings& settings) override;
  std::string name() const override { return "mock"; }

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> by_digest_;
};

inline constexpr const char* kApiKeyEnv = "VSQL_API_KEY";

// OpenAI-compatible POST {base_url}/chat/completions.
class HttpProvider : public Provider {
 public:
  // Reads the key from kApiKeyEnv; an unset key fails at the first request,
  // before anything is sent.
  explicit HttpProvider(std::string base_url, std::optional<std::string> api_key = std::nullopt,
                        std::chrono::seconds timeout = std::chrono::seconds(120));

  Completion complete(const std::string& prompt, const GenerationSettings& settings) override;
  std::string name() const override { return "http"; }

 private:
  std::string base_url_;
  std::optional<std::string> api_key_;
  std::chrono::seconds timeout_;
};

struct ChatExchange {
  std::string purpose;  // template id, or free text for ad-hoc calls
  std::string rendered_prompt;
  GenerationSettings settings;
  std::string raw_completion;
  std::optional<std::string> extracted_sql;
  std::chrono::milliseconds latency{0};
  std::optional<std::size_t> prompt_tokens;
  std::optional<std::size_t> completion_tokens;
  std::size_t retries = 0;
};

struct GatewayOptions {
  GenerationSettings settings;
  std::size_t max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};  // doubled per retry
  std::size_t concurrency = 4;
  std::string transcript_path;  // empty: no transcript
  bool record_latency = false;  // latency in the transcript breaks byte-identical reruns
};

class Gateway {
 public:
  Gateway(std::shared_ptr<Provider> provider, GatewayOptions options = {},
          TemplateSet templates = builtin_templates());

  // Retries transient failures with exponential backoff, appends the
  // exchange to the transcript. extracted_sql is left empty when the
  // completion holds no SQL; callers decide whether that is fatal.
  ChatExchange complete(const std::string& prompt, std::string_view purpose = {});

  ChatExchange complete(TemplateId id, const Bindings& bindings, const FewShotSet& few_shot = {});

  const TemplateSet& templates() const { return templates_; }
  const GatewayOptions& options() const { return options_; }
  Provider& provider() { return *provider_; }

 private:
  void append_transcript(const ChatExchange& exchange);

  std::shared_ptr<Provider> provider_;
  GatewayOptions options_;
  TemplateSet templates_;
  std::counting_semaphore<> slots_;
  std::mutex transcript_mu_;
};

}  // namespace vsql::llm
