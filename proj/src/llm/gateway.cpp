#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "vsql/identifiers.hpp"
#include "vsql/llm.hpp"

namespace vsql::llm {

std::shared_ptr<MockProvider> MockProvider::from_text(std::string_view jsonl) {
  auto mock = std::make_shared<MockProvider>();
  std::size_t line_no = 0, at = 0;
  while (at <= jsonl.size()) {
    auto nl = jsonl.find('\n', at);
    if (nl == std::string_view::npos) nl = jsonl.size();
    const auto line = jsonl.substr(at, nl - at);
    ++line_no;
    at = nl + 1;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed mock transcript line: ") + e.what(), at, line_no, e.byte);
    }
    if (!j.is_object() || !j.contains("prompt_digest") || !j.contains("completion") ||
        !j["prompt_digest"].is_string() || !j["completion"].is_string()) {
      throw ValidationError("mock transcript line " + std::to_string(line_no) +
                            ": expected string fields 'prompt_digest' and 'completion'");
    }
    // Later lines win, so a transcript can be patched by appending.
    mock->by_digest_[j["prompt_digest"].get<std::string>()] = j["completion"].get<std::string>();
  }
  return mock;
}

std::shared_ptr<MockProvider> MockProvider::from_file(const std::string& path) {
  if (!std::filesystem::exists(path)) throw IoError("mock transcript not found: " + path);
  return from_text(read_file(path));
}

void MockProvider::add(std::string_view prompt, std::string completion) {
  std::lock_guard lock(mu_);
  by_digest_[prompt_digest(prompt)] = std::move(completion);
}

std::size_t MockProvider::size() const {
  std::lock_guard lock(mu_);
  return by_digest_.size();
}

Completion MockProvider::complete(const std::string& prompt, const GenerationSettings&) {
  const auto digest = prompt_digest(prompt);
  std::lock_guard lock(mu_);
  const auto it = by_digest_.find(digest);
  if (it == by_digest_.end()) {
    throw GatewayError(GatewayError::Reason::missing_completion,
                       "mock transcript has no completion for prompt digest " + digest);
  }
  return Completion{it->second, std::nullopt, std::nullopt};
}

Gateway::Gateway(std::shared_ptr<Provider> provider, GatewayOptions options, TemplateSet templates)
    : provider_(std::move(provider)),
      options_(std::move(options)),
      templates_(std::move(templates)),
      slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options_.concurrency))) {
  if (!provider_) throw ConfigError("gateway needs a provider");
  if (options_.max_attempts == 0) throw ConfigError("gateway max_attempts must be positive");
  if (options_.settings.max_tokens == 0) throw ConfigError("max_tokens must be positive");
}

ChatExchange Gateway::complete(const std::string& prompt, std::string_view purpose) {
  ChatExchange ex;
  ex.purpose = purpose;
  ex.rendered_prompt = prompt;
  ex.settings = options_.settings;

  const auto start = std::chrono::steady_clock::now();
  auto backoff = options_.initial_backoff;
  for (std::size_t attempt = 1;; ++attempt) {
    try {
      slots_.acquire();
      Completion c;
      try {
        c = provider_->complete(prompt, options_.settings);
      } catch (...) {
        slots_.release();
        throw;
      }
      slots_.release();
      ex.raw_completion = std::move(c.text);
      ex.prompt_tokens = c.prompt_tokens;
      ex.completion_tokens = c.completion_tokens;
      break;
    } catch (const GatewayError& e) {
      if (e.reason() != GatewayError::Reason::transient) throw;
      if (attempt >= options_.max_attempts) {
        throw GatewayError(GatewayError::Reason::exhausted, "provider " + provider_->name() + " failed after " +
                                                                std::to_string(attempt) + " attempts: " + e.what());
      }
      ++ex.retries;
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  ex.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  try {
    ex.extracted_sql = extract_sql(ex.raw_completion);
    if (ex.extracted_sql->empty()) ex.extracted_sql.reset();
  } catch (const GatewayError&) {
  }
  append_transcript(ex);
  return ex;
}

ChatExchange Gateway::complete(TemplateId id, const Bindings& bindings, const FewShotSet& few_shot) {
  return complete(render_prompt(templates_.get(id), bindings, few_shot), to_string(id));
}

void Gateway::append_transcript(const ChatExchange& ex) {
  if (options_.transcript_path.empty()) return;
  nlohmann::ordered_json j;
  j["purpose"] = ex.purpose;
  j["prompt_digest"] = prompt_digest(ex.rendered_prompt);
  j["prompt"] = ex.rendered_prompt;
  j["completion"] = ex.raw_completion;
  j["extracted_sql"] = ex.extracted_sql ? nlohmann::ordered_json(*ex.extracted_sql) : nlohmann::ordered_json();
  j["settings"] = {{"model_id", ex.settings.model_id},
                   {"temperature", ex.settings.temperature},
                   {"top_p", ex.settings.top_p},
                   {"max_tokens", ex.settings.max_tokens}};
  j["retries"] = ex.retries;
  if (ex.prompt_tokens) j["prompt_tokens"] = *ex.prompt_tokens;
  if (ex.completion_tokens) j["completion_tokens"] = *ex.completion_tokens;
  if (options_.record_latency) j["latency_ms"] = ex.latency.count();

  std::lock_guard lock(transcript_mu_);
  const auto parent = std::filesystem::path(options_.transcript_path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(options_.transcript_path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append to transcript " + options_.transcript_path);
  out << j.dump() << '\n';
}

}  // namespace vsql::llm
