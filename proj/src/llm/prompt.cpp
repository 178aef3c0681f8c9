#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <filesystem>

#include "builtin_templates.hpp"
#include "vsql/identifiers.hpp"
#include "vsql/llm.hpp"

namespace vsql::llm {

namespace {

bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct Placeholder {
  std::size_t begin, end;  // covers the braces
  std::string name;
};

std::vector<Placeholder> scan(std::string_view body) {
  std::vector<Placeholder> out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '{' || i + 1 >= body.size() || !name_start(body[i + 1])) continue;
    std::size_t j = i + 1;
    while (j < body.size() && name_char(body[j])) ++j;
    if (j < body.size() && body[j] == '}') {
      out.push_back({i, j + 1, std::string(body.substr(i + 1, j - i - 1))});
      i = j;
    }
  }
  return out;
}

std::string substitute(std::string_view body, const Bindings& bindings) {
  std::string out;
  std::size_t at = 0;
  for (const auto& p : scan(body)) {
    out.append(body.substr(at, p.begin - at));
    out += bindings.at(p.name);
    at = p.end;
  }
  out.append(body.substr(at));
  return out;
}

std::size_t line_start(std::string_view s, std::size_t pos) {
  const auto nl = s.rfind('\n', pos == 0 ? 0 : pos - 1);
  return nl == std::string_view::npos || pos == 0 ? 0 : nl + 1;
}

// Offset of the heading line ("# ...") that owns `pos`, or npos.
std::size_t heading_before(std::string_view body, std::size_t pos) {
  std::size_t at = line_start(body, pos);
  while (true) {
    if (at < body.size() && body[at] == '#') return at;
    if (at == 0) return std::string_view::npos;
    at = line_start(body, at - 1);
  }
}

std::string demonstration_block(const FewShotSet& few_shot) {
  std::string out = "# examples\n";
  std::size_t n = 0;
  for (const auto& d : few_shot.demonstrations) {
    out += "## example " + std::to_string(++n) + "\n" + d.input + "\n" + wrap_in_fence(d.output_sql) + "\n\n";
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t at = 0;
  while (at <= text.size()) {
    auto nl = text.find('\n', at);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(at, nl - at);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    at = nl + 1;
  }
  return lines;
}

std::string_view ltrim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  return s;
}

// "```sql", "``sql", "```" -> tag; nullopt when the line is not a fence.
std::optional<std::string> fence_tag(std::string_view line) {
  const auto t = trim(line);
  std::size_t ticks = 0;
  while (ticks < t.size() && t[ticks] == '`') ++ticks;
  if (ticks < 2) return std::nullopt;
  const std::string tag = trim(std::string_view(t).substr(ticks));
  if (!std::all_of(tag.begin(), tag.end(), name_char)) return std::nullopt;
  return to_lower(tag);
}

bool starts_with_keyword(std::string_view s) {
  s = ltrim(s);
  for (std::string_view kw : {"select", "create", "with"}) {
    if (istarts_with(s, kw) && (s.size() == kw.size() || !name_char(s[kw.size()]))) return true;
  }
  return false;
}

std::optional<std::string> fenced_block(const std::vector<std::string_view>& lines, bool want_sql_tag) {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tag = fence_tag(lines[i]);
    if (!tag || (want_sql_tag ? *tag != "sql" : !tag->empty())) continue;
    std::string body;
    std::size_t j = i + 1;
    for (; j < lines.size(); ++j) {
      if (fence_tag(lines[j]) && fence_tag(lines[j])->empty()) break;
      body.append(lines[j]);
      body += '\n';
    }
    auto sql = trim(body);
    if (want_sql_tag) return sql;
    if (starts_with_keyword(sql)) return sql;
    i = j;
  }
  return std::nullopt;
}

std::optional<std::size_t> keyword_offset(std::string_view text, bool line_start_only) {
  const auto lower = to_lower(text);
  std::optional<std::size_t> best;
  for (std::string_view kw : {"select", "create"}) {
    for (auto pos = lower.find(kw); pos != std::string::npos; pos = lower.find(kw, pos + 1)) {
      const bool left_ok = pos == 0 || !name_char(lower[pos - 1]);
      const bool right_ok = pos + kw.size() >= lower.size() || !name_char(lower[pos + kw.size()]);
      if (!left_ok || !right_ok) continue;
      if (line_start_only && !trim(std::string_view(lower).substr(line_start(lower, pos), pos - line_start(lower, pos))).empty()) {
        continue;
      }
      if (!best || pos < *best) best = pos;
      break;
    }
  }
  return best;
}

}  // namespace

const char* to_string(TemplateId id) noexcept {
  switch (id) {
    case TemplateId::view_creation:
      return "view_creation";
    case TemplateId::dummy_generation:
      return "dummy_generation";
    case TemplateId::reconstruction:
      return "reconstruction";
  }
  return "dummy_generation";
}

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> out;
  for (const auto& p : scan(body)) {
    if (std::find(out.begin(), out.end(), p.name) == out.end()) out.push_back(p.name);
  }
  return out;
}

const PromptTemplate& TemplateSet::get(TemplateId id) const {
  switch (id) {
    case TemplateId::view_creation:
      return view_creation;
    case TemplateId::dummy_generation:
      return dummy_generation;
    case TemplateId::reconstruction:
      return reconstruction;
  }
  return dummy_generation;
}

std::vector<std::string> builtin_template_variants() {
  std::vector<std::string> out;
  for (const auto& v : detail::builtin_variants()) out.emplace_back(v.name);
  return out;
}

TemplateSet builtin_templates(std::string_view variant) {
  for (const auto& v : detail::builtin_variants()) {
    if (v.name != variant) continue;
    return TemplateSet{v.name,
                       {TemplateId::view_creation, v.view_creation},
                       {TemplateId::dummy_generation, v.dummy_generation},
                       {TemplateId::reconstruction, v.reconstruction}};
  }
  throw ConfigError("unknown template variant '" + std::string(variant) + "' (expected " +
                    join(builtin_template_variants(), " or ") + ")");
}

TemplateSet load_templates(const std::string& directory) {
  auto load = [&](TemplateId id) {
    const auto path = (std::filesystem::path(directory) / (std::string(to_string(id)) + ".txt")).string();
    if (!std::filesystem::exists(path)) throw IoError("template file not found: " + path);
    return PromptTemplate{id, read_file(path)};
  };
  return TemplateSet{directory, load(TemplateId::view_creation), load(TemplateId::dummy_generation),
                     load(TemplateId::reconstruction)};
}

std::string render_prompt(const PromptTemplate& tmpl, const Bindings& bindings, const FewShotSet& few_shot) {
  for (const auto& name : tmpl.placeholders()) {
    if (!bindings.count(name)) {
      throw ValidationError(std::string("missing binding for placeholder '") + name + "' in " + to_string(tmpl.id) +
                            " template");
    }
  }
  if (few_shot.demonstrations.empty()) return substitute(tmpl.body, bindings);

  const std::string_view body = tmpl.body;
  std::size_t split = std::string_view::npos;
  if (const auto q = body.find("{query}"); q != std::string_view::npos) split = heading_before(body, q);
  if (split == std::string_view::npos) {
    for (std::size_t at = body.size(); at > 0;) {
      at = line_start(body, at - 1);
      if (at < body.size() && body[at] == '#') {
        split = at;
        break;
      }
    }
  }
  if (split == std::string_view::npos) split = body.size();
  return substitute(body.substr(0, split), bindings) + demonstration_block(few_shot) +
         substitute(body.substr(split), bindings);
}

std::string extract_sql(std::string_view completion) {
  const auto lines = split_lines(completion);
  if (auto sql = fenced_block(lines, true); sql && !sql->empty()) return *sql;
  if (auto sql = fenced_block(lines, false)) return *sql;

  auto start = keyword_offset(completion, true);
  if (!start) start = keyword_offset(completion, false);
  if (!start) {
    auto preview = trim(completion.substr(0, 80));
    throw GatewayError(GatewayError::Reason::no_sql, "no SQL found in completion: \"" + preview + "\"");
  }

  // Keep lines until a blank line that is not followed by another statement,
  // or a fence.
  const auto rest = split_lines(completion.substr(*start));
  std::string out;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    if (fence_tag(rest[i])) break;
    if (trim(rest[i]).empty()) {
      std::size_t j = i + 1;
      while (j < rest.size() && trim(rest[j]).empty()) ++j;
      if (j == rest.size() || !starts_with_keyword(rest[j])) break;
    }
    out.append(rest[i]);
    out += '\n';
  }
  return trim(out);
}

std::string wrap_in_fence(std::string_view sql) { return "```sql\n" + std::string(sql) + "\n```"; }

std::string prompt_digest(std::string_view prompt) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(prompt.data(), prompt.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw GatewayError(GatewayError::Reason::bad_response, "SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

}  // namespace vsql::llm
