#include "vsql/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "vsql/error.hpp"
#include "vsql/sql/analysis.hpp"
#include "vsql/sql/parser.hpp"
#include "vsql/sql/printer.hpp"

namespace vsql {

using Json = nlohmann::ordered_json;

const char* to_string(Difficulty d) noexcept {
  switch (d) {
    case Difficulty::simple:
      return "simple";
    case Difficulty::moderate:
      return "moderate";
    case Difficulty::challenging:
      return "challenging";
  }
  return "simple";
}

Difficulty parse_difficulty(std::string_view text) {
  for (auto d : kDifficulties) {
    if (iequals(text, to_string(d))) return d;
  }
  throw ValidationError("unknown difficulty '" + std::string(text) + "' (expected simple, moderate or challenging)");
}

namespace {

std::string string_or_number(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(where + ": missing field '" + key + "'");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw ValidationError(where + ": field '" + key + "' must be a string or integer");
}

std::string text_field(const nlohmann::json& j, const char* key, const std::string& where, bool required = true) {
  const auto it = j.find(key);
  if (it == j.end()) {
    if (required) throw ValidationError(where + ": missing field '" + key + "'");
    return {};
  }
  if (!it->is_string()) throw ValidationError(where + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

DatasetExample example_from(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
  DatasetExample ex;
  ex.example_id = string_or_number(j, "question_id", where);
  ex.db_id = text_field(j, "db_id", where);
  ex.question = text_field(j, "question", where);
  ex.gold_sql = text_field(j, "SQL", where);
  ex.difficulty = parse_difficulty(text_field(j, "difficulty", where));
  ex.evidence = text_field(j, "evidence", where, false);
  try {
    sql::parse(ex.gold_sql);
  } catch (const Error&) {
    ex.execute_only = true;
  }
  return ex;
}

// Numeric ids sort numerically, everything else lexicographically after them.
bool id_less(const std::string& a, const std::string& b) {
  auto numeric = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
  };
  const bool na = numeric(a), nb = numeric(b);
  if (na != nb) return na;
  if (na && a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

Json stratum_json(const StratumStats& s) {
  Json j;
  j["examples"] = s.examples;
  j["analyzed"] = s.analyzed;
  j["execute_only"] = s.execute_only;
  j["empty"] = s.empty;
  if (!s.empty) {
    j["avg_joins"] = s.avg_joins;
    j["avg_tables"] = s.avg_tables;
    j["table_combinations"] = s.table_combinations;
  }
  return j;
}

Json score_json(const StratumScore& s) {
  Json j;
  j["examples"] = s.examples;
  j["matches"] = s.matches;
  j["ex"] = s.ex;
  return j;
}

}  // namespace

std::vector<DatasetExample> parse_dataset(std::string_view text) {
  std::vector<DatasetExample> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '[') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed dataset JSON: ") + e.what(), e.byte, 1, e.byte);
    }
    for (std::size_t i = 0; i < doc.size(); ++i) {
      out.push_back(example_from(doc[i], "dataset entry " + std::to_string(i + 1)));
    }
    return out;
  }
  std::size_t line_no = 0, pos = 0, offset = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    ++line_no;
    offset = pos;
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed dataset line: ") + e.what(), offset + e.byte, line_no, e.byte);
      }
      out.push_back(example_from(j, "dataset line " + std::to_string(line_no)));
    }
    pos = end + 1;
  }
  return out;
}

std::vector<DatasetExample> load_dataset(const std::string& path) {
  if (!std::filesystem::exists(path)) throw IoError("dataset not found: " + path);
  return parse_dataset(read_file(path));
}

CorpusStats corpus_stats(const std::vector<DatasetExample>& dataset) {
  struct Acc {
    StratumStats s;
    std::size_t joins = 0, tables = 0;
    std::set<std::string> combos;
  };
  std::array<Acc, 3> strata;
  Acc overall;
  for (const auto& ex : dataset) {
    auto& acc = strata[static_cast<std::size_t>(ex.difficulty)];
    for (Acc* a : {&acc, &overall}) {
      ++a->s.examples;
      if (ex.execute_only) ++a->s.execute_only;
    }
    if (ex.execute_only) continue;
    const auto q = sql::parse(ex.gold_sql);
    std::vector<std::string> names;
    for (const auto& n : sql::base_relations(q)) names.push_back(to_lower(n));
    std::sort(names.begin(), names.end());
    const auto combo = join(names, ",");
    for (Acc* a : {&acc, &overall}) {
      ++a->s.analyzed;
      a->joins += sql::count_joins(q);
      a->tables += names.size();
      a->combos.insert(combo);
    }
  }
  auto finish = [](Acc& a) {
    a.s.empty = a.s.analyzed == 0;
    if (!a.s.empty) {
      a.s.avg_joins = static_cast<double>(a.joins) / static_cast<double>(a.s.analyzed);
      a.s.avg_tables = static_cast<double>(a.tables) / static_cast<double>(a.s.analyzed);
      a.s.table_combinations = a.combos.size();
    }
    return a.s;
  };
  CorpusStats out;
  for (std::size_t i = 0; i < 3; ++i) out.strata[i] = finish(strata[i]);
  out.overall = finish(overall);
  return out;
}

EvalReport run_eval(const std::vector<DatasetExample>& dataset, Predictor& predictor,
                    const DatabaseResolver& resolve, const EvalOptions& options) {
  std::map<std::string, std::string> paths;
  for (const auto& ex : dataset) {
    if (paths.count(ex.db_id)) continue;
    const auto path = resolve(ex.db_id);
    if (!std::filesystem::exists(path)) {
      throw IoError("database not found for db_id '" + ex.db_id + "': " + path);
    }
    paths.emplace(ex.db_id, path);
  }

  std::vector<EvalRecord> records(dataset.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::map<std::string, Database> connections;
    for (std::size_t i = next++; i < dataset.size(); i = next++) {
      const auto& ex = dataset[i];
      auto& r = records[i];
      r.example_id = ex.example_id;
      r.db_id = ex.db_id;
      r.difficulty = ex.difficulty;

      Prediction p;
      try {
        p = predictor.predict(ex);
      } catch (const std::exception& e) {
        p.error = e.what();
        p.error_stage = "pipeline";
      }
      r.dummy_sql = p.dummy_sql;
      r.predicted_sql = p.final_sql;
      r.timings = p.timings;
      if (p.error) {
        r.error_text = p.error;
        r.error_stage = p.error_stage;
        continue;
      }

      const auto start = std::chrono::steady_clock::now();
      try {
        auto it = connections.find(ex.db_id);
        if (it == connections.end()) {
          it = connections.emplace(ex.db_id, Database::open_read_only(paths.at(ex.db_id))).first;
        }
        ResultSet predicted;
        try {
          predicted = it->second.query(r.predicted_sql, options.timeout);
          r.executed_ok = true;
        } catch (const Error& e) {
          r.error_text = e.what();
          r.error_stage = "execution";
        }
        if (r.executed_ok) {
          try {
            const auto gold = it->second.query(ex.gold_sql, options.timeout);
            r.result_match = compare_results(predicted, gold, has_top_level_order_by(ex.gold_sql));
          } catch (const Error& e) {
            r.error_text = std::string("gold query failed: ") + e.what();
            r.error_stage = "gold";
          }
        }
      } catch (const Error& e) {
        r.error_text = e.what();
        r.error_stage = "execution";
      }
      r.timings.execution_ms = ms_since(start);
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(options.parallelism, dataset.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::stable_sort(records.begin(), records.end(),
                   [](const EvalRecord& a, const EvalRecord& b) { return id_less(a.example_id, b.example_id); });

  EvalReport report;
  report.records = std::move(records);
  for (const auto& r : report.records) {
    auto& s = report.strata[static_cast<std::size_t>(r.difficulty)];
    ++s.examples;
    ++report.total.examples;
    if (r.result_match) {
      ++s.matches;
      ++report.total.matches;
    }
  }
  auto rate = [](StratumScore& s) {
    s.ex = s.examples ? static_cast<double>(s.matches) / static_cast<double>(s.examples) : 0.0;
  };
  for (auto& s : report.strata) rate(s);
  rate(report.total);
  report.ex_defined = report.total.examples > 0;
  report.stats = corpus_stats(dataset);
  return report;
}

std::string report_json(const EvalReport& report, bool include_timings) {
  Json j;
  j["examples"] = report.total.examples;
  j["ex_defined"] = report.ex_defined;
  Json ex;
  for (auto d : kDifficulties) ex[to_string(d)] = score_json(report.strata[static_cast<std::size_t>(d)]);
  ex["total"] = score_json(report.total);
  j["ex"] = ex;
  Json stats;
  for (auto d : kDifficulties) stats[to_string(d)] = stratum_json(report.stats.strata[static_cast<std::size_t>(d)]);
  stats["total"] = stratum_json(report.stats.overall);
  j["corpus_stats"] = stats;
  Json records = Json::array();
  for (const auto& r : report.records) {
    Json rec;
    rec["example_id"] = r.example_id;
    rec["db_id"] = r.db_id;
    rec["difficulty"] = to_string(r.difficulty);
    rec["dummy_sql"] = r.dummy_sql;
    rec["predicted_sql"] = r.predicted_sql;
    rec["executed_ok"] = r.executed_ok;
    rec["result_match"] = r.result_match;
    rec["error"] = r.error_text ? Json(*r.error_text) : Json(nullptr);
    if (!r.error_stage.empty()) rec["error_stage"] = r.error_stage;
    if (include_timings) {
      rec["timings_ms"] = {{"generation", r.timings.generation_ms},
                           {"reconstruction", r.timings.reconstruction_ms},
                           {"execution", r.timings.execution_ms}};
    }
    records.push_back(std::move(rec));
  }
  j["records"] = std::move(records);
  return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
  constexpr std::size_t label = 22, cell = 9;
  auto row = [&](const std::string& name, const std::array<std::string, 4>& cells) {
    std::string line = pad_right(name, label);
    for (const auto& c : cells) line += pad_left(c, cell);
    return line + "\n";
  };
  auto stat = [](const StratumStats& s, auto get) { return s.empty ? std::string("-") : get(s); };
  const auto& st = report.stats;
  auto cells = [&](auto get) {
    return std::array<std::string, 4>{get(0), get(1), get(2), get(3)};
  };
  auto stratum = [&](std::size_t i) -> const StratumStats& { return i < 3 ? st.strata[i] : st.overall; };
  auto score = [&](std::size_t i) -> const StratumScore& { return i < 3 ? report.strata[i] : report.total; };

  std::string out = row("", {"SIM.", "MOD.", "CHALL.", "TOTAL"});
  out += row("examples", cells([&](std::size_t i) { return std::to_string(score(i).examples); }));
  out += row("matches", cells([&](std::size_t i) { return std::to_string(score(i).matches); }));
  out += row("EX (%)", cells([&](std::size_t i) { return fixed2(100.0 * score(i).ex); }));
  out += row("avg joins", cells([&](std::size_t i) {
               return stat(stratum(i), [](const StratumStats& s) { return fixed2(s.avg_joins); });
             }));
  out += row("avg tables per query", cells([&](std::size_t i) {
               return stat(stratum(i), [](const StratumStats& s) { return fixed2(s.avg_tables); });
             }));
  out += row("table combinations", cells([&](std::size_t i) {
               return stat(stratum(i), [](const StratumStats& s) { return std::to_string(s.table_combinations); });
             }));
  if (st.overall.execute_only) {
    out += row("execute-only gold", cells([&](std::size_t i) { return std::to_string(stratum(i).execute_only); }));
  }
  if (!report.ex_defined) out += "note: empty dataset, EX undefined (shown as 0.00)\n";
  return out;
}

Database materialize_views(const ViewCatalog& catalog, const Database& db) {
  auto scratch = Database::scratch_copy(db);
  for (const auto& v : catalog.views) {
    const auto stmt = emit_view_sql(v);
    try {
      scratch.exec_script(stmt);
      // SQLite resolves view columns lazily; force it so errors name the view.
      scratch.query("select * from " + sql::quote_identifier(v.view_name) + " limit 0");
    } catch (const ExecutionError& e) {
      throw ExecutionError("cannot create view " + v.view_name + ": " + e.what() + "\n" + stmt);
    }
  }
  return scratch;
}

OracleVerdict oracle_check(Database& views_db, Database& db, const std::string& dummy_sql,
                           const std::string& final_sql, std::chrono::milliseconds timeout) {
  OracleVerdict v;
  v.dummy_result = views_db.query(dummy_sql, timeout);
  v.final_result = db.query(final_sql, timeout);
  v.match = compare_results(v.final_result, v.dummy_result, has_top_level_order_by(dummy_sql));
  return v;
}

OracleVerdict materialize_views_oracle(const ViewCatalog& catalog, Database& db, const std::string& dummy_sql,
                                       const std::string& final_sql, std::chrono::milliseconds timeout) {
  auto scratch = materialize_views(catalog, db);
  return oracle_check(scratch, db, dummy_sql, final_sql, timeout);
}

}  // namespace vsql
