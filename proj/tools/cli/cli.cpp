#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "query_gen.hpp"
#include "vsql/database.hpp"
#include "vsql/pipeline.hpp"
#include "vsql/sql/analysis.hpp"
#include "vsql/sql/parser.hpp"
#include "vsql/sql/printer.hpp"

namespace vsql::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalFlags {
  std::string config, schema, db, db_root, db_id, views, mock_transcript, out, templates;
  std::optional<std::uint64_t> seed;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char c : text + ",") {
    if (c != ',') {
      item += c;
      continue;
    }
    if (auto t = trim(item); !t.empty()) out.push_back(t);
    item.clear();
  }
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << text;
}

class Context {
 public:
  explicit Context(const GlobalFlags& flags) : flags_(flags) {
    config = flags.config.empty() ? PipelineConfig{} : load_config(flags.config);
    if (!flags.schema.empty()) config.schema_path = flags.schema;
    if (!flags.db.empty()) config.db_path = flags.db;
    if (!flags.db_root.empty()) config.db_root = flags.db_root;
    if (!flags.views.empty()) {
      config.views_path = flags.views;
      config.view_policy.kind = SynthesisPolicy::Kind::hand_authored_only;
    }
    if (!flags.mock_transcript.empty()) {
      config.mock_transcript = flags.mock_transcript;
      config.provider = "mock";
    }
    if (!flags.out.empty()) config.out_dir = flags.out;
    if (!flags.templates.empty()) {
      config.template_variant = flags.templates;
      config.templates_dir.clear();
    }
    if (flags.seed) config.seed = *flags.seed;
    validate(config);
  }

  PipelineConfig config;

  DatabaseSchema schema() const {
    if (config.schema_path.empty() && flags_.db_id.empty()) {
      // A lone database file describes itself.
      if (config.db_path.empty()) throw ConfigError("no schema configured: pass --schema, --db, or --db-id with --db-root");
      return resolve_schema(config, fs::path(config.db_path).stem().string());
    }
    return resolve_schema(config, flags_.db_id);
  }

  std::string db_id(const DatabaseSchema& schema) const { return flags_.db_id.empty() ? schema.db_id : flags_.db_id; }

  std::string database(const std::string& db_id) const {
    const auto path = resolve_database(config, db_id);
    if (!fs::exists(path)) throw IoError("unknown db_id '" + db_id + "': database not found: " + path);
    return path;
  }

 private:
  const GlobalFlags& flags_;
};

std::string view_summary(const ViewDefinition& v) {
  return v.view_name + " (" + std::to_string(v.output_columns.size()) + " columns, " +
         std::to_string(v.join_chain.size()) + " joins)";
}

void print_rows(const ResultSet& r, std::ostream& out) {
  out << join(r.columns, "\t") << "\n";
  for (const auto& row : r.rows) {
    std::vector<std::string> cells;
    for (const auto& v : row) cells.push_back(to_display(v));
    out << join(cells, "\t") << "\n";
  }
  out << "(" << r.rows.size() << " row" << (r.rows.size() == 1 ? "" : "s") << ")\n";
}

int cmd_schema_inspect(const Context& ctx, std::ostream& out) {
  const auto schema = ctx.schema();
  const FkGraph graph(schema);
  out << "database: " << schema.db_id << "\n";
  out << "tables: " << schema.tables.size() << ", foreign keys: " << schema.foreign_key_count() << "\n";
  for (const auto& t : schema.tables) {
    out << "\n" << t.name << ": " << t.columns.size() << " columns, primary key (" << join(t.primary_key, ", ")
        << "), " << graph.out_degree(t.name) << " foreign keys out, " << graph.in_edges(t.name).size() << " in\n";
    for (const auto& c : t.columns) {
      out << "  " << c.name << " (" << to_string(c.data_format) << ")";
      if (!c.display_name.empty() && c.display_name != c.name) out << ": " << c.display_name;
      out << "\n";
    }
    for (const auto& fk : t.foreign_keys) {
      out << "  " << fk.from_column << " -> " << fk.to_table << "." << fk.to_column << "\n";
    }
  }
  return 0;
}

int cmd_schema_render(const Context& ctx, const std::optional<std::string>& tables, std::ostream& out) {
  const auto schema = ctx.schema();
  if (tables) {
    out << render_schema_text(schema, split_list(*tables));
  } else {
    out << render_schema_text(schema);
  }
  return 0;
}

int cmd_views_synth(const Context& ctx, std::string output, std::ostream& out) {
  const auto schema = ctx.schema();
  auto policy = ctx.config.view_policy;
  if (policy.kind == SynthesisPolicy::Kind::hand_authored_only || policy.kind == SynthesisPolicy::Kind::llm_proposed) {
    policy.kind = SynthesisPolicy::Kind::all_tables;
  }
  const auto catalog = synthesize_views(schema, policy);
  if (output.empty()) output = (fs::path(ctx.config.out_dir) / "views.sql").string();
  write_file(output, emit_catalog_sql(catalog) + "\n");
  for (const auto& v : catalog.views) out << view_summary(v) << "\n";
  out << "wrote " << catalog.views.size() << " views to " << output << "\n";
  return 0;
}

int cmd_views_validate(const Context& ctx, std::string file, std::ostream& out) {
  const auto schema = ctx.schema();
  if (file.empty()) file = ctx.config.views_path;
  if (file.empty()) throw ConfigError("views validate needs a view file (argument or --views)");
  if (!fs::exists(file)) throw IoError("view file not found: " + file);

  std::size_t invalid = 0;
  ViewCatalog catalog{schema, {}};
  const auto statements = sql::split_statements(read_file(file));
  for (std::size_t i = 0; i < statements.size(); ++i) {
    std::string name = "statement " + std::to_string(i + 1);
    try {
      name = sql::parse_create_view(statements[i]).name;
    } catch (const Error&) {
    }
    try {
      auto view = ingest_view_sql(statements[i], schema);
      out << "ok       " << view_summary(view) << "\n";
      catalog.views.push_back(std::move(view));
    } catch (const Error& e) {
      ++invalid;
      out << "invalid  " << name << ": " << e.what() << "\n";
    }
  }
  if (invalid == 0) {
    try {
      validate(catalog);
    } catch (const Error& e) {
      ++invalid;
      out << "invalid  catalog: " << e.what() << "\n";
    }
  }
  out << (statements.size() - std::min(invalid, statements.size())) << "/" << statements.size() << " views valid\n";
  return invalid == 0 ? 0 : 1;
}

int cmd_views_propose(const Context& ctx, std::string output, std::ostream& out) {
  const auto schema = ctx.schema();
  auto gateway = make_gateway(ctx.config);
  const auto proposals = llm_propose_views(schema, *gateway);
  std::string text;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const auto& p = proposals[i];
    const auto label = "proposal " + std::to_string(i + 1);
    if (p.valid()) {
      ++valid;
      text += "-- " + label + ": valid (" + p.view->view_name + ")\n";
      out << "valid    " << view_summary(*p.view) << "\n";
    } else {
      text += "-- " + label + ": invalid: " + p.error + "\n";
      out << "invalid  " << label << ": " << p.error << "\n";
    }
    text += p.raw_sql + ";\n\n";
  }
  if (output.empty()) output = (fs::path(ctx.config.out_dir) / "proposals.sql").string();
  write_file(output, text);
  out << valid << "/" << proposals.size() << " proposals valid; wrote " << output << "\n";
  return 0;
}

struct AskFlags {
  std::string question;
  bool execute = false;
  bool tighten = false;
  bool llm = false;
};

int cmd_ask(Context& ctx, const AskFlags& flags, std::ostream& out, std::ostream& err) {
  const auto schema = ctx.schema();
  const auto db_id = ctx.db_id(schema);
  const auto db_path = ctx.database(db_id);
  if (flags.tighten) ctx.config.reconstruction.tighten = true;
  if (flags.llm) {
    ctx.config.reconstruction_mode = ReconstructionMode::llm;
    ctx.config.reconstruction.llm_mode = true;
  }

  auto gateway = make_gateway(ctx.config);
  const Pipeline pipeline(build_catalog(ctx.config, schema, gateway.get()), gateway, ctx.config.reconstruction_mode,
                          ctx.config.reconstruction);
  const auto run = pipeline.run(flags.question);
  if (!run.dummy_sql.empty()) out << "dummy SQL:\n" << run.dummy_sql << "\n";
  if (run.error) {
    err << "error [" << run.error_stage << "]: " << *run.error << "\n";
    return 1;
  }
  out << "final SQL:\n" << run.final_sql << "\n";
  std::vector<std::string> linked(run.linked_tables.begin(), run.linked_tables.end());
  out << "linked tables: " << join(linked, ", ") << "\n";
  if (!run.pruned_joins.empty()) out << "pruned joins: " << join(run.pruned_joins, ", ") << "\n";
  if (!run.tightened_joins.empty()) out << "tightened joins: " << join(run.tightened_joins, ", ") << "\n";
  if (flags.execute) {
    auto db = Database::open_read_only(db_path);
    print_rows(db.query(run.final_sql, ctx.config.eval.timeout), out);
  }
  return 0;
}

struct EvalFlags {
  std::string dataset;
  std::optional<std::size_t> parallelism;
  bool timings = false;
};

int cmd_eval(Context& ctx, const EvalFlags& flags, std::ostream& out) {
  if (flags.parallelism) ctx.config.eval.parallelism = std::max<std::size_t>(1, *flags.parallelism);
  const auto dataset = load_dataset(flags.dataset);
  const auto& config = ctx.config;
  const DatabaseResolver resolve = [&](const std::string& db_id) { return resolve_database(config, db_id); };
  for (const auto& ex : dataset) {
    if (const auto path = resolve(ex.db_id); !fs::exists(path)) {
      throw IoError("database not found for db_id '" + ex.db_id + "': " + path);
    }
  }

  // A run owns its transcript.
  fs::create_directories(config.out_dir);
  write_file(config.effective_transcript_path(), "");
  auto gateway = make_gateway(config);
  PipelinePredictor predictor(config, gateway);
  const auto report = run_eval(dataset, predictor, resolve, config.eval);

  const auto json_path = (fs::path(config.out_dir) / "report.json").string();
  const auto table_path = (fs::path(config.out_dir) / "report.txt").string();
  const auto table = report_table(report);
  write_file(json_path, report_json(report, flags.timings));
  write_file(table_path, table);
  out << table << "wrote " << json_path << " and " << table_path << "\n";
  return 0;
}

struct OracleFlags {
  std::size_t count = 200;
  bool tighten = false;
  bool no_prune = false;
  std::string reconstruct_views;
};

int cmd_oracle(const Context& ctx, const OracleFlags& flags, std::ostream& out) {
  const auto schema = ctx.schema();
  const auto db_path = ctx.database(ctx.db_id(schema));
  auto truth_config = ctx.config;
  if (truth_config.view_policy.kind == SynthesisPolicy::Kind::llm_proposed) {
    throw ConfigError("the oracle needs a deterministic catalog (not llm-proposed)");
  }
  const auto truth = build_catalog(truth_config, schema, nullptr);
  const auto rewrite =
      flags.reconstruct_views.empty() ? truth : load_view_catalog_file(flags.reconstruct_views, schema);

  const auto s = run_oracle(truth, rewrite, db_path, {flags.count, ctx.config.seed, flags.tighten, !flags.no_prune});
  for (const auto& f : s.failures) {
    out << "FAIL #" << f.index + 1 << ": " << f.reason << "\n  dummy: " << f.dummy_sql << "\n  final: " << f.final_sql
        << "\n";
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "mean joins: dummy %.3f, final %.3f\nmean length: dummy %.1f, final %.1f\n",
                s.mean_dummy_joins, s.mean_final_joins, s.mean_dummy_length, s.mean_final_length);
  out << buf;
  out << "round-trip: " << s.round_trips << "/" << s.count << "\n";
  out << "oracle: " << s.passed << "/" << s.count << " passed (seed " << ctx.config.seed << ", tightening "
      << (flags.tighten ? "on" : "off") << ")\n";
  return s.passed == s.count ? 0 : 1;
}

}  // namespace

OracleSummary run_oracle(const ViewCatalog& truth, const ViewCatalog& rewrite, const std::string& db_path,
                         const OracleOptions& options) {
  OracleSummary s;
  s.count = options.count;
  auto db = Database::open_read_only(db_path);
  auto views_db = materialize_views(truth, db);
  QueryGenerator gen(truth, views_db, options.seed);

  auto round_trips = [](const std::string& text) {
    const auto once = sql::parse(text);
    return sql::parse(sql::print(once)) == once;
  };

  for (std::size_t i = 0; i < options.count; ++i) {
    const auto dummy = gen.next();
    s.dummies.push_back(dummy);
    std::string final_sql;
    try {
      const auto dummy_ast = sql::parse(dummy);
      const auto result = reconstruct(dummy_ast, rewrite, {options.tighten, options.prune, false});
      final_sql = sql::print(result.final_ast);
      s.mean_dummy_joins += static_cast<double>(sql::count_joins(dummy_ast));
      s.mean_final_joins += static_cast<double>(sql::count_joins(result.final_ast));
      s.mean_dummy_length += static_cast<double>(dummy.size());
      s.mean_final_length += static_cast<double>(final_sql.size());
      if (round_trips(dummy) && round_trips(final_sql)) ++s.round_trips;
      const auto verdict = oracle_check(views_db, db, dummy, final_sql);
      if (verdict.match) {
        ++s.passed;
      } else {
        s.failures.push_back({i, dummy, final_sql,
                              "result mismatch (" + std::to_string(verdict.dummy_result.rows.size()) + " vs " +
                                  std::to_string(verdict.final_result.rows.size()) + " rows)"});
      }
    } catch (const std::exception& e) {
      s.failures.push_back({i, dummy, final_sql, e.what()});
    }
  }
  if (s.count) {
    const auto n = static_cast<double>(s.count);
    s.mean_dummy_joins /= n;
    s.mean_final_joins /= n;
    s.mean_dummy_length /= n;
    s.mean_final_length /= n;
  }
  return s;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage text-to-SQL over view-flattened schemas", "vsql"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config, "pipeline config (JSON)");
  app.add_option("--schema", g.schema, "schema source (.json or .sql DDL)");
  app.add_option("--db", g.db, "SQLite database file");
  app.add_option("--db-root", g.db_root, "directory holding <db_id>/<db_id>.sqlite");
  app.add_option("--db-id", g.db_id, "database id (defaults to the schema's)");
  app.add_option("--views", g.views, "hand-authored view file (switches the policy to hand-authored-only)");
  app.add_option("--mock-transcript", g.mock_transcript, "replay completions from this JSONL transcript");
  app.add_option("--templates", g.templates, "prompt template variant: cleaned or paper-verbatim");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out", g.out, "output directory");

  auto* schema = app.add_subcommand("schema", "inspect or render the database schema");
  schema->require_subcommand(1);
  auto* inspect = schema->add_subcommand("inspect", "tables, columns and the foreign-key graph");
  auto* render = schema->add_subcommand("render", "prompt-ready schema text");
  std::optional<std::string> render_tables;
  render->add_option("--tables", render_tables, "comma-separated subset (empty: render nothing)");

  auto* views = app.add_subcommand("views", "synthesize, validate or propose views");
  views->require_subcommand(1);
  std::string views_output, validate_file;
  auto* synth = views->add_subcommand("synth", "write the synthesized view catalog");
  synth->add_option("-o,--output", views_output, "catalog file (default <out>/views.sql)");
  auto* vvalidate = views->add_subcommand("validate", "ingest a hand-authored view file");
  vvalidate->add_option("file", validate_file, "view file (default --views)");
  auto* propose = views->add_subcommand("propose", "ask the model for views");
  propose->add_option("-o,--output", views_output, "proposals file (default <out>/proposals.sql)");

  AskFlags ask_flags;
  auto* ask = app.add_subcommand("ask", "answer one question");
  ask->add_option("question", ask_flags.question, "natural-language question")->required();
  ask->add_flag("--execute", ask_flags.execute, "run the final SQL and print the rows");
  ask->add_flag("--tighten", ask_flags.tighten, "LEFT -> INNER under null-rejecting predicates");
  ask->add_flag("--llm-reconstruct", ask_flags.llm, "reconstruct with the model instead of deterministically");

  EvalFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "evaluate a dataset");
  eval->add_option("dataset", eval_flags.dataset, "dataset JSONL")->required();
  eval->add_option("--parallelism", eval_flags.parallelism, "concurrent examples");
  eval->add_flag("--timings", eval_flags.timings, "include per-stage timings in report.json");

  OracleFlags oracle_flags;
  auto* oracle = app.add_subcommand("oracle", "check reconstruction against materialized views");
  oracle->add_option("--count", oracle_flags.count, "generated queries")->check(CLI::NonNegativeNumber);
  oracle->add_flag("--tighten", oracle_flags.tighten, "enable LEFT -> INNER tightening");
  oracle->add_flag("--no-prune", oracle_flags.no_prune, "keep unreferenced lookup joins");
  oracle->add_option("--reconstruct-views", oracle_flags.reconstruct_views,
                     "reconstruct with this catalog instead of the materialized one (mutation checks)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    Context ctx(g);
    if (inspect->parsed()) return cmd_schema_inspect(ctx, out);
    if (render->parsed()) return cmd_schema_render(ctx, render_tables, out);
    if (synth->parsed()) return cmd_views_synth(ctx, views_output, out);
    if (vvalidate->parsed()) return cmd_views_validate(ctx, validate_file, out);
    if (propose->parsed()) return cmd_views_propose(ctx, views_output, out);
    if (ask->parsed()) return cmd_ask(ctx, ask_flags, out, err);
    if (eval->parsed()) return cmd_eval(ctx, eval_flags, out);
    if (oracle->parsed()) return cmd_oracle(ctx, oracle_flags, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace vsql::cli
