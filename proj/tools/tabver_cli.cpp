#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tabver/tabver.hpp"

using namespace tabver;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string tables;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string checkpoint;
  std::string out;
  std::optional<int> workers;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--tables", c.tables, "Directory of table files");
  app->add_option("--config", c.config, "Versioned key = value config file");
  app->add_option("--seed", c.seed, "Seed for every seeded component");
  app->add_option("--checkpoint", c.checkpoint, "Model checkpoint");
  app->add_option("--out", c.out, "Output file (stdout when omitted)");
  app->add_option("--workers", c.workers, "Worker threads");
}

Config load_config(const Common& c) {
  Config cfg = c.config.empty() ? Config{} : Config::load(c.config);
  if (c.seed) cfg.set_seed(*c.seed);
  if (c.workers) cfg.workers = *c.workers;
  cfg.validate();
  return cfg;
}

Model load_model(const Common& c) {
  if (c.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  Model m = load_checkpoint(c.checkpoint);
  if (c.workers) m.config.workers = *c.workers;
  return m;
}

/// A path to a table file, or an id resolved under --tables.
Table load_table_arg(const std::string& arg, const Common& c) {
  if (fs::is_regular_file(arg)) return load_table_file(arg);
  if (!c.tables.empty())
    if (auto p = resolve_table(c.tables, arg)) return load_table_file(*p);
  throw MissingTableError({}, "no table '" + arg + "'");
}

std::string read_all(const std::string& path) {
  if (path.empty() || path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Runs `fn` against --out or stdout.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  fn(f);
}

/// Program lines, skipping blanks and '#' comments; an optional leading
/// `true`/`false` column (synthesize output) is kept as the label.
std::vector<ProgramItem> read_program_lines(const std::string& src) {
  std::vector<ProgramItem> out;
  for (auto raw : text::split(src, '\n')) {
    auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    bool label = true;
    if (auto tab = line.find('\t'); tab != std::string_view::npos) {
      auto head = text::trim(line.substr(0, tab));
      if (head == "false") label = false;
      else if (head != "true") throw SyntaxError(0, "bad label column '" + std::string(head) + "'");
      line = line.substr(tab + 1);
    }
    out.push_back({parse_program(line), label});
  }
  return out;
}

void print_epoch(int epoch, const EpochStats& s, double secs) {
  std::cerr << "epoch " << epoch + 1 << "  loss " << s.loss << "  train-acc " << s.accuracy << "  " << secs << "s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Table fact verification with logic-level evidence"};
  app.require_subcommand(1);
  Common c;

  auto* exec = app.add_subcommand("exec", "Execute a program on a table");
  std::string table_arg, program_text;
  exec->add_option("--table", table_arg, "Table file or id")->required();
  exec->add_option("--program", program_text, "Program text")->required();
  add_common(exec, c);

  auto* synth = app.add_subcommand("synthesize", "Enumerate labeled programs for a statement");
  std::string statement;
  std::optional<int> max_depth;
  std::optional<long> max_programs, max_intermediates, time_limit;
  synth->add_option("--table", table_arg, "Table file or id")->required();
  synth->add_option("--statement", statement, "Statement text")->required();
  synth->add_option("--max-depth", max_depth);
  synth->add_option("--max-programs", max_programs);
  synth->add_option("--max-intermediates", max_intermediates);
  synth->add_option("--time-limit-ms", time_limit);
  add_common(synth, c);

  auto* retr = app.add_subcommand("retrieve", "Select evidence from synthesize output");
  std::string in_path;
  std::optional<long> neg_threshold;
  std::optional<std::size_t> max_evidence;
  retr->add_option("--in", in_path, "synthesize output (stdin when omitted)");
  retr->add_option("--negative-threshold", neg_threshold);
  retr->add_option("--max-evidence", max_evidence);
  add_common(retr, c);

  auto* graph = app.add_subcommand("graph", "Dump the logic graph of an evidence file");
  std::optional<std::size_t> remove_id;
  graph->add_option("--in", in_path, "Evidence file, one program per line (stdin when omitted)");
  graph->add_option("--remove", remove_id, "Remove this node with rewiring before dumping");
  add_common(graph, c);

  auto* trn = app.add_subcommand("train", "Train the verifier on a manifest");
  std::string train_manifest, val_manifest;
  std::optional<int> epochs;
  trn->add_option("--train", train_manifest, "Training manifest (JSON lines)")->required();
  trn->add_option("--val", val_manifest, "Validation manifest");
  trn->add_option("--epochs", epochs);
  add_common(trn, c);

  auto* ver = app.add_subcommand("verify", "Verify one statement against one table");
  ver->add_option("--table", table_arg, "Table file or id")->required();
  ver->add_option("--statement", statement, "Statement text")->required();
  add_common(ver, c);

  auto* ev = app.add_subcommand("eval", "Evaluate manifests and print the report");
  std::vector<std::string> manifests;
  std::string report_path, model_name = "verifier";
  ev->add_option("--manifest", manifests, "split=PATH (splits: val, test, small_test)")->required();
  ev->add_option("--report", report_path, "Write the machine-readable report here");
  ev->add_option("--name", model_name, "Row label in the report");
  add_common(ev, c);

  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic labeled corpus");
  SyntheticSpec spec;
  gen->add_option("--size", spec.size, "Number of samples");
  gen->add_option("--templates", spec.templates, "Subset of count,min,max,only,greater")->delimiter(',');
  add_common(gen, c);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*exec) {
      Table t = load_table_arg(table_arg, c);
      Value v = execute(parse_program(program_text), t);
      with_output(c.out, [&](std::ostream& o) { o << render_value(v) << "\n"; });
    } else if (*synth) {
      Config cfg = load_config(c);
      if (max_depth) cfg.budget.max_depth = *max_depth;
      if (max_programs) cfg.budget.max_programs = *max_programs;
      if (max_intermediates) cfg.budget.max_intermediates = *max_intermediates;
      if (time_limit) cfg.budget.time_limit = std::chrono::milliseconds(*time_limit);
      Table t = load_table_arg(table_arg, c);
      ProgramSet ps = synthesize(statement, t, cfg.budget);
      with_output(c.out, [&](std::ostream& o) {
        if (ps.truncated) o << "# truncated\n";
        for (const auto& it : ps.items) o << (it.label ? "true" : "false") << '\t' << render_program(it.program) << "\n";
      });
    } else if (*retr) {
      Config cfg = load_config(c);
      if (neg_threshold) cfg.retrieval.negative_threshold = *neg_threshold;
      if (max_evidence) cfg.retrieval.max_evidence = *max_evidence;
      ProgramSet ps;
      ps.items = read_program_lines(read_all(in_path));
      EvidenceSet e = retrieve(ps, cfg.retrieval);
      with_output(c.out, [&](std::ostream& o) {
        o << "# selected=" << e.counts.selected << " after_decompose=" << e.counts.after_decompose
          << " after_filter=" << e.counts.after_filter << "\n";
        for (const auto& p : e.items) o << render_program(p) << "\n";
      });
    } else if (*graph) {
      std::vector<Program> programs;
      for (auto& it : read_program_lines(read_all(in_path))) programs.push_back(std::move(it.program));
      LogicGraph g = build_graph(programs);
      if (remove_id) g = remove_node_rewire(g, *remove_id);
      with_output(c.out, [&](std::ostream& o) { o << g.dump(); });
    } else if (*trn) {
      if (c.tables.empty()) throw ConfigError("--tables is required");
      if (c.out.empty()) throw ConfigError("--out names the checkpoint to write");
      Model m = c.checkpoint.empty() ? Model::init(load_config(c)) : load_model(c);
      if (epochs) m.config.train.epochs = *epochs;
      TableStore store(c.tables);
      std::vector<std::size_t> skipped;
      auto data = prepare_examples(load_dataset(train_manifest, c.tables), store, m, &skipped);
      std::cerr << "training on " << data.size() << " samples (" << skipped.size() << " skipped)\n";
      std::vector<Sample> val;
      if (!val_manifest.empty()) val = load_dataset(val_manifest, c.tables);
      auto t0 = std::chrono::steady_clock::now();
      train(data, m.verifier, m.config.train, [&](int epoch, const EpochStats& s) {
        print_epoch(epoch, s, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        if (!val.empty()) std::cerr << "  val-acc " << evaluate(val, store, m, "val").accuracy() << "\n";
        return true;
      });
      save_checkpoint(c.out, m);
    } else if (*ver) {
      Model m = load_model(c);
      Table t = load_table_arg(table_arg, c);
      Verdict v = verify(statement, t, m);
      nlohmann::json ev_json = nlohmann::json::array();
      for (const auto& p : v.evidence.items) ev_json.push_back(render_program(p));
      nlohmann::json j = {{"statement", statement}, {"table_id", t.id()},       {"predicted", to_string(v.label)},
                          {"p_entailed", v.p_entailed}, {"evidence", ev_json}, {"pruned", v.pruned}};
      with_output(c.out, [&](std::ostream& o) { o << j.dump() << "\n"; });
    } else if (*ev) {
      if (c.tables.empty()) throw ConfigError("--tables is required");
      Model m = load_model(c);
      TableStore store(c.tables);
      std::map<std::string, EvalReport> reports;
      for (const auto& spec_arg : manifests) {
        auto eq = spec_arg.find('=');
        std::string split = eq == std::string::npos ? "test" : spec_arg.substr(0, eq);
        std::string path = eq == std::string::npos ? spec_arg : spec_arg.substr(eq + 1);
        reports[split] = evaluate(load_dataset(path, c.tables), store, m, split);
      }
      if (!c.out.empty())
        with_output(c.out, [&](std::ostream& o) {
          for (const auto& [split, r] : reports)
            for (const auto& p : r.predictions) {
              auto j = p.to_json();
              j["split"] = split;
              o << j.dump() << "\n";
            }
        });
      nlohmann::json record = {{"model", model_name}, {"splits", nlohmann::json::object()}};
      for (const auto& [split, r] : reports) record["splits"][split] = r.summary_json();
      std::cout << table1_report(model_name, reports);
      for (const auto& [split, r] : reports)
        if (r.failures) std::cout << split << ": " << r.failures << " samples failed and were scored as REFUTED\n";
      if (report_path.empty()) std::cout << record.dump() << "\n";
      else with_output(report_path, [&](std::ostream& o) { o << record.dump(2) << "\n"; });
    } else if (*gen) {
      if (c.out.empty()) throw ConfigError("--out names the corpus directory");
      auto corpus = gen_synthetic(spec, c.seed.value_or(1));
      write_corpus(corpus, c.out);
      std::cerr << "wrote " << corpus.samples.size() << " samples to " << c.out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
