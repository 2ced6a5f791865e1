#pragma once

#include <atomic>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tabver/checkpoint.hpp"
#include "tabver/dataset.hpp"
#include "tabver/encoder.hpp"
#include "tabver/evidence.hpp"
#include "tabver/graph.hpp"
#include "tabver/synth.hpp"
#include "tabver/training.hpp"
#include "tabver/verifier.hpp"

namespace tabver {

/// A statement/table pair taken through synthesis, retrieval and encoding.
struct Prepared {
  std::size_t programs = 0;
  bool search_truncated = false;
  EvidenceSet evidence;
  VerifierInput input;
};

/// Drops trailing evidence until the evidence-statement pair fits the
/// encoder's sequence limit.
inline void fit_evidence(EvidenceSet& ev, std::string_view statement, const EncoderConfig& cfg) {
  auto limit = static_cast<std::size_t>(cfg.max_sequence_length);
  while (!ev.items.empty() && pair_length(statement, linearize_evidence(ev).text) > limit) ev.items.pop_back();
}

inline Prepared prepare(std::string_view statement, const Table& table, const Model& m) {
  const Config& cfg = m.config;
  Prepared out;
  ProgramSet ps = synthesize(statement, table, cfg.budget);
  out.programs = ps.items.size();
  out.search_truncated = ps.truncated;
  out.evidence = retrieve(ps, cfg.retrieval);
  fit_evidence(out.evidence, statement, cfg.encoder);

  std::size_t stmt_tokens = tokenize(statement).size();
  std::size_t room = static_cast<std::size_t>(cfg.encoder.max_sequence_length);
  room = room > stmt_tokens + 3 ? room - stmt_tokens - 3 : 0;
  std::string table_text = linearize_table(table, room);
  Span stmt{0, 0, statement.size()};
  Encoding enc_t = encode_pair(statement, table_text, cfg.encoder, m.encoder);
  out.input.cls_table = enc_t.summary;

  if (out.evidence.items.empty()) {
    Encoding enc_e = encode_pair(statement, "", cfg.encoder, m.encoder);
    out.input.cls_evidence = enc_e.summary;
    out.input.h_s = node_init(enc_t, stmt);
    return out;
  }
  LinearizedEvidence lin = linearize_evidence(out.evidence);
  Encoding enc_e = encode_pair(statement, lin.text, cfg.encoder, m.encoder, lin.node_spans);
  out.input.cls_evidence = enc_e.summary;
  out.input.h_s = node_init(enc_e, stmt);
  LogicGraph g = build_graph(out.evidence);
  out.input.node_h_p = Mat(static_cast<Eigen::Index>(g.nodes().size()), cfg.encoder.dim);
  for (std::size_t i = 0; i < lin.node_spans.size(); ++i)
    out.input.node_h_p.row(static_cast<Eigen::Index>(i)) = node_init(enc_e, lin.node_spans[i]).transpose();
  out.input.graph = std::move(g);
  return out;
}

struct Verdict {
  Label label = Label::Refuted;
  double p_entailed = 0.0;
  EvidenceSet evidence;
  std::vector<double> scores;
  std::vector<std::size_t> pruned;
};

inline Verdict verify(std::string_view statement, const Table& table, const Model& m) {
  Prepared p = prepare(statement, table, m);
  ForwardTrace tr = forward(p.input, m.verifier, m.config.verifier.theta);
  Verdict v;
  v.label = predict(tr.probs);
  v.p_entailed = tr.probs(0);
  v.evidence = std::move(p.evidence);
  v.scores = std::move(tr.scores);
  v.pruned = std::move(tr.pruned);
  return v;
}

inline Table with_sample_caption(const Table& t, const Sample& s) {
  return s.caption.empty() ? t : t.with_caption(s.caption);
}

inline Verdict verify_one(const Sample& s, const Table& table, const Model& m) {
  return verify(s.statement, with_sample_caption(table, s), m);
}

struct Prediction {
  std::size_t line = 0;
  std::string table_id;
  std::string statement;
  Channel channel = Channel::Unknown;
  Label gold = Label::Entailed;
  Label predicted = Label::Refuted;
  double p_entailed = 0.0;
  bool failed = false;
  std::string error;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"line", line},         {"table_id", table_id},         {"statement", statement},
                        {"channel", to_string(channel)}, {"gold", to_string(gold)}, {"predicted", to_string(predicted)},
                        {"p_entailed", p_entailed}, {"failed", failed}};
    if (failed) j["error"] = error;
    return j;
  }
};

struct Tally {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

struct EvalReport {
  std::string split;
  Tally overall;
  std::map<Channel, Tally> channels;
  std::size_t confusion[2][2] = {{0, 0}, {0, 0}};  // [gold][predicted]
  std::size_t failures = 0;
  std::vector<Prediction> predictions;

  double accuracy() const { return overall.accuracy(); }

  void add(Prediction p) {
    bool ok = p.gold == p.predicted;
    overall.total++;
    overall.correct += ok;
    auto& c = channels[p.channel];
    c.total++;
    c.correct += ok;
    confusion[static_cast<int>(p.gold)][static_cast<int>(p.predicted)]++;
    failures += p.failed;
    predictions.push_back(std::move(p));
  }

  nlohmann::json summary_json() const {
    nlohmann::json ch = nlohmann::json::object();
    for (const auto& [c, t] : channels) ch[to_string(c)] = {{"total", t.total}, {"correct", t.correct}, {"accuracy", t.accuracy()}};
    return {{"split", split},
            {"total", overall.total},
            {"correct", overall.correct},
            {"accuracy", accuracy()},
            {"failures", failures},
            {"channels", ch},
            {"confusion", {{"entailed", {confusion[0][0], confusion[0][1]}}, {"refuted", {confusion[1][0], confusion[1][1]}}}}};
  }
};

/// Plain-text report with the usual benchmark columns. `splits` maps
/// "val", "test" and "small_test" to their reports; absent cells print "-".
inline std::string table1_report(const std::string& model_name, const std::map<std::string, EvalReport>& splits) {
  auto pct = [](double a) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(1) << 100.0 * a;
    return o.str();
  };
  auto cell = [&](const std::string& split, std::optional<Channel> ch) -> std::string {
    auto it = splits.find(split);
    if (it == splits.end()) return "-";
    if (!ch) return pct(it->second.accuracy());
    auto c = it->second.channels.find(*ch);
    if (c == it->second.channels.end() || c->second.total == 0) return "-";
    return pct(c->second.accuracy());
  };
  std::vector<std::string> head = {"Model", "Val", "Test", "Test (simple)", "Test (complex)", "Small Test"};
  std::vector<std::string> row = {model_name,
                                  cell("val", std::nullopt),
                                  cell("test", std::nullopt),
                                  cell("test", Channel::Simple),
                                  cell("test", Channel::Complex),
                                  cell("small_test", std::nullopt)};
  std::ostringstream o;
  auto line = [&](const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      std::size_t w = std::max(head[i].size(), row[i].size());
      o << (i ? " | " : "") << std::setw(static_cast<int>(w)) << (i ? std::right : std::left) << cols[i];
    }
    o << "\n";
  };
  line(head);
  for (std::size_t i = 0; i < head.size(); ++i) {
    std::size_t w = std::max(head[i].size(), row[i].size());
    o << (i ? "-+-" : "") << std::string(w, '-');
  }
  o << "\n";
  line(row);
  return o.str();
}

namespace detail {

/// Runs fn(i) for i in [0, n) on `workers` threads.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), std::max<std::size_t>(n, 1));
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Verifies every sample; a failing sample counts as REFUTED and is flagged.
inline EvalReport evaluate(const std::vector<Sample>& samples, TableStore& store, const Model& m,
                           const std::string& split = "test") {
  std::vector<Prediction> preds(samples.size());
  detail::parallel_for(samples.size(), m.config.workers, [&](std::size_t i) {
    const Sample& s = samples[i];
    Prediction& p = preds[i];
    p.line = s.line;
    p.table_id = s.table_id;
    p.statement = s.statement;
    p.channel = s.channel;
    p.gold = s.label;
    try {
      Verdict v = verify_one(s, *store.get(s.table_id), m);
      p.predicted = v.label;
      p.p_entailed = v.p_entailed;
    } catch (const std::exception& e) {
      p.predicted = Label::Refuted;
      p.failed = true;
      p.error = e.what();
    }
  });
  EvalReport r;
  r.split = split;
  for (auto& p : preds) r.add(std::move(p));
  return r;
}

/// Encodes samples for training; samples that fail to prepare are skipped
/// and their manifest lines returned through `skipped`.
inline std::vector<Example> prepare_examples(const std::vector<Sample>& samples, TableStore& store, const Model& m,
                                             std::vector<std::size_t>* skipped = nullptr) {
  std::vector<std::optional<Example>> slots(samples.size());
  detail::parallel_for(samples.size(), m.config.workers, [&](std::size_t i) {
    try {
      const Sample& s = samples[i];
      Prepared p = prepare(s.statement, with_sample_caption(*store.get(s.table_id), s), m);
      slots[i] = Example{std::move(p.input), s.label};
    } catch (const Error&) {
    }
  });
  std::vector<Example> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) out.push_back(std::move(*slots[i]));
    else if (skipped) skipped->push_back(samples[i].line);
  }
  return out;
}

}  // namespace tabver
