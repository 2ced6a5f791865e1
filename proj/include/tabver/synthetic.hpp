#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabver/dataset.hpp"
#include "tabver/errors.hpp"
#include "tabver/executor.hpp"
#include "tabver/program.hpp"
#include "tabver/table.hpp"

namespace tabver {

/// Corpus shape for gen_synthetic. Templates cycle in order and labels
/// alternate per cycle, so any prefix of 2 * |templates| samples is balanced.
struct SyntheticSpec {
  std::size_t size = 500;
  std::vector<std::string> templates = {"count", "min", "max", "only", "greater"};
  std::size_t min_rows = 4;
  std::size_t max_rows = 8;

  void validate() const {
    static const std::set<std::string> known = {"count", "min", "max", "only", "greater"};
    if (templates.empty()) throw ConfigError("synthetic spec needs at least one template");
    for (const auto& t : templates)
      if (!known.count(t)) throw ConfigError("unknown synthetic template '" + t + "'");
    if (min_rows < 2 || max_rows < min_rows || max_rows > 12) throw ConfigError("synthetic rows must satisfy 2 <= min <= max <= 12");
  }
};

struct SyntheticCorpus {
  std::vector<Table> tables;
  std::vector<Sample> samples;
  std::vector<std::string> programs;  // generating program per sample
};

namespace detail {

inline const std::vector<std::string>& synthetic_names() {
  static const std::vector<std::string> v = {"alice", "bruno",  "carla", "dmitri", "elena", "farid", "greta",
                                             "hiro",  "ingrid", "jonas", "kemal",  "lucia", "marek", "nadia",
                                             "oscar", "priya",  "quinn", "rosa",   "stefan", "tomas"};
  return v;
}

inline const std::vector<std::string>& synthetic_teams() {
  static const std::vector<std::string> v = {"lions", "tigers", "bears", "wolves", "hawks", "sharks"};
  return v;
}

class SyntheticBuilder {
 public:
  SyntheticBuilder(const SyntheticSpec& spec, std::uint64_t seed) : spec_(spec), rng_(seed) {}

  void make(std::size_t i, const std::string& kind, bool truth, SyntheticCorpus& out) {
    std::size_t n = uniform(spec_.min_rows, spec_.max_rows);
    auto names = pick(synthetic_names(), n);
    auto pool = pick(synthetic_teams(), 4);
    std::vector<std::string> teams(n);
    for (auto& t : teams) t = pool[uniform(0, 2)];
    std::vector<long> points = distinct_points(n);

    std::string statement, program;
    auto team_count = [&](const std::string& team) { return std::count(teams.begin(), teams.end(), team); };
    if (kind == "count") {
      const std::string& team = teams[uniform(0, n - 1)];
      long c = team_count(team) + (truth ? 0 : 1);
      statement = "there are " + std::to_string(c) + " players from " + team;
      program = "eq { count { filter_eq { all_rows ; team ; " + team + " } } ; " + std::to_string(c) + " }";
    } else if (kind == "min" || kind == "max") {
      long v = kind == "min" ? *std::min_element(points.begin(), points.end())
                             : *std::max_element(points.begin(), points.end());
      if (!truth) v += 1;
      statement = std::string("the ") + (kind == "min" ? "smallest" : "largest") + " points is " + std::to_string(v);
      program = "eq { " + kind + " { all_rows ; points } ; " + std::to_string(v) + " }";
    } else if (kind == "only") {
      std::string team;
      if (truth) {
        for (const auto& t : teams)
          if (team_count(t) == 1) team = t;
        if (team.empty()) {
          team = pool[3];
          teams[uniform(0, n - 1)] = team;
        }
      } else {
        for (const auto& t : teams)
          if (team_count(t) >= 2) team = t;
      }
      statement = "only one player is from " + team;
      program = "only { filter_eq { all_rows ; team ; " + team + " } }";
    } else {
      std::size_t a = uniform(0, n - 1);
      long gap = static_cast<long>(uniform(1, 5));
      long v = truth ? points[a] - gap : points[a] + gap;
      statement = "the points of " + names[a] + " is greater than " + std::to_string(v);
      program = "greater { hop { filter_eq { all_rows ; name ; " + names[a] + " } ; points } ; " + std::to_string(v) + " }";
    }

    std::vector<std::vector<std::string>> rows;
    for (std::size_t r = 0; r < n; ++r)
      rows.push_back({names[r], std::to_string(points[r]), std::to_string(uniform(1990, 2020)), teams[r]});
    char id[32];
    std::snprintf(id, sizeof id, "syn_%05zu", i);
    Table t = Table::make(id, "season " + std::to_string(i) + " standings", {"name", "points", "year", "team"}, std::move(rows));

    Program p = parse_program(program);
    BoolResult r = execute_bool(p, t);
    if (r.discarded || r.value != truth)
      throw Error("synthetic template '" + kind + "' produced a mislabeled sample: " + program);

    Sample s;
    s.table_id = t.id();
    s.statement = statement;
    s.label = truth ? Label::Entailed : Label::Refuted;
    s.channel = kind == "greater" || kind == "count" ? Channel::Complex : Channel::Simple;
    s.caption = t.caption();
    s.line = i + 1;
    out.tables.push_back(std::move(t));
    out.samples.push_back(std::move(s));
    out.programs.push_back(std::move(program));
  }

 private:
  const SyntheticSpec& spec_;
  std::mt19937_64 rng_;

  std::size_t uniform(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }

  std::vector<std::string> pick(const std::vector<std::string>& from, std::size_t k) {
    std::vector<std::string> v = from;
    std::shuffle(v.begin(), v.end(), rng_);
    v.resize(k);
    return v;
  }

  // two-digit values keep points clear of counts and years
  std::vector<long> distinct_points(std::size_t n) {
    std::vector<long> all;
    for (long v = 10; v < 99; ++v) all.push_back(v);
    std::shuffle(all.begin(), all.end(), rng_);
    all.resize(n);
    return all;
  }
};

}  // namespace detail

inline SyntheticCorpus gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  SyntheticCorpus out;
  detail::SyntheticBuilder b(spec, seed);
  std::size_t k = spec.templates.size();
  for (std::size_t i = 0; i < spec.size; ++i) {
    bool truth = (i / k) % 2 == 0;
    b.make(i, spec.templates[i % k], truth, out);
  }
  return out;
}

/// Writes `tables/<id>.csv` and `manifest.jsonl` under `dir`.
inline void write_corpus(const SyntheticCorpus& c, const std::filesystem::path& dir, char delim = kDefaultDelimiter) {
  std::filesystem::create_directories(dir / "tables");
  for (const auto& t : c.tables) {
    std::ofstream f(dir / "tables" / (t.id() + ".csv"), std::ios::binary);
    f << serialize_table(t, delim);
    if (!f) throw Error("cannot write table " + t.id());
  }
  std::ofstream m(dir / "manifest.jsonl", std::ios::binary);
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    const Sample& s = c.samples[i];
    nlohmann::json j = {{"table_id", s.table_id}, {"statement", s.statement}, {"label", s.label == Label::Entailed ? 1 : 0},
                        {"channel", to_string(s.channel)}, {"caption", s.caption}, {"program", c.programs[i]}};
    m << j.dump() << "\n";
  }
  if (!m) throw Error("cannot write manifest");
}

}  // namespace tabver
