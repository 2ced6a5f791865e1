#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabver/errors.hpp"
#include "tabver/table.hpp"
#include "tabver/verifier.hpp"

namespace tabver {

enum class Channel { Simple, Complex, Unknown };

inline const char* to_string(Channel c) {
  switch (c) {
    case Channel::Simple: return "simple";
    case Channel::Complex: return "complex";
    default: return "unknown";
  }
}

/// One manifest record: a statement about a table with its gold label.
struct Sample {
  std::string table_id;
  std::string statement;
  Label label = Label::Entailed;
  Channel channel = Channel::Unknown;
  std::string caption;
  std::size_t line = 0;  // 1-based manifest line
};

namespace detail {

inline Label parse_label(const nlohmann::json& v) {
  if (v.is_number_integer()) {
    auto i = v.get<long long>();
    if (i == 1) return Label::Entailed;
    if (i == 0) return Label::Refuted;
  } else if (v.is_boolean()) {
    return v.get<bool>() ? Label::Entailed : Label::Refuted;
  } else if (v.is_string()) {
    std::string s = text::normalize(v.get<std::string>());
    if (s == "entailed" || s == "1" || s == "true") return Label::Entailed;
    if (s == "refuted" || s == "0" || s == "false") return Label::Refuted;
  }
  throw std::invalid_argument("label must be ENTAILED/REFUTED, 1/0 or true/false");
}

inline Channel parse_channel(const nlohmann::json& v) {
  std::string s = text::normalize(v.get<std::string>());
  if (s == "simple") return Channel::Simple;
  if (s == "complex") return Channel::Complex;
  if (s == "unknown" || s.empty()) return Channel::Unknown;
  throw std::invalid_argument("channel must be simple, complex or unknown");
}

}  // namespace detail

/// First existing file among `dir/id`, `dir/id.csv`, `dir/id.tsv`, `dir/id.txt`.
inline std::optional<std::filesystem::path> resolve_table(const std::filesystem::path& dir, const std::string& id) {
  for (const char* ext : {"", ".csv", ".tsv", ".txt"}) {
    auto p = dir / (id + ext);
    std::error_code ec;
    if (std::filesystem::is_regular_file(p, ec)) return p;
  }
  return std::nullopt;
}

inline std::vector<Sample> parse_manifest(std::istream& in) {
  std::vector<Sample> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (text::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Sample s;
      s.table_id = j.at("table_id").get<std::string>();
      s.statement = j.at("statement").get<std::string>();
      s.label = detail::parse_label(j.at("label"));
      if (j.contains("channel") && !j["channel"].is_null()) s.channel = detail::parse_channel(j["channel"]);
      if (j.contains("caption") && !j["caption"].is_null()) s.caption = j["caption"].get<std::string>();
      if (s.table_id.empty()) throw std::invalid_argument("empty table_id");
      if (text::trim(s.statement).empty()) throw std::invalid_argument("empty statement");
      s.line = no;
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw ManifestParseError(no, e.what());
    } catch (const std::invalid_argument& e) {
      throw ManifestParseError(no, e.what());
    }
  }
  return out;
}

/// Reads a JSON-lines manifest; with a tables directory, every table id must
/// resolve to a file (all misses are reported together).
inline std::vector<Sample> load_dataset(const std::filesystem::path& manifest,
                                        const std::optional<std::filesystem::path>& tables_dir = std::nullopt) {
  std::ifstream in(manifest);
  if (!in) throw ManifestParseError(0, "cannot open " + manifest.string());
  auto samples = parse_manifest(in);
  if (tables_dir) {
    std::vector<std::size_t> missing;
    std::string first;
    std::map<std::string, bool> seen;
    for (const auto& s : samples) {
      auto [it, fresh] = seen.emplace(s.table_id, false);
      if (fresh) it->second = resolve_table(*tables_dir, s.table_id).has_value();
      if (!it->second) {
        if (missing.empty()) first = s.table_id;
        missing.push_back(s.line);
      }
    }
    if (!missing.empty()) {
      std::string lines;
      for (std::size_t i = 0; i < missing.size() && i < 10; ++i) lines += (i ? "," : "") + std::to_string(missing[i]);
      throw MissingTableError(missing, std::to_string(missing.size()) + " samples reference missing tables (first '" + first +
                                           "', lines " + lines + (missing.size() > 10 ? ",..." : "") + ")");
    }
  }
  return samples;
}

/// Thread-safe cache of tables loaded from a directory.
class TableStore {
 public:
  explicit TableStore(std::filesystem::path dir, char delim = kDefaultDelimiter) : dir_(std::move(dir)), delim_(delim) {}

  std::shared_ptr<const Table> get(const std::string& id) {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(id); it != cache_.end()) return it->second;
    auto path = resolve_table(dir_, id);
    if (!path) throw MissingTableError({}, "no table file for '" + id + "' in " + dir_.string());
    std::ifstream in(*path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto t = std::make_shared<const Table>(load_table(bytes, delim_, id));
    cache_.emplace(id, t);
    return t;
  }

  /// Adds an in-memory table under its id.
  void put(Table t) {
    std::lock_guard lock(mu_);
    std::string id = t.id();
    cache_[id] = std::make_shared<const Table>(std::move(t));
  }

 private:
  std::filesystem::path dir_;
  char delim_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const Table>> cache_;
};

/// Sample counts of a TABFACT-shaped directory holding `<split>.jsonl`.
struct DatasetSummary {
  std::map<std::string, std::size_t> splits;  // only splits whose file exists
  std::map<Channel, std::size_t> test_channels;
};

inline DatasetSummary summarize_dataset(const std::filesystem::path& dir) {
  DatasetSummary out;
  for (const char* split : {"train", "val", "test", "small_test"}) {
    auto path = dir / (std::string(split) + ".jsonl");
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) continue;
    auto samples = load_dataset(path);
    out.splits[split] = samples.size();
    if (std::string(split) == "test")
      for (const auto& s : samples) out.test_channels[s.channel]++;
  }
  return out;
}

}  // namespace tabver
