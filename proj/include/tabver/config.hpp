#pragma once

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "tabver/encoder.hpp"
#include "tabver/errors.hpp"
#include "tabver/evidence.hpp"
#include "tabver/synth.hpp"
#include "tabver/training.hpp"
#include "tabver/verifier.hpp"

namespace tabver {

inline constexpr int kConfigVersion = 1;

/// Every hyperparameter of the pipeline. Text form is `key = value` lines
/// with a leading `version = 1`; '#' starts a comment.
struct Config {
  EncoderConfig encoder;
  VerifierConfig verifier;
  SearchBudget budget;
  RetrievalConfig retrieval;
  TrainConfig train;
  int workers = 1;

  /// Applies the same seed to every seeded component.
  void set_seed(std::uint64_t s) {
    verifier.seed = s;
    train.seed = s;
  }

  void validate() const {
    encoder.validate();
    verifier.validate();
    budget.validate();
    if (encoder.dim != verifier.dim) throw ConfigError("encoder and verifier dims differ");
    if (retrieval.negative_threshold < 0) throw ConfigError("retrieval.negative_threshold must be >= 0");
    if (retrieval.max_evidence < 1) throw ConfigError("retrieval.max_evidence must be >= 1");
    if (train.batch_size < 1 || train.epochs < 0 || train.lr < 0) throw ConfigError("bad training schedule");
    if (workers < 1) throw ConfigError("workers must be >= 1");
  }

  void set(const std::string& key, const std::string& value) {
    auto& table = setters();
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    try {
      it->second(*this, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("bad value '" + value + "' for " + key);
    }
  }

  std::string to_text() const {
    std::ostringstream o;
    o.precision(17);
    o << "version = " << kConfigVersion << "\n";
    o << "model.dim = " << encoder.dim << "\n";
    o << "encoder.max_sequence_length = " << encoder.max_sequence_length << "\n";
    o << "encoder.truncate = " << (encoder.truncate ? "true" : "false") << "\n";
    o << "encoder.backend = " << (encoder.backend == EncoderBackend::Hashed ? "hashed" : "external") << "\n";
    if (!encoder.external_command.empty()) o << "encoder.command = " << encoder.external_command << "\n";
    o << "encoder.seed = " << encoder.seed << "\n";
    o << "verifier.layers = " << verifier.layers << "\n";
    o << "verifier.theta = " << verifier.theta << "\n";
    o << "verifier.seed = " << verifier.seed << "\n";
    o << "synth.max_depth = " << budget.max_depth << "\n";
    o << "synth.max_programs = " << budget.max_programs << "\n";
    o << "synth.max_intermediates = " << budget.max_intermediates << "\n";
    o << "synth.time_limit_ms = " << budget.time_limit.count() << "\n";
    o << "retrieval.negative_threshold = " << retrieval.negative_threshold << "\n";
    o << "retrieval.max_evidence = " << retrieval.max_evidence << "\n";
    o << "train.lr = " << train.lr << "\n";
    o << "train.batch_size = " << train.batch_size << "\n";
    o << "train.warmup_steps = " << train.warmup_steps << "\n";
    o << "train.epochs = " << train.epochs << "\n";
    o << "train.seed = " << train.seed << "\n";
    o << "train.threads = " << train.threads << "\n";
    o << "workers = " << workers << "\n";
    return o.str();
  }

  static Config parse(std::string_view src) {
    Config c;
    bool versioned = false;
    std::size_t line_no = 0;
    for (auto raw : text::split(src, '\n')) {
      ++line_no;
      auto line = raw;
      if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
      line = text::trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
      std::string key(text::trim(line.substr(0, eq))), value(text::trim(line.substr(eq + 1)));
      if (key == "version") {
        if (value != std::to_string(kConfigVersion)) throw ConfigError("unsupported config version " + value);
        versioned = true;
        continue;
      }
      c.set(key, value);
    }
    if (!versioned) throw ConfigError("config has no version line");
    c.validate();
    return c;
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

 private:
  using Setter = std::function<void(Config&, const std::string&)>;

  static long long as_int(const std::string& v) {
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("not an integer: " + v);
    return out;
  }
  static double as_double(const std::string& v) {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw ConfigError("not a number: " + v);
    return d;
  }
  static bool as_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("not a boolean: " + v);
  }

  static const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> m = {
        {"model.dim", [](Config& c, const std::string& v) { c.encoder.dim = c.verifier.dim = static_cast<int>(as_int(v)); }},
        {"encoder.max_sequence_length", [](Config& c, const std::string& v) { c.encoder.max_sequence_length = static_cast<int>(as_int(v)); }},
        {"encoder.truncate", [](Config& c, const std::string& v) { c.encoder.truncate = as_bool(v); }},
        {"encoder.backend",
         [](Config& c, const std::string& v) {
           if (v == "hashed") c.encoder.backend = EncoderBackend::Hashed;
           else if (v == "external") c.encoder.backend = EncoderBackend::External;
           else throw ConfigError("unknown encoder backend " + v);
         }},
        {"encoder.command", [](Config& c, const std::string& v) { c.encoder.external_command = v; }},
        {"encoder.seed", [](Config& c, const std::string& v) { c.encoder.seed = static_cast<std::uint64_t>(as_int(v)); }},
        {"verifier.layers", [](Config& c, const std::string& v) { c.verifier.layers = static_cast<int>(as_int(v)); }},
        {"verifier.theta", [](Config& c, const std::string& v) { c.verifier.theta = c.train.theta = as_double(v); }},
        {"verifier.seed", [](Config& c, const std::string& v) { c.verifier.seed = static_cast<std::uint64_t>(as_int(v)); }},
        {"synth.max_depth", [](Config& c, const std::string& v) { c.budget.max_depth = static_cast<int>(as_int(v)); }},
        {"synth.max_programs", [](Config& c, const std::string& v) { c.budget.max_programs = as_int(v); }},
        {"synth.max_intermediates", [](Config& c, const std::string& v) { c.budget.max_intermediates = as_int(v); }},
        {"synth.time_limit_ms", [](Config& c, const std::string& v) { c.budget.time_limit = std::chrono::milliseconds(as_int(v)); }},
        {"retrieval.negative_threshold", [](Config& c, const std::string& v) { c.retrieval.negative_threshold = as_int(v); }},
        {"retrieval.max_evidence", [](Config& c, const std::string& v) { c.retrieval.max_evidence = static_cast<std::size_t>(as_int(v)); }},
        {"train.lr", [](Config& c, const std::string& v) { c.train.lr = as_double(v); }},
        {"train.batch_size", [](Config& c, const std::string& v) { c.train.batch_size = static_cast<int>(as_int(v)); }},
        {"train.warmup_steps", [](Config& c, const std::string& v) { c.train.warmup_steps = static_cast<int>(as_int(v)); }},
        {"train.epochs", [](Config& c, const std::string& v) { c.train.epochs = static_cast<int>(as_int(v)); }},
        {"train.seed", [](Config& c, const std::string& v) { c.train.seed = static_cast<std::uint64_t>(as_int(v)); }},
        {"train.threads", [](Config& c, const std::string& v) { c.train.threads = static_cast<int>(as_int(v)); }},
        {"workers", [](Config& c, const std::string& v) { c.workers = static_cast<int>(as_int(v)); }},
    };
    return m;
  }
};

/// The paper's fine-tuning schedule, kept for reference runs.
inline Config paper_preset() {
  Config c;
  c.encoder.dim = c.verifier.dim = 256;  // 768 / 3 keeps D at BERT width
  c.train.lr = 1e-5;
  c.train.batch_size = 8;
  c.train.warmup_steps = 3000;
  return c;
}

}  // namespace tabver
