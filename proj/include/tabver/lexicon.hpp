#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tabver/catalog.hpp"
#include "tabver/errors.hpp"
#include "tabver/text.hpp"

namespace tabver {

inline std::vector<std::string> statement_words(std::string_view s) {
  std::vector<std::string> out;
  for (auto& w : text::words(s)) out.push_back(std::move(w.text));
  return out;
}

/// Keyword lexicon mapping statement phrases to catalog functions. Loaded from
/// a versioned text file; see data/trigger_lexicon.txt.
class TriggerLexicon {
 public:
  struct Entry {
    std::vector<std::vector<std::string>> phrases;
    std::vector<std::string> functions;
  };

  static TriggerLexicon parse(std::string_view source) {
    TriggerLexicon lex;
    std::size_t line_no = 0;
    for (auto raw : text::split(source, '\n')) {
      ++line_no;
      auto line = text::trim(raw);
      if (line.empty() || line.front() == '#') continue;
      auto where = [&](const std::string& msg) { return ConfigError("lexicon line " + std::to_string(line_no) + ": " + msg); };
      if (line.starts_with("version")) {
        lex.version_ = std::stoi(std::string(text::trim(line.substr(7))));
        continue;
      }
      if (line.starts_with("base:")) {
        for (auto& f : words_of(line.substr(5))) lex.base_.insert(checked(f, where));
        continue;
      }
      auto arrow = line.find("=>");
      if (arrow == std::string_view::npos) throw where("expected 'phrases => functions'");
      Entry e;
      for (auto phrase : text::split(line.substr(0, arrow), '|')) {
        auto ws = statement_words(phrase);
        if (ws.empty()) throw where("empty phrase");
        e.phrases.push_back(std::move(ws));
      }
      for (auto& f : words_of(line.substr(arrow + 2))) e.functions.push_back(checked(f, where));
      if (e.functions.empty()) throw where("no functions");
      lex.entries_.push_back(std::move(e));
    }
    if (lex.version_ <= 0) throw ConfigError("lexicon has no version line");
    return lex;
  }

  static TriggerLexicon load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open lexicon " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  /// The lexicon shipped in data/trigger_lexicon.txt.
  static const TriggerLexicon& builtin() {
    static const TriggerLexicon lex = parse(
#include "tabver/default_lexicon.inc"
    );
    return lex;
  }

  int version() const { return version_; }
  const std::set<std::string>& base() const { return base_; }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Functions enabled for a statement: the base set plus every function
  /// whose phrase occurs as a contiguous word sequence.
  std::set<std::string> trigger_functions(std::string_view statement) const {
    std::set<std::string> out = base_;
    auto words = statement_words(statement);
    for (const auto& e : entries_) {
      bool hit = false;
      for (const auto& ph : e.phrases) {
        for (std::size_t i = 0; !hit && i + ph.size() <= words.size(); ++i)
          hit = std::equal(ph.begin(), ph.end(), words.begin() + static_cast<std::ptrdiff_t>(i));
        if (hit) break;
      }
      if (hit) out.insert(e.functions.begin(), e.functions.end());
    }
    return out;
  }

 private:
  static std::vector<std::string> words_of(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
  }

  template <typename Where>
  static std::string checked(const std::string& f, Where&& where) {
    if (!find_function(f) || f == kAllRows) throw where("unknown function '" + f + "'");
    return f;
  }

  int version_ = 0;
  std::set<std::string> base_;
  std::vector<Entry> entries_;
};

inline std::set<std::string> trigger_functions(std::string_view statement) {
  return TriggerLexicon::builtin().trigger_functions(statement);
}

}  // namespace tabver
