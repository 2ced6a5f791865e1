#pragma once

#include <Eigen/Dense>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tabver/errors.hpp"
#include "tabver/evidence.hpp"
#include "tabver/graph.hpp"
#include "tabver/table.hpp"
#include "tabver/text.hpp"

namespace tabver {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class EncoderBackend { Hashed, External };

struct EncoderConfig {
  int dim = 64;
  int max_sequence_length = 512;
  bool truncate = true;
  EncoderBackend backend = EncoderBackend::Hashed;
  std::string external_command;  // shell command for the External backend
  std::uint64_t seed = 17;

  void validate() const {
    if (dim < 8) throw ConfigError("encoder dim must be >= 8");
    if (max_sequence_length < 16) throw ConfigError("max_sequence_length must be >= 16");
    if (backend == EncoderBackend::External && external_command.empty())
      throw ConfigError("external encoder needs a command");
  }
};

/// Token with its source position; segment -1 marks [CLS]/[SEP].
struct Token {
  std::string text;
  int segment = -1;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Whitespace separates tokens; every other non-alphanumeric ASCII byte
/// (except '_') is a token of its own.
inline std::vector<Token> tokenize(std::string_view s, int segment = 0) {
  auto word_char = [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || u >= 0x80;
  };
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (text::is_space(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (word_char(s[i]))
      while (j < s.size() && word_char(s[j])) ++j;
    Token t;
    for (std::size_t k = i; k < j; ++k) {
      char c = s[k];
      t.text.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
    }
    t.segment = segment;
    t.begin = i;
    t.end = j;
    out.push_back(std::move(t));
    i = j;
  }
  return out;
}

struct Span {
  int segment = 1;
  std::size_t begin = 0;
  std::size_t end = 0;
  auto operator<=>(const Span&) const = default;
};

struct TokenRange {
  std::size_t first = 0;
  std::size_t last = 0;  // exclusive
  std::size_t size() const { return last - first; }
};

struct Encoding {
  std::vector<Token> tokens;
  Mat token_vectors;  // tokens × F
  Vec summary;
  std::map<Span, TokenRange> token_spans;

  /// Registers the tokens overlapping a byte span; false if none survive.
  bool add_span(const Span& sp) {
    std::size_t first = tokens.size(), last = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const Token& t = tokens[i];
      if (t.segment != sp.segment || t.end <= sp.begin || t.begin >= sp.end) continue;
      first = std::min(first, i);
      last = i + 1;
    }
    if (first >= last) return false;
    token_spans[sp] = {first, last};
    return true;
  }
};

/// Frozen encoder parameters: a parity bias added to token projections and
/// the affine map producing the summary vector.
struct EncoderParams {
  Mat parity_bias;  // 2 × F
  Mat summary_w;    // F × F
  Vec summary_b;

  static EncoderParams init(int dim, std::uint64_t seed) {
    EncoderParams p;
    std::uint64_t st = seed ^ 0x5eedULL;
    auto uni = [&](double scale) {
      return scale * (static_cast<double>(text::splitmix64(st) >> 11) * 0x1.0p-53 * 2.0 - 1.0);
    };
    double r = 1.0 / std::sqrt(static_cast<double>(dim));
    p.parity_bias = Mat(2, dim);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < dim; ++j) p.parity_bias(i, j) = uni(0.1);
    p.summary_w = Mat(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) p.summary_w(i, j) = uni(r) + (i == j ? 1.0 : 0.0);
    p.summary_b = Vec::Zero(dim);
    return p;
  }
};

namespace detail {

inline constexpr const char* kCls = "[CLS]";
inline constexpr const char* kSep = "[SEP]";

/// Pseudo-random projection of a token's character 3- to 5-grams.
inline Eigen::RowVectorXd project_token(std::string_view tok, std::uint64_t seed, int dim) {
  std::string padded = "<" + std::string(tok) + ">";
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(dim);
  int grams = 0;
  auto add = [&](std::string_view g) {
    std::uint64_t st = text::fnv1a(g, 0xcbf29ce484222325ULL ^ seed);
    for (Eigen::Index k = 0; k < out.size(); ++k)
      out(k) += static_cast<double>(text::splitmix64(st) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    ++grams;
  };
  if (padded.size() < 3) add(padded);
  for (std::size_t n = 3; n <= 5; ++n)
    for (std::size_t i = 0; i + n <= padded.size(); ++i) add(std::string_view(padded).substr(i, n));
  out /= std::sqrt(static_cast<double>(grams));
  return out;
}

inline std::vector<Token> pair_tokens(std::string_view a, std::string_view b, const EncoderConfig& cfg) {
  auto ta = tokenize(a, 0), tb = tokenize(b, 1);
  std::size_t room = static_cast<std::size_t>(cfg.max_sequence_length) - 3;
  if (ta.size() + tb.size() > room) {
    if (!cfg.truncate)
      throw SequenceTooLongError(ta.size() + tb.size() + 3, static_cast<std::size_t>(cfg.max_sequence_length));
    if (ta.size() > room) ta.resize(room);
    tb.resize(room - ta.size());
  }
  std::vector<Token> toks;
  toks.push_back({kCls, -1, 0, 0});
  toks.insert(toks.end(), ta.begin(), ta.end());
  toks.push_back({kSep, -1, 0, 0});
  toks.insert(toks.end(), tb.begin(), tb.end());
  toks.push_back({kSep, -1, 0, 0});
  return toks;
}

}  // namespace detail

/// Number of tokens encode_pair would produce, before truncation.
inline std::size_t pair_length(std::string_view a, std::string_view b) {
  return tokenize(a).size() + tokenize(b).size() + 3;
}

Encoding encode_external(std::string_view a, std::string_view b, const EncoderConfig& cfg);

/// Encoding of `[CLS] a [SEP] b [SEP]`. Whole-segment spans are always
/// registered; `extra` adds more (e.g. graph node positions).
inline Encoding encode_pair(std::string_view a, std::string_view b, const EncoderConfig& cfg, const EncoderParams& params,
                            const std::vector<Span>& extra = {}) {
  cfg.validate();
  if (cfg.backend == EncoderBackend::External) {
    Encoding enc = encode_external(a, b, cfg);
    enc.add_span({0, 0, a.size()});
    enc.add_span({1, 0, b.size()});
    for (const auto& sp : extra) enc.add_span(sp);
    return enc;
  }
  if (params.parity_bias.cols() != cfg.dim) throw DimensionError("encoder params do not match dim");
  Encoding enc;
  enc.tokens = detail::pair_tokens(a, b, cfg);
  enc.token_vectors = Mat(static_cast<Eigen::Index>(enc.tokens.size()), cfg.dim);
  for (std::size_t i = 0; i < enc.tokens.size(); ++i) {
    enc.token_vectors.row(static_cast<Eigen::Index>(i)) =
        detail::project_token(enc.tokens[i].text, cfg.seed, cfg.dim) + params.parity_bias.row(static_cast<Eigen::Index>(i % 2));
  }
  Vec mean = enc.token_vectors.colwise().mean().transpose();
  enc.summary = params.summary_w * mean + params.summary_b;
  enc.add_span({0, 0, a.size()});
  enc.add_span({1, 0, b.size()});
  for (const auto& sp : extra) enc.add_span(sp);
  return enc;
}

/// Mean of the token vectors covering a registered span.
inline Vec node_init(const Encoding& enc, const Span& sp) {
  auto it = enc.token_spans.find(sp);
  if (it == enc.token_spans.end() || it->second.size() == 0)
    throw SpanNotFoundError("span [" + std::to_string(sp.begin) + "," + std::to_string(sp.end) + ") of segment " +
                            std::to_string(sp.segment) + " not encoded");
  const auto& r = it->second;
  return enc.token_vectors
      .middleRows(static_cast<Eigen::Index>(r.first), static_cast<Eigen::Index>(r.size()))
      .colwise()
      .mean()
      .transpose();
}

/// `row i : col is cell ; ...` per row, caption first. With a token budget,
/// trailing rows that do not fit are dropped whole.
inline std::string linearize_table(const Table& t, std::size_t max_tokens = SIZE_MAX) {
  std::string out = std::string(text::trim(t.caption()));
  std::size_t used = tokenize(out).size();
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    std::string row = "row " + std::to_string(r + 1) + " :";
    for (std::size_t c = 0; c < t.num_cols(); ++c) {
      row += (c ? " ; " : " ");
      row += std::string(text::trim(t.header()[c])) + " is " + std::string(text::trim(t.cell(r, c).raw));
    }
    std::size_t n = tokenize(row).size() + (out.empty() ? 0 : 1);
    if (used + n > max_tokens) break;
    used += n;
    if (!out.empty()) out += " . ";
    out += row;
  }
  return out;
}

struct LinearizedEvidence {
  std::string text;
  std::vector<Span> node_spans;  // segment-1 byte spans, graph node order
};

namespace detail {

inline void collect_spans(const ProgramNode& n, std::size_t& pos, std::vector<Span>& spans) {
  if (!n.is_function) {
    std::string s = escape_entity(n.name, n.is_all_rows());
    spans.push_back({1, pos, pos + s.size()});
    pos += s.size();
    return;
  }
  spans.push_back({1, pos, pos + n.name.size()});
  pos += n.name.size() + 3;  // "name { "
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    if (i) pos += 3;  // " ; "
    collect_spans(n.children[i], pos, spans);
  }
  pos += 2;  // " }"
}

}  // namespace detail

/// Canonical renderings joined by " ; ", with each program node's byte span
/// in the same preorder that build_graph assigns node ids.
inline LinearizedEvidence linearize_evidence(const std::vector<Program>& items) {
  LinearizedEvidence out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.text += " ; ";
    std::size_t pos = out.text.size();
    detail::collect_spans(items[i].root, pos, out.node_spans);
    out.text += render_program(items[i]);
  }
  return out;
}

inline LinearizedEvidence linearize_evidence(const EvidenceSet& ev) { return linearize_evidence(ev.items); }

}  // namespace tabver

#include "tabver/external_encoder.hpp"
