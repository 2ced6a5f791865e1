#pragma once

// Subprocess protocol for plugging in an outside encoder. The request is one
// JSON line on stdin:
//   {"version":1,"dim":F,"max_sequence_length":N,"segment_a":"...","segment_b":"..."}
// The reply on stdout is either one JSON line
//   {"version":1,"tokens":[{"text":..,"segment":..,"begin":..,"end":..}],
//    "vectors":[[F floats] per token],"summary":[F floats]}
// or one binary frame (see encode_frame).

#include <atomic>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unistd.h>

#include <json.hpp>

#include "tabver/encoder.hpp"
#include "tabver/errors.hpp"

namespace tabver {

inline constexpr int kEncoderProtocolVersion = 1;
inline constexpr char kFrameMagic[4] = {'T', 'V', 'E', 'F'};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::string& out, double d) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(d)));
}

class FrameReader {
 public:
  explicit FrameReader(std::string_view b) : b_(b) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f32() { return std::bit_cast<float>(u32()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(b_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  std::string_view b_;
  std::size_t pos_ = 0;
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw ExternalEncoderError("truncated encoder frame");
  }
};

}  // namespace detail

/// Binary frame: "TVEF", u32 version, u32 token count, u32 dim, then per
/// token (i32 segment, u32 begin, u32 end, u32 length, text bytes), then
/// token vectors row-major and the summary, all little-endian float32.
inline std::string encode_frame(const Encoding& enc) {
  std::string out(kFrameMagic, 4);
  auto dim = static_cast<std::uint32_t>(enc.summary.size());
  detail::put_u32(out, kEncoderProtocolVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(enc.tokens.size()));
  detail::put_u32(out, dim);
  for (const auto& t : enc.tokens) {
    detail::put_u32(out, static_cast<std::uint32_t>(t.segment));
    detail::put_u32(out, static_cast<std::uint32_t>(t.begin));
    detail::put_u32(out, static_cast<std::uint32_t>(t.end));
    detail::put_u32(out, static_cast<std::uint32_t>(t.text.size()));
    out += t.text;
  }
  for (Eigen::Index i = 0; i < enc.token_vectors.rows(); ++i)
    for (Eigen::Index j = 0; j < enc.token_vectors.cols(); ++j) detail::put_f32(out, enc.token_vectors(i, j));
  for (Eigen::Index j = 0; j < enc.summary.size(); ++j) detail::put_f32(out, enc.summary(j));
  return out;
}

inline Encoding decode_frame(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kFrameMagic, 4) != 0)
    throw ExternalEncoderError("missing frame magic");
  detail::FrameReader r(bytes.substr(4));
  if (auto v = r.u32(); v != kEncoderProtocolVersion)
    throw ExternalEncoderError("unsupported frame version " + std::to_string(v));
  std::uint32_t n = r.u32(), dim = r.u32();
  if (n > (1u << 24) || dim > (1u << 16)) throw ExternalEncoderError("implausible frame header");
  Encoding enc;
  for (std::uint32_t i = 0; i < n; ++i) {
    Token t;
    t.segment = static_cast<std::int32_t>(r.u32());
    t.begin = r.u32();
    t.end = r.u32();
    t.text = r.bytes(r.u32());
    enc.tokens.push_back(std::move(t));
  }
  enc.token_vectors = Mat(n, dim);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < dim; ++j) enc.token_vectors(i, j) = r.f32();
  enc.summary = Vec(dim);
  for (std::uint32_t j = 0; j < dim; ++j) enc.summary(j) = r.f32();
  if (!r.done()) throw ExternalEncoderError("trailing bytes after frame");
  return enc;
}

inline std::string encode_request(std::string_view a, std::string_view b, const EncoderConfig& cfg) {
  nlohmann::json j = {{"version", kEncoderProtocolVersion},
                      {"dim", cfg.dim},
                      {"max_sequence_length", cfg.max_sequence_length},
                      {"segment_a", a},
                      {"segment_b", b}};
  return j.dump() + "\n";
}

inline std::string encode_json_reply(const Encoding& enc) {
  nlohmann::json toks = nlohmann::json::array(), vecs = nlohmann::json::array(), summary = nlohmann::json::array();
  for (const auto& t : enc.tokens) toks.push_back({{"text", t.text}, {"segment", t.segment}, {"begin", t.begin}, {"end", t.end}});
  for (Eigen::Index i = 0; i < enc.token_vectors.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < enc.token_vectors.cols(); ++j) row.push_back(enc.token_vectors(i, j));
    vecs.push_back(std::move(row));
  }
  for (Eigen::Index j = 0; j < enc.summary.size(); ++j) summary.push_back(enc.summary(j));
  nlohmann::json j = {{"version", kEncoderProtocolVersion}, {"tokens", toks}, {"vectors", vecs}, {"summary", summary}};
  return j.dump() + "\n";
}

/// Parses either reply form; the frame magic selects binary.
inline Encoding decode_reply(std::string_view bytes, int dim) {
  Encoding enc;
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kFrameMagic, 4) == 0) {
    enc = decode_frame(bytes);
  } else {
    try {
      auto j = nlohmann::json::parse(bytes);
      if (j.at("version").get<int>() != kEncoderProtocolVersion) throw ExternalEncoderError("unsupported reply version");
      for (const auto& t : j.at("tokens"))
        enc.tokens.push_back({t.at("text").get<std::string>(), t.at("segment").get<int>(), t.at("begin").get<std::size_t>(),
                              t.at("end").get<std::size_t>()});
      const auto& vecs = j.at("vectors");
      if (vecs.size() != enc.tokens.size()) throw ExternalEncoderError("vector count does not match token count");
      enc.token_vectors = Mat(static_cast<Eigen::Index>(vecs.size()), dim);
      for (std::size_t i = 0; i < vecs.size(); ++i) {
        if (vecs[i].size() != static_cast<std::size_t>(dim)) throw ExternalEncoderError("token vector has wrong width");
        for (int k = 0; k < dim; ++k) enc.token_vectors(static_cast<Eigen::Index>(i), k) = vecs[i][k].get<double>();
      }
      const auto& s = j.at("summary");
      if (s.size() != static_cast<std::size_t>(dim)) throw ExternalEncoderError("summary has wrong width");
      enc.summary = Vec(dim);
      for (int k = 0; k < dim; ++k) enc.summary(k) = s[k].get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw ExternalEncoderError(std::string("bad encoder reply: ") + e.what());
    }
  }
  if (enc.summary.size() != dim || enc.token_vectors.cols() != dim)
    throw ExternalEncoderError("encoder reply has dim " + std::to_string(enc.summary.size()) + ", expected " +
                               std::to_string(dim));
  return enc;
}

namespace detail {

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out.push_back(c);
  }
  return out + "'";
}

inline std::filesystem::path temp_path(const char* tag) {
  static std::atomic<unsigned> counter{0};
  thread_local std::mt19937_64 rng(std::random_device{}());
  std::ostringstream name;
  name << "tabver-" << ::getpid() << "-" << counter++ << "-" << std::hex << rng() << "." << tag;
  return std::filesystem::temp_directory_path() / name.str();
}

}  // namespace detail

/// Runs `cfg.external_command` once with the request on stdin.
inline Encoding encode_external(std::string_view a, std::string_view b, const EncoderConfig& cfg) {
  auto in = detail::temp_path("req"), out = detail::temp_path("rep");
  struct Cleanup {
    std::filesystem::path a, b;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove(a, ec);
      std::filesystem::remove(b, ec);
    }
  } cleanup{in, out};
  {
    std::ofstream f(in, std::ios::binary);
    f << encode_request(a, b, cfg);
    if (!f) throw ExternalEncoderError("cannot write encoder request");
  }
  std::string cmd = cfg.external_command + " < " + detail::shell_quote(in.string()) + " > " +
                    detail::shell_quote(out.string());
  int rc = std::system(cmd.c_str());
  if (rc != 0) throw ExternalEncoderError("encoder command failed with status " + std::to_string(rc));
  std::ifstream f(out, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_reply(ss.str(), cfg.dim);
}

}  // namespace tabver
