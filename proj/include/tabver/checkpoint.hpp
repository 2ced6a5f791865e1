#pragma once

// Checkpoint layout, all integers little-endian:
//   "TVCK"  u32 version  u32 manifest-length  manifest (JSON)
//   u32 tensor-count, then per tensor:
//   u32 name-length  name  u32 rows  u32 cols  rows*cols f64 (row-major)

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tabver/config.hpp"
#include "tabver/encoder.hpp"
#include "tabver/errors.hpp"
#include "tabver/verifier.hpp"

namespace tabver {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[4] = {'T', 'V', 'C', 'K'};

/// Everything needed to run the verifier: hyperparameters plus both
/// parameter sets.
struct Model {
  Config config;
  EncoderParams encoder;
  VerifierParams verifier;

  static Model init(const Config& cfg) {
    cfg.validate();
    return {cfg, EncoderParams::init(cfg.encoder.dim, cfg.encoder.seed), VerifierParams::init(cfg.verifier)};
  }
};

namespace detail {

inline void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64_le(std::string& out, double d) {
  auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class CheckpointReader {
 public:
  explicit CheckpointReader(std::string_view b) : b_(b) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
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
    if (n > b_.size() - pos_) throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_));
  }
};

template <typename Fn>
void for_each_tensor(Model& m, Fn&& fn) {
  fn("encoder.parity_bias", m.encoder.parity_bias);
  fn("encoder.summary_w", m.encoder.summary_w);
  // stored as a column so every tensor is a matrix
  Mat b = m.encoder.summary_b;
  fn("encoder.summary_b", b);
  m.encoder.summary_b = b.col(0);
  m.verifier.for_each([&](const std::string& name, Mat& t) { fn("verifier." + name, t); });
}

}  // namespace detail

inline std::string serialize_checkpoint(const Model& model) {
  Model m = model;
  nlohmann::json manifest = {{"format", "tabver-checkpoint"},
                             {"F", m.config.verifier.dim},
                             {"D", m.config.verifier.width()},
                             {"L", m.config.verifier.layers},
                             {"T_types", kNodeTypes},
                             {"seed", m.config.verifier.seed},
                             {"config", m.config.to_text()}};
  std::string out(kCheckpointMagic, 4);
  detail::put_u32_le(out, kCheckpointVersion);
  std::string mtext = manifest.dump();
  detail::put_u32_le(out, static_cast<std::uint32_t>(mtext.size()));
  out += mtext;
  std::string body;
  std::uint32_t count = 0;
  detail::for_each_tensor(m, [&](const std::string& name, Mat& t) {
    ++count;
    detail::put_u32_le(body, static_cast<std::uint32_t>(name.size()));
    body += name;
    detail::put_u32_le(body, static_cast<std::uint32_t>(t.rows()));
    detail::put_u32_le(body, static_cast<std::uint32_t>(t.cols()));
    for (Eigen::Index i = 0; i < t.rows(); ++i)
      for (Eigen::Index j = 0; j < t.cols(); ++j) detail::put_f64_le(body, t(i, j));
  });
  detail::put_u32_le(out, count);
  return out + body;
}

inline Model deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
    throw CheckpointError("not a checkpoint (bad magic)");
  detail::CheckpointReader r(bytes.substr(4));
  if (auto v = r.u32(); v != kCheckpointVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(v));
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(r.bytes(r.u32()));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad manifest: ") + e.what());
  }
  Config cfg;
  try {
    cfg = Config::parse(manifest.at("config").get<std::string>());
    if (manifest.at("F").get<int>() != cfg.verifier.dim || manifest.at("L").get<int>() != cfg.verifier.layers ||
        manifest.at("T_types").get<int>() != kNodeTypes)
      throw CheckpointError("manifest dimensions disagree with its config");
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("bad manifest config: ") + e.what());
  }
  std::map<std::string, Mat> tensors;
  std::uint32_t count = r.u32();
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name = r.bytes(r.u32());
    std::uint32_t rows = r.u32(), cols = r.u32();
    if (static_cast<std::uint64_t>(rows) * cols > (1ull << 28)) throw CheckpointError("tensor " + name + " too large");
    Mat t(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
      for (std::uint32_t j = 0; j < cols; ++j) t(i, j) = r.f64();
    if (!tensors.emplace(name, std::move(t)).second) throw CheckpointError("duplicate tensor " + name);
  }
  if (!r.done()) throw CheckpointError("trailing bytes after tensors");

  Model m;
  m.config = cfg;
  m.encoder.parity_bias = Mat::Zero(2, cfg.encoder.dim);
  m.encoder.summary_w = Mat::Zero(cfg.encoder.dim, cfg.encoder.dim);
  m.encoder.summary_b = Vec::Zero(cfg.encoder.dim);
  m.verifier = VerifierParams::zeros(cfg.verifier.dim, cfg.verifier.layers);
  std::size_t used = 0;
  detail::for_each_tensor(m, [&](const std::string& name, Mat& t) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw CheckpointError("missing tensor " + name);
    if (it->second.rows() != t.rows() || it->second.cols() != t.cols())
      throw CheckpointError("tensor " + name + " has shape " + std::to_string(it->second.rows()) + "x" +
                            std::to_string(it->second.cols()) + ", expected " + std::to_string(t.rows()) + "x" +
                            std::to_string(t.cols()));
    t = it->second;
    ++used;
  });
  if (used != tensors.size()) throw CheckpointError("checkpoint has unknown tensors");
  return m;
}

inline void save_checkpoint(const std::filesystem::path& path, const Model& m) {
  std::ofstream out(path, std::ios::binary);
  std::string bytes = serialize_checkpoint(m);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("cannot write " + path.string());
}

inline Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace tabver
