#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "tabver/errors.hpp"
#include "tabver/verifier.hpp"

namespace tabver {

struct Example {
  VerifierInput input;
  Label label = Label::Entailed;
};

struct TrainConfig {
  double lr = 1e-3;
  int batch_size = 8;
  int warmup_steps = 0;
  int epochs = 20;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double theta = 0.3;
  std::uint64_t seed = 1;  // shuffling
  int threads = 1;
};

struct EpochStats {
  double loss = 0;
  double accuracy = 0;
};

class Adam {
 public:
  Adam(const VerifierParams& shape, const TrainConfig& cfg) : cfg_(cfg) {
    m_ = VerifierParams::zeros(shape.dim, static_cast<int>(shape.layers.size()));
    v_ = m_;
  }

  /// Learning rate at 1-based step t: linear ramp over the warmup steps.
  double rate(long t) const {
    if (cfg_.warmup_steps <= 0 || t >= cfg_.warmup_steps) return cfg_.lr;
    return cfg_.lr * static_cast<double>(t) / cfg_.warmup_steps;
  }

  void step(VerifierParams& p, VerifierParams& g) {
    ++t_;
    double lr = rate(t_);
    double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    std::vector<Mat*> ps, gs, ms, vs;
    p.for_each([&](const std::string&, Mat& m) { ps.push_back(&m); });
    g.for_each([&](const std::string&, Mat& m) { gs.push_back(&m); });
    m_.for_each([&](const std::string&, Mat& m) { ms.push_back(&m); });
    v_.for_each([&](const std::string&, Mat& m) { vs.push_back(&m); });
    for (std::size_t i = 0; i < ps.size(); ++i) {
      *ms[i] = cfg_.beta1 * *ms[i] + (1 - cfg_.beta1) * *gs[i];
      *vs[i] = cfg_.beta2 * *vs[i] + (1 - cfg_.beta2) * gs[i]->cwiseProduct(*gs[i]);
      if (lr == 0.0) continue;
      *ps[i] -= lr * ((*ms[i] / c1).array() / ((*vs[i] / c2).array().sqrt() + cfg_.eps)).matrix();
    }
  }

  long steps() const { return t_; }

 private:
  TrainConfig cfg_;
  VerifierParams m_, v_;
  long t_ = 0;
};

/// Mean loss and gradient over a batch. Per-sample work may run on several
/// threads; the reduction always runs in sample order.
inline double batch_gradient(const std::vector<const Example*>& batch, const VerifierParams& p, double theta,
                             VerifierParams& grad, int threads = 1) {
  std::vector<VerifierParams> parts(batch.size(), VerifierParams::zeros(p.dim, static_cast<int>(p.layers.size())));
  std::vector<double> losses(batch.size());
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) losses[i] = backward(batch[i]->input, p, theta, batch[i]->label, parts[i]);
  };
  std::size_t nt = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, batch.size() ? batch.size() : 1);
  if (nt <= 1) {
    work(0, batch.size());
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (batch.size() + nt - 1) / nt;
    for (std::size_t lo = 0; lo < batch.size(); lo += chunk)
      pool.emplace_back(work, lo, std::min(batch.size(), lo + chunk));
    for (auto& t : pool) t.join();
  }
  grad = VerifierParams::zeros(p.dim, static_cast<int>(p.layers.size()));
  std::vector<Mat*> gs;
  grad.for_each([&](const std::string&, Mat& m) { gs.push_back(&m); });
  double loss = 0;
  double scale = 1.0 / static_cast<double>(std::max<std::size_t>(batch.size(), 1));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    loss += losses[i];
    std::size_t k = 0;
    parts[i].for_each([&](const std::string&, Mat& m) { *gs[k++] += scale * m; });
  }
  return loss * scale;
}

inline double accuracy(const std::vector<Example>& data, const VerifierParams& p, double theta) {
  if (data.empty()) return 0;
  std::size_t ok = 0;
  for (const auto& s : data) ok += predict(forward(s.input, p, theta).probs) == s.label;
  return static_cast<double>(ok) / static_cast<double>(data.size());
}

/// Mini-batch Adam over shuffled epochs. `on_epoch` may return false to stop.
inline std::vector<EpochStats> train(const std::vector<Example>& data, VerifierParams& p, const TrainConfig& cfg,
                                     const std::function<bool(int, const EpochStats&)>& on_epoch = {}) {
  if (cfg.batch_size < 1) throw ConfigError("batch size must be >= 1");
  Adam opt(p, cfg);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochStats> curve;
  std::size_t batch_id = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0;
    std::size_t batches = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += static_cast<std::size_t>(cfg.batch_size), ++batch_id) {
      std::vector<const Example*> batch;
      for (std::size_t i = lo; i < std::min(order.size(), lo + static_cast<std::size_t>(cfg.batch_size)); ++i)
        batch.push_back(&data[order[i]]);
      VerifierParams g;
      double loss = batch_gradient(batch, p, cfg.theta, g, cfg.threads);
      if (!std::isfinite(loss)) throw NonFiniteLossError(batch_id);
      opt.step(p, g);
      if (!p.all_finite()) throw NonFiniteLossError(batch_id);
      total += loss;
      ++batches;
    }
    EpochStats st{batches ? total / static_cast<double>(batches) : 0.0, accuracy(data, p, cfg.theta)};
    curve.push_back(st);
    if (on_epoch && !on_epoch(epoch, st)) break;
  }
  return curve;
}

}  // namespace tabver
