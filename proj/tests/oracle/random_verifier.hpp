#pragma once

// Small random verifier instances and a central-difference gradient oracle.

#include <cmath>
#include <random>

#include "oracle/random_evidence.hpp"
#include "tabver/graph.hpp"
#include "tabver/verifier.hpp"

namespace gen {

/// Random graph of at most `max_nodes` nodes with random F-dim inputs.
inline tabver::VerifierInput random_input(std::mt19937_64& rng, int f, std::size_t max_nodes = 8) {
  tabver::Table t = random_table(rng);
  std::vector<tabver::Program> ev;
  do {
    ev = random_evidence(rng, t, 3, 2);
    while (!ev.empty()) {
      std::size_t total = 0;
      for (const auto& p : ev) total += p.size();
      if (total <= max_nodes) break;
      ev.pop_back();
    }
  } while (ev.empty());
  std::normal_distribution<double> nd(0.0, 1.0);
  auto rnd = [&](Eigen::Index r, Eigen::Index c) { return tabver::Mat(r, c).unaryExpr([&](double) { return nd(rng); }); };
  tabver::VerifierInput in;
  in.graph = tabver::build_graph(ev);
  in.node_h_p = rnd(static_cast<Eigen::Index>(in.graph->nodes().size()), f);
  in.h_s = rnd(f, 1).col(0);
  in.cls_table = rnd(f, 1).col(0);
  in.cls_evidence = rnd(f, 1).col(0);
  return in;
}

inline tabver::VerifierParams random_params(std::mt19937_64& rng, int f, int layers, double scale = 0.5) {
  tabver::VerifierParams p = tabver::VerifierParams::zeros(f, layers);
  std::uniform_real_distribution<double> u(-scale, scale);
  p.for_each([&](const std::string&, tabver::Mat& m) { m = m.unaryExpr([&](double) { return u(rng); }); });
  return p;
}

struct GradCheck {
  double worst_rel = 0;
  std::string worst_tensor;
  std::size_t checked = 0;
};

/// Central differences with step h on every entry of every tensor.
/// Relative error is |a - n| / max(|a|, |n|, floor).
inline GradCheck check_gradients(const tabver::VerifierInput& in, const tabver::VerifierParams& p, double theta,
                                 tabver::Label y, double h = 1e-5, double floor = 1e-6) {
  using namespace tabver;
  VerifierParams grad = VerifierParams::zeros(p.dim, static_cast<int>(p.layers.size()));
  backward(in, p, theta, y, grad);
  std::vector<std::pair<std::string, Mat*>> analytic;
  grad.for_each([&](const std::string& n, Mat& m) { analytic.emplace_back(n, &m); });
  VerifierParams q = p;
  std::vector<Mat*> slots;
  q.for_each([&](const std::string&, Mat& m) { slots.push_back(&m); });
  GradCheck out;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    Mat& m = *slots[k];
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        double keep = m(i, j);
        m(i, j) = keep + h;
        double lp = cross_entropy(forward(in, q, theta).probs, y);
        m(i, j) = keep - h;
        double lm = cross_entropy(forward(in, q, theta).probs, y);
        m(i, j) = keep;
        double num = (lp - lm) / (2 * h), ana = (*analytic[k].second)(i, j);
        double rel = std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), floor});
        if (rel > out.worst_rel) {
          out.worst_rel = rel;
          out.worst_tensor = analytic[k].first;
        }
        ++out.checked;
      }
  }
  return out;
}

}  // namespace gen
