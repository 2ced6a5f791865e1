#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tabver/encoder.hpp"
#include "tabver/errors.hpp"
#include "tabver/graph.hpp"

namespace tabver {

enum class Label { Entailed = 0, Refuted = 1 };

inline const char* to_string(Label l) { return l == Label::Entailed ? "ENTAILED" : "REFUTED"; }

inline constexpr int kNodeTypes = 2;
inline constexpr double kLeakySlope = 0.2;

struct VerifierConfig {
  int dim = 64;  // F; the working width D is 3F
  int layers = 2;
  double theta = 0.3;
  std::uint64_t seed = 1;

  int width() const { return 3 * dim; }
  void validate() const {
    if (dim < 1 || layers < 0) throw ConfigError("verifier dim must be >= 1 and layers >= 0");
    if (!(theta >= 0.0 && theta < 1.0)) throw ConfigError("theta must be in [0,1)");
  }
};

struct GatParams {
  Mat w_q, w_k, w_v;  // D × D
  Mat a;              // 2D × 1: query half then key half
};

/// Every trainable tensor. Vectors are stored as single-column matrices so
/// that all tensors iterate uniformly.
struct VerifierParams {
  int dim = 0;
  std::vector<GatParams> layers;
  Mat w_t;     // T × F
  Mat b_t;     // F × 1
  Mat w_s;     // 2F × F
  Mat b_s;     // F × 1
  Mat w_g;     // F × 1
  Mat q_pool;  // D × 1
  Mat w_c;     // (D + 2F) × 2
  Mat b_c;     // 2 × 1

  int width() const { return 3 * dim; }

  static VerifierParams zeros(int f, int num_layers) {
    VerifierParams p;
    p.dim = f;
    int d = 3 * f;
    for (int l = 0; l < num_layers; ++l)
      p.layers.push_back({Mat::Zero(d, d), Mat::Zero(d, d), Mat::Zero(d, d), Mat::Zero(2 * d, 1)});
    p.w_t = Mat::Zero(kNodeTypes, f);
    p.b_t = Mat::Zero(f, 1);
    p.w_s = Mat::Zero(2 * f, f);
    p.b_s = Mat::Zero(f, 1);
    p.w_g = Mat::Zero(f, 1);
    p.q_pool = Mat::Zero(d, 1);
    p.w_c = Mat::Zero(d + 2 * f, 2);
    p.b_c = Mat::Zero(2, 1);
    return p;
  }

  /// uniform(-1/sqrt(D), 1/sqrt(D)) for every tensor.
  static VerifierParams init(const VerifierConfig& cfg) {
    cfg.validate();
    VerifierParams p = zeros(cfg.dim, cfg.layers);
    std::mt19937_64 rng(cfg.seed);
    double r = 1.0 / std::sqrt(static_cast<double>(cfg.width()));
    std::uniform_real_distribution<double> u(-r, r);
    p.for_each([&](const std::string&, Mat& m) { m = m.unaryExpr([&](double) { return u(rng); }); });
    return p;
  }

  template <typename Fn>
  void for_each(Fn&& fn) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      std::string pre = "layer" + std::to_string(l) + ".";
      fn(pre + "W_q", layers[l].w_q);
      fn(pre + "W_k", layers[l].w_k);
      fn(pre + "W_v", layers[l].w_v);
      fn(pre + "a", layers[l].a);
    }
    fn("W_t", w_t);
    fn("b_t", b_t);
    fn("W_s", w_s);
    fn("b_s", b_s);
    fn("w_g", w_g);
    fn("q_pool", q_pool);
    fn("W_c", w_c);
    fn("b_c", b_c);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    const_cast<VerifierParams*>(this)->for_each(
        [&](const std::string& n, Mat& m) { fn(n, static_cast<const Mat&>(m)); });
  }

  bool all_finite() const {
    bool ok = true;
    for_each([&](const std::string&, const Mat& m) { ok = ok && m.allFinite(); });
    return ok;
  }
};

/// Encoded sample: graph plus per-node initial vectors (rows indexed by node
/// id), the statement vector and both pair summaries. No graph means empty
/// evidence.
struct VerifierInput {
  std::optional<LogicGraph> graph;
  Mat node_h_p;  // nodes × F
  Vec h_s;
  Vec cls_table;
  Vec cls_evidence;

  void validate(int f) const {
    auto bad = [&](const char* what) { throw DimensionError(std::string("verifier input: ") + what); };
    if (h_s.size() != f || cls_table.size() != f || cls_evidence.size() != f) bad("summary width != F");
    if (graph) {
      if (node_h_p.rows() != static_cast<Eigen::Index>(graph->nodes().size())) bad("node count mismatch");
      if (node_h_p.cols() != f) bad("node vector width != F");
    }
  }
};

inline double logistic(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }
inline double leaky_relu(double z) { return z > 0 ? z : kLeakySlope * z; }

inline Vec type_embed(NodeType t, const VerifierParams& p) {
  return p.w_t.row(t == NodeType::Function ? 0 : 1).transpose() + p.b_t.col(0);
}

inline Vec assemble_feature(const Vec& h_p, const Vec& h_s, const Vec& h_t) {
  if (h_p.size() != h_s.size() || h_p.size() != h_t.size()) throw DimensionError("feature parts differ in width");
  Vec h(3 * h_p.size());
  h << h_p, h_s, h_t;
  return h;
}

inline double attention_logit(const Vec& h_i, const Vec& h_j, const GatParams& g) {
  Eigen::Index d = h_i.size();
  double z = g.a.col(0).head(d).dot(g.w_q * h_i) + g.a.col(0).tail(d).dot(g.w_k * h_j);
  return leaky_relu(z);
}

inline double relevance_score(const Vec& h_p, const Vec& h_s, const VerifierParams& p) {
  Vec x(2 * h_p.size());
  x << h_p, h_s;
  Vec t = (p.w_s.transpose() * x + p.b_s.col(0)).array().tanh().matrix();
  return logistic(p.w_g.col(0).dot(t));
}

/// Ids removed by pruning, in removal order: the floor(theta*|V|) lowest
/// scores, ties broken toward the higher id.
inline std::vector<std::size_t> prune_order(const std::vector<std::size_t>& ids, const std::vector<double>& scores,
                                            double theta) {
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return ids[a] > ids[b];
  });
  auto k = static_cast<std::size_t>(std::floor(theta * static_cast<double>(ids.size())));
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(ids[order[i]]);
  return out;
}

/// Scores are indexed by node id.
inline LogicGraph prune(const LogicGraph& g, const std::vector<double>& scores, double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) throw ConfigError("theta must be in [0,1)");
  auto ids = g.live_ids();
  std::vector<double> s;
  for (auto id : ids) s.push_back(scores.at(id));
  LogicGraph out = g;
  for (auto id : prune_order(ids, s, theta)) out = remove_node_rewire(out, id);
  return out;
}

/// One attention layer over rows of H with local neighbor lists.
inline Mat gat_layer(const std::vector<std::vector<std::size_t>>& nbrs, const Mat& h, const GatParams& g,
                     std::vector<std::vector<double>>* alpha_out = nullptr) {
  Eigen::Index d = h.cols();
  Mat q = h * g.w_q.transpose(), k = h * g.w_k.transpose(), v = h * g.w_v.transpose();
  Vec sq = q * g.a.col(0).head(d), sk = k * g.a.col(0).tail(d);
  Mat out = h;
  if (alpha_out) alpha_out->assign(nbrs.size(), {});
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    const auto& n = nbrs[i];
    if (n.empty()) continue;
    std::vector<double> e(n.size());
    double mx = -INFINITY;
    for (std::size_t t = 0; t < n.size(); ++t) {
      e[t] = leaky_relu(sq(static_cast<Eigen::Index>(i)) + sk(static_cast<Eigen::Index>(n[t])));
      mx = std::max(mx, e[t]);
    }
    double z = 0;
    for (auto& x : e) z += (x = std::exp(x - mx));
    Vec m = Vec::Zero(d);
    for (std::size_t t = 0; t < n.size(); ++t) {
      e[t] /= z;
      m += e[t] * v.row(static_cast<Eigen::Index>(n[t])).transpose();
    }
    out.row(static_cast<Eigen::Index>(i)) += m.unaryExpr([](double x) { return logistic(x); }).transpose();
    if (alpha_out) (*alpha_out)[i] = std::move(e);
  }
  return out;
}

/// Softmax-weighted sum of rows; `bias` is added to the pooling logits.
inline Vec attentive_pool(const Mat& h, const Vec& q, const Vec& bias, Vec* weights = nullptr) {
  if (h.rows() == 0) throw EmptyGraphError();
  Vec u = h * q + bias;
  Vec b = (u.array() - u.maxCoeff()).exp().matrix();
  b /= b.sum();
  if (weights) *weights = b;
  return h.transpose() * b;
}

inline Vec attentive_pool(const Mat& h, const Vec& q) { return attentive_pool(h, q, Vec::Zero(h.rows())); }

/// (P(ENTAILED), P(REFUTED)).
inline Vec classify(const Vec& h, const Vec& cls_table, const Vec& cls_evidence, const VerifierParams& p) {
  Vec x(h.size() + cls_table.size() + cls_evidence.size());
  x << h, cls_table, cls_evidence;
  if (x.size() != p.w_c.rows()) throw DimensionError("classifier input width mismatch");
  Vec logits = p.w_c.transpose() * x + p.b_c.col(0);
  Vec e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

struct ForwardTrace {
  std::vector<double> scores;              // by node id; NaN for ids not scored
  std::vector<std::size_t> pruned;         // removal order
  std::vector<std::size_t> alive;          // surviving ids, ascending
  std::vector<std::vector<std::size_t>> neighbors;  // local indices into alive
  std::vector<Mat> h;                      // h[0] assembled, h[l+1] after layer l
  std::vector<std::vector<std::vector<double>>> attention;  // [layer][local i][t]
  Vec pool_weights;
  Vec pooled;
  Vec x;  // classifier input
  Vec probs;
};

namespace detail {

inline std::vector<std::vector<std::size_t>> local_adjacency(const LogicGraph& g, const std::vector<std::size_t>& alive) {
  std::map<std::size_t, std::size_t> local;
  for (std::size_t i = 0; i < alive.size(); ++i) local[alive[i]] = i;
  auto adj = g.adjacency();
  std::vector<std::vector<std::size_t>> out(alive.size());
  for (std::size_t i = 0; i < alive.size(); ++i)
    for (auto j : adj[alive[i]]) out[i].push_back(local.at(j));
  return out;
}

}  // namespace detail

/// Full forward pass: score and prune once, L attention layers, pooling
/// gated by log-relevance, classification.
inline ForwardTrace forward(const VerifierInput& in, const VerifierParams& p, double theta) {
  int f = p.dim, d = p.width();
  in.validate(f);
  ForwardTrace tr;
  if (!in.graph || in.graph->num_live() == 0) {
    tr.pooled = Vec::Zero(d);
  } else {
    const LogicGraph& g = *in.graph;
    tr.scores.assign(g.nodes().size(), std::nan(""));
    for (auto id : g.live_ids()) tr.scores[id] = relevance_score(in.node_h_p.row(static_cast<Eigen::Index>(id)).transpose(), in.h_s, p);
    auto ids = g.live_ids();
    std::vector<double> live_scores;
    for (auto id : ids) live_scores.push_back(tr.scores[id]);
    tr.pruned = prune_order(ids, live_scores, theta);
    LogicGraph pg = g;
    for (auto id : tr.pruned) pg = remove_node_rewire(pg, id);
    tr.alive = pg.live_ids();
    tr.neighbors = detail::local_adjacency(pg, tr.alive);
    Mat h0(static_cast<Eigen::Index>(tr.alive.size()), d);
    for (std::size_t i = 0; i < tr.alive.size(); ++i) {
      std::size_t id = tr.alive[i];
      h0.row(static_cast<Eigen::Index>(i)) =
          assemble_feature(in.node_h_p.row(static_cast<Eigen::Index>(id)).transpose(), in.h_s,
                           type_embed(g.nodes()[id].type, p))
              .transpose();
    }
    tr.h.push_back(std::move(h0));
    for (const auto& layer : p.layers) {
      tr.attention.emplace_back();
      tr.h.push_back(gat_layer(tr.neighbors, tr.h.back(), layer, &tr.attention.back()));
    }
    Vec bias(static_cast<Eigen::Index>(tr.alive.size()));
    for (std::size_t i = 0; i < tr.alive.size(); ++i) bias(static_cast<Eigen::Index>(i)) = std::log(tr.scores[tr.alive[i]]);
    tr.pooled = attentive_pool(tr.h.back(), p.q_pool.col(0), bias, &tr.pool_weights);
  }
  tr.x = Vec(d + 2 * f);
  tr.x << tr.pooled, in.cls_table, in.cls_evidence;
  tr.probs = classify(tr.pooled, in.cls_table, in.cls_evidence, p);
  return tr;
}

inline double cross_entropy(const Vec& probs, Label y) {
  return -std::log(std::max(probs(static_cast<int>(y)), 1e-300));
}

/// Gradient of the cross-entropy of one sample; accumulates into `grad`
/// (same shapes as the parameters). Returns the loss.
inline double backward(const VerifierInput& in, const VerifierParams& p, double theta, Label y, VerifierParams& grad) {
  ForwardTrace tr = forward(in, p, theta);
  int f = p.dim, d = p.width();
  double loss = cross_entropy(tr.probs, y);
  Vec dlogits = tr.probs;
  dlogits(static_cast<int>(y)) -= 1.0;
  grad.w_c += tr.x * dlogits.transpose();
  grad.b_c.col(0) += dlogits;
  if (tr.alive.empty()) return loss;
  Vec dpooled = (p.w_c * dlogits).head(d);

  const Mat& hl = tr.h.back();
  auto n = static_cast<Eigen::Index>(tr.alive.size());
  const Vec& beta = tr.pool_weights;
  Mat dh = beta * dpooled.transpose();  // n × D
  Vec dbeta = hl * dpooled;
  Vec du = beta.cwiseProduct((dbeta.array() - beta.dot(dbeta)).matrix());
  grad.q_pool.col(0) += hl.transpose() * du;
  dh += du * p.q_pool.col(0).transpose();

  // relevance scores reach the loss through the log-score pooling bias
  const LogicGraph& g = *in.graph;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t id = tr.alive[static_cast<std::size_t>(i)];
    double s = tr.scores[id];
    double dg = du(i) * (1 - s);  // d(log s)/dg
    Vec x(2 * f);
    x << in.node_h_p.row(static_cast<Eigen::Index>(id)).transpose(), in.h_s;
    Vec t = (p.w_s.transpose() * x + p.b_s.col(0)).array().tanh().matrix();
    grad.w_g.col(0) += dg * t;
    Vec dz = (dg * p.w_g.col(0)).cwiseProduct((1.0 - t.array().square()).matrix());
    grad.b_s.col(0) += dz;
    grad.w_s += x * dz.transpose();
  }

  for (std::size_t l = p.layers.size(); l-- > 0;) {
    const GatParams& gp = p.layers[l];
    const Mat& h = tr.h[l];
    Mat q = h * gp.w_q.transpose(), k = h * gp.w_k.transpose(), v = h * gp.w_v.transpose();
    Vec a1 = gp.a.col(0).head(d), a2 = gp.a.col(0).tail(d);
    Vec sq = q * a1, sk = k * a2;
    Mat dh_in = dh;  // residual path
    Mat dv = Mat::Zero(n, d);
    Vec dsq = Vec::Zero(n), dsk = Vec::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& nb = tr.neighbors[static_cast<std::size_t>(i)];
      if (nb.empty()) continue;
      const auto& alpha = tr.attention[l][static_cast<std::size_t>(i)];
      Vec m = Vec::Zero(d);
      for (std::size_t t = 0; t < nb.size(); ++t) m += alpha[t] * v.row(static_cast<Eigen::Index>(nb[t])).transpose();
      Vec sig = m.unaryExpr([](double x) { return logistic(x); });
      Vec dm = dh.row(i).transpose().cwiseProduct(sig.cwiseProduct((1.0 - sig.array()).matrix()));
      std::vector<double> dalpha(nb.size());
      double dot = 0;
      for (std::size_t t = 0; t < nb.size(); ++t) {
        auto j = static_cast<Eigen::Index>(nb[t]);
        dalpha[t] = dm.dot(v.row(j));
        dv.row(j) += alpha[t] * dm.transpose();
        dot += alpha[t] * dalpha[t];
      }
      for (std::size_t t = 0; t < nb.size(); ++t) {
        auto j = static_cast<Eigen::Index>(nb[t]);
        double de = alpha[t] * (dalpha[t] - dot);
        double z = sq(i) + sk(j);
        double dz = de * (z > 0 ? 1.0 : kLeakySlope);
        dsq(i) += dz;
        dsk(j) += dz;
      }
    }
    GatParams& gg = grad.layers[l];
    Mat dq = dsq * a1.transpose(), dk = dsk * a2.transpose();
    gg.a.col(0).head(d) += q.transpose() * dsq;
    gg.a.col(0).tail(d) += k.transpose() * dsk;
    gg.w_q += dq.transpose() * h;
    gg.w_k += dk.transpose() * h;
    gg.w_v += dv.transpose() * h;
    dh_in += dq * gp.w_q + dk * gp.w_k + dv * gp.w_v;
    dh = std::move(dh_in);
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t id = tr.alive[static_cast<std::size_t>(i)];
    Vec dt = dh.row(i).tail(f).transpose();
    grad.w_t.row(g.nodes()[id].type == NodeType::Function ? 0 : 1) += dt.transpose();
    grad.b_t.col(0) += dt;
  }
  return loss;
}

inline Label predict(const Vec& probs) { return probs(0) >= probs(1) ? Label::Entailed : Label::Refuted; }

}  // namespace tabver
