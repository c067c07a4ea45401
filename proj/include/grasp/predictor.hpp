#pragma once

// Pairwise architecture ranking predictor.
//
// A three-layer graph convolutional encoder turns an encoded graph into an
// embedding:
//
//   H^{l+1} = relu(a_norm * H^l * W^l),  H^0 = x,
//   h = mean over real-node rows of H^3   (or of [H^1 | H^2 | H^3] when
//                                          dense_skip is on)
//
// and a linear head scores ordered pairs. With the default antisymmetric
// head the two logits are the same functional applied to the two
// concatenation orders,
//
//   y1 = w . [h1 | h2] + b,   y2 = w . [h2 | h1] + b,
//
// so softmax(y1, y2) satisfies p12(g1, g2) + p12(g2, g1) = 1 exactly, and a
// model induces a total order through the scalar utility
// u(g) = (w_top - w_bot) . h(g). A plain two-logit head is kept behind a
// flag for comparison; it has no structural antisymmetry.
//
// Training minimizes the mean cross-entropy  J = -sum_i t_i ln p_i  over a
// batch plus an L2 penalty (wd/2)*|params|^2, with Adagrad updates
//   acc += g*g;  param -= lr * g / (sqrt(acc) + 1e-10).
//
// backward() returns exact analytic gradients of that objective; the test
// suite checks every component against central finite differences.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "grasp/encoding.hpp"
#include "grasp/errors.hpp"
#include "grasp/json_io.hpp"
#include "grasp/parallel.hpp"
#include "grasp/rng.hpp"

namespace grasp {

struct Hyper {
  int units = 265;
  double lr = 0.019041;
  double weight_decay = 0.001126;
  int batch_size = 128;
  bool antisymmetric_head = true;
  bool dense_skip = false;        // pool [H1 | H2 | H3] instead of H3
  bool use_vertex_shapes = true;  // recorded so evaluation encodes consistently
};

// Metadata carried in checkpoints so a saved model can be applied the way it
// was trained.
struct ModelMeta {
  int label_epoch = 40;
  ShapeNormalizer normalizer{};
  std::string dataset;
};

struct PredictorModel {
  Hyper hyper{};
  ModelMeta meta{};
  Mat w0, w1, w2;  // kFeatureDim x U, U x U, U x U
  Mat head_w;      // 2E x n_out
  Vec head_b;      // n_out
  Mat acc_w0, acc_w1, acc_w2, acc_head_w;  // Adagrad accumulators
  Vec acc_head_b;

  int embed_dim() const { return hyper.dense_skip ? 3 * hyper.units : hyper.units; }
  int head_outputs() const { return hyper.antisymmetric_head ? 1 : 2; }
};

inline PredictorModel init_model(const Hyper& hyper, std::uint64_t seed) {
  if (hyper.units < 1) throw InvalidArgumentError("units must be >= 1");
  PredictorModel m;
  m.hyper = hyper;
  const int u = hyper.units;
  const int e = m.embed_dim();
  const int outs = m.head_outputs();
  auto glorot = [&](int rows, int cols, std::uint64_t stream) {
    Rng rng(derive_seed(seed, "glorot", stream));
    const double limit = std::sqrt(6.0 / (rows + cols));
    Mat w(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) w(i, j) = rng.uniform(-limit, limit);
    return w;
  };
  m.w0 = glorot(kFeatureDim, u, 0);
  m.w1 = glorot(u, u, 1);
  m.w2 = glorot(u, u, 2);
  m.head_w = glorot(2 * e, outs, 3);
  m.head_b = Vec::Zero(outs);
  m.acc_w0 = Mat::Zero(kFeatureDim, u);
  m.acc_w1 = Mat::Zero(u, u);
  m.acc_w2 = Mat::Zero(u, u);
  m.acc_head_w = Mat::Zero(2 * e, outs);
  m.acc_head_b = Vec::Zero(outs);
  return m;
}

// --- forward ---------------------------------------------------------------

namespace detail {

// Activations kept for the backward pass. Matrices hold real-node rows only;
// padded rows are identically zero and would contribute nothing.
struct GraphTape {
  Mat ax, ah1, ah2;     // a_norm * {X, H1, H2}
  Mat h1, h2, h3;       // post-relu activations
  Vec h;                // pooled embedding
  Mat dz1, dz2, dz3;    // filled by the backward pass
};

inline void forward_tape(const EncodedGraph& g, const PredictorModel& m, GraphTape& t) {
  const int n = g.n_real;
  auto a = g.a_norm.topLeftCorner(n, n);
  t.ax.noalias() = a * g.x.topRows(n);
  t.h1.noalias() = (t.ax * m.w0).cwiseMax(0.0);
  t.ah1.noalias() = a * t.h1;
  t.h2.noalias() = (t.ah1 * m.w1).cwiseMax(0.0);
  t.ah2.noalias() = a * t.h2;
  t.h3.noalias() = (t.ah2 * m.w2).cwiseMax(0.0);
  if (m.hyper.dense_skip) {
    t.h.resize(3 * m.hyper.units);
    t.h << t.h1.colwise().mean().transpose(), t.h2.colwise().mean().transpose(),
        t.h3.colwise().mean().transpose();
  } else {
    t.h = t.h3.colwise().mean().transpose();
  }
}

}  // namespace detail

inline Vec gcn_forward(const EncodedGraph& g, const PredictorModel& m) {
  detail::GraphTape t;
  detail::forward_tape(g, m, t);
  return t.h;
}

// Embeddings for a list of graphs, one row per graph. Each graph writes only
// its own row, so the result is identical for any jobs setting.
inline Mat embed_all(const std::vector<EncodedGraph>& graphs, const PredictorModel& m,
                     int jobs = 0) {
  Mat out(static_cast<Eigen::Index>(graphs.size()), m.embed_dim());
  parallel_for(
      graphs.size(),
      [&](std::size_t i) {
        out.row(static_cast<Eigen::Index>(i)) = gcn_forward(graphs[i], m).transpose();
      },
      jobs);
  return out;
}

// --- pairwise head -----------------------------------------------------------

struct PairProb {
  double p12 = 0.5;
  double p21 = 0.5;
};

struct RankTarget {
  bool first_wins = true;
};

// Pair of indices into a graph/embedding list plus the observed outcome.
struct PairSample {
  int first = 0;
  int second = 0;
  bool first_wins = true;
};

namespace detail {

inline double head_logit(const PredictorModel& m, const Vec& first, const Vec& second,
                         int output) {
  const int e = m.embed_dim();
  return m.head_w.col(output).head(e).dot(first) +
         m.head_w.col(output).tail(e).dot(second) + m.head_b(output);
}

// softmax(y1, y2) evaluated so that swapping (y1, y2) swaps the two
// probabilities bitwise and p12 + p21 == 1.0 holds exactly.
inline PairProb softmax_pair(double y1, double y2) {
  if (y1 == y2) return {0.5, 0.5};
  if (y1 > y2) {
    double q = 1.0 / (1.0 + std::exp(y2 - y1));
    return {q, 1.0 - q};
  }
  double q = 1.0 / (1.0 + std::exp(y1 - y2));
  return {1.0 - q, q};
}

}  // namespace detail

inline PairProb rank_pair_embedded(const Vec& h1, const Vec& h2, const PredictorModel& m) {
  double y1, y2;
  if (m.hyper.antisymmetric_head) {
    y1 = detail::head_logit(m, h1, h2, 0);
    y2 = detail::head_logit(m, h2, h1, 0);
  } else {
    y1 = detail::head_logit(m, h1, h2, 0);
    y2 = detail::head_logit(m, h1, h2, 1);
  }
  return detail::softmax_pair(y1, y2);
}

inline PairProb rank_pair(const EncodedGraph& g1, const EncodedGraph& g2,
                          const PredictorModel& m) {
  return rank_pair_embedded(gcn_forward(g1, m), gcn_forward(g2, m), m);
}

inline constexpr double kProbClamp = 1e-12;

inline double ranking_loss(const PairProb& p, const RankTarget& t) {
  auto clamp = [](double v) { return std::min(1.0 - kProbClamp, std::max(kProbClamp, v)); };
  return t.first_wins ? -std::log(clamp(p.p12)) : -std::log(clamp(p.p21));
}

// Scalar utility inducing the model's total order. With the antisymmetric
// head this is (w_top - w_bot) . h; the plain head has no such scalar, so the
// first row serves as a fixed comparison anchor.
inline Vec utility_scores(const Mat& embeddings, const PredictorModel& m) {
  if (embeddings.rows() == 0) return Vec();
  if (m.hyper.antisymmetric_head) {
    const int e = m.embed_dim();
    Vec dir = m.head_w.col(0).head(e) - m.head_w.col(0).tail(e);
    return embeddings * dir;
  }
  Vec out(embeddings.rows());
  Vec anchor = embeddings.row(0).transpose();
  for (Eigen::Index i = 0; i < embeddings.rows(); ++i)
    out(i) = rank_pair_embedded(embeddings.row(i).transpose(), anchor, m).p12;
  return out;
}

// P(candidate beats `best`) for every candidate, embeddings computed fresh.
inline std::vector<double> score_against_best(const std::vector<EncodedGraph>& candidates,
                                              const EncodedGraph& best,
                                              const PredictorModel& m, int jobs = 0) {
  Vec best_h = gcn_forward(best, m);
  std::vector<double> out(candidates.size());
  parallel_for(
      candidates.size(),
      [&](std::size_t i) {
        out[i] = rank_pair_embedded(gcn_forward(candidates[i], m), best_h, m).p12;
      },
      jobs);
  return out;
}

// --- loss and gradients -------------------------------------------------------

struct Gradients {
  Mat w0, w1, w2, head_w;
  Vec head_b;
};

namespace detail {

inline double decay_penalty(const PredictorModel& m) {
  const double wd = m.hyper.weight_decay;
  return 0.5 * wd *
         (m.w0.squaredNorm() + m.w1.squaredNorm() + m.w2.squaredNorm() +
          m.head_w.squaredNorm() + m.head_b.squaredNorm());
}

inline void check_batch(const std::vector<EncodedGraph>& graphs,
                        const std::vector<PairSample>& batch) {
  if (batch.empty()) throw InvalidArgumentError("empty pair batch");
  for (const PairSample& p : batch) {
    if (p.first < 0 || p.second < 0 || p.first >= static_cast<int>(graphs.size()) ||
        p.second >= static_cast<int>(graphs.size()))
      throw InvalidArgumentError("pair index out of range");
  }
}

// Graph indices referenced by a batch, ascending, without duplicates.
inline std::vector<int> referenced_graphs(const std::vector<PairSample>& batch,
                                          std::size_t graph_count) {
  std::vector<char> used(graph_count, 0);
  for (const PairSample& p : batch) {
    used[static_cast<std::size_t>(p.first)] = 1;
    used[static_cast<std::size_t>(p.second)] = 1;
  }
  std::vector<int> ids;
  for (std::size_t i = 0; i < graph_count; ++i)
    if (used[i]) ids.push_back(static_cast<int>(i));
  return ids;
}

}  // namespace detail

// Mean ranking loss over the batch plus the L2 penalty. This is the exact
// objective backward() differentiates.
inline double batch_loss(const std::vector<EncodedGraph>& graphs,
                         const std::vector<PairSample>& batch, const PredictorModel& m,
                         int jobs = 0) {
  detail::check_batch(graphs, batch);
  std::vector<int> ids = detail::referenced_graphs(batch, graphs.size());
  std::vector<int> local(graphs.size(), -1);
  for (std::size_t i = 0; i < ids.size(); ++i) local[ids[i]] = static_cast<int>(i);
  Mat hs(static_cast<Eigen::Index>(ids.size()), m.embed_dim());
  parallel_for(
      ids.size(),
      [&](std::size_t i) { hs.row(static_cast<Eigen::Index>(i)) = gcn_forward(graphs[ids[i]], m).transpose(); },
      jobs);
  double total = 0.0;
  for (const PairSample& p : batch) {
    PairProb prob = rank_pair_embedded(hs.row(local[p.first]).transpose(),
                                       hs.row(local[p.second]).transpose(), m);
    total += ranking_loss(prob, RankTarget{p.first_wins});
  }
  return total / static_cast<double>(batch.size()) + detail::decay_penalty(m);
}

// Analytic gradient of batch_loss. Per-graph work runs in parallel into
// per-graph buffers; all cross-graph reductions happen serially in index
// order, so results do not depend on the jobs setting.
inline Gradients backward(const std::vector<EncodedGraph>& graphs,
                          const std::vector<PairSample>& batch, const PredictorModel& m,
                          int jobs = 0) {
  detail::check_batch(graphs, batch);
  const int u = m.hyper.units;
  const int e = m.embed_dim();
  const int outs = m.head_outputs();

  std::vector<int> ids = detail::referenced_graphs(batch, graphs.size());
  std::vector<int> local(graphs.size(), -1);
  for (std::size_t i = 0; i < ids.size(); ++i) local[ids[i]] = static_cast<int>(i);

  std::vector<detail::GraphTape> tapes(ids.size());
  parallel_for(
      ids.size(), [&](std::size_t i) { detail::forward_tape(graphs[ids[i]], m, tapes[i]); },
      jobs);

  Gradients g;
  g.w0 = Mat::Zero(kFeatureDim, u);
  g.w1 = Mat::Zero(u, u);
  g.w2 = Mat::Zero(u, u);
  g.head_w = Mat::Zero(2 * e, outs);
  g.head_b = Vec::Zero(outs);

  // Head gradients and per-graph embedding gradients, in batch order.
  std::vector<Vec> dh(ids.size(), Vec::Zero(e));
  for (const PairSample& p : batch) {
    const Vec& h1 = tapes[static_cast<std::size_t>(local[p.first])].h;
    const Vec& h2 = tapes[static_cast<std::size_t>(local[p.second])].h;
    if (m.hyper.antisymmetric_head) {
      double y1 = detail::head_logit(m, h1, h2, 0);
      double y2 = detail::head_logit(m, h2, h1, 0);
      PairProb prob = detail::softmax_pair(y1, y2);
      double d1 = prob.p12 - (p.first_wins ? 1.0 : 0.0);
      g.head_w.col(0).head(e) += d1 * (h1 - h2);
      g.head_w.col(0).tail(e) += d1 * (h2 - h1);
      Vec dir = m.head_w.col(0).head(e) - m.head_w.col(0).tail(e);
      dh[static_cast<std::size_t>(local[p.first])] += d1 * dir;
      dh[static_cast<std::size_t>(local[p.second])] -= d1 * dir;
    } else {
      double y1 = detail::head_logit(m, h1, h2, 0);
      double y2 = detail::head_logit(m, h1, h2, 1);
      PairProb prob = detail::softmax_pair(y1, y2);
      Vec d(2);
      d << prob.p12 - (p.first_wins ? 1.0 : 0.0), prob.p21 - (p.first_wins ? 0.0 : 1.0);
      Vec cat(2 * e);
      cat << h1, h2;
      g.head_w.noalias() += cat * d.transpose();
      g.head_b += d;
      dh[static_cast<std::size_t>(local[p.first])] += m.head_w.topRows(e) * d;
      dh[static_cast<std::size_t>(local[p.second])] += m.head_w.bottomRows(e) * d;
    }
  }

  // Backprop through the GCN stack. relu' is taken from the post-activation
  // sign (H > 0), matching the subgradient used in the forward pass.
  parallel_for(
      ids.size(),
      [&](std::size_t i) {
        detail::GraphTape& t = tapes[i];
        const EncodedGraph& gr = graphs[ids[i]];
        const int n = gr.n_real;
        auto a = gr.a_norm.topLeftCorner(n, n);
        const double inv_n = 1.0 / static_cast<double>(n);
        Vec dh3 = m.hyper.dense_skip ? dh[i].segment(2 * u, u).eval() : dh[i];
        Mat dH3 = (inv_n * dh3.transpose()).replicate(n, 1);
        t.dz3 = dH3.array() * (t.h3.array() > 0.0).cast<double>();
        Mat dH2 = a * (t.dz3 * m.w2.transpose());
        if (m.hyper.dense_skip)
          dH2 += (inv_n * dh[i].segment(u, u).transpose()).replicate(n, 1);
        t.dz2 = dH2.array() * (t.h2.array() > 0.0).cast<double>();
        Mat dH1 = a * (t.dz2 * m.w1.transpose());
        if (m.hyper.dense_skip)
          dH1 += (inv_n * dh[i].head(u).transpose()).replicate(n, 1);
        t.dz1 = dH1.array() * (t.h1.array() > 0.0).cast<double>();
      },
      jobs);

  for (std::size_t i = 0; i < ids.size(); ++i) {
    const detail::GraphTape& t = tapes[i];
    g.w2.noalias() += t.ah2.transpose() * t.dz3;
    g.w1.noalias() += t.ah1.transpose() * t.dz2;
    g.w0.noalias() += t.ax.transpose() * t.dz1;
  }

  const double scale = 1.0 / static_cast<double>(batch.size());
  const double wd = m.hyper.weight_decay;
  g.w0 = scale * g.w0 + wd * m.w0;
  g.w1 = scale * g.w1 + wd * m.w1;
  g.w2 = scale * g.w2 + wd * m.w2;
  g.head_w = scale * g.head_w + wd * m.head_w;
  g.head_b = scale * g.head_b + wd * m.head_b;
  return g;
}

inline void adagrad_step(PredictorModel& m, const Gradients& g) {
  const double lr = m.hyper.lr;
  auto update = [lr](Mat& param, Mat& acc, const Mat& grad) {
    acc.array() += grad.array().square();
    param.array() -= lr * grad.array() / (acc.array().sqrt() + 1e-10);
  };
  update(m.w0, m.acc_w0, g.w0);
  update(m.w1, m.acc_w1, g.w1);
  update(m.w2, m.acc_w2, g.w2);
  update(m.head_w, m.acc_head_w, g.head_w);
  m.acc_head_b.array() += g.head_b.array().square();
  m.head_b.array() -= lr * g.head_b.array() / (m.acc_head_b.array().sqrt() + 1e-10);
}

// --- training ------------------------------------------------------------------

struct TrainOptions {
  int epochs = 40;
  std::uint64_t seed = 0;
  Hyper hyper{};
  // 0 trains on every pair each epoch; otherwise a fresh seeded subsample of
  // this many pairs is drawn per epoch.
  int max_pairs_per_epoch = 0;
  int jobs = 0;
};

// Runs minibatch Adagrad over the given pairs. Deterministic: the same
// (graphs, pairs, options) produce bitwise-identical weights.
inline void train_more(PredictorModel& m, const std::vector<EncodedGraph>& graphs,
                       const std::vector<PairSample>& pairs, const TrainOptions& opts) {
  if (pairs.empty() || opts.epochs <= 0) return;
  detail::check_batch(graphs, pairs);
  const int batch_size = std::max(1, m.hyper.batch_size);
  std::vector<int> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    Rng rng(derive_seed(opts.seed, "epoch", static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    std::size_t use = order.size();
    if (opts.max_pairs_per_epoch > 0)
      use = std::min<std::size_t>(use, static_cast<std::size_t>(opts.max_pairs_per_epoch));
    for (std::size_t start = 0; start < use; start += static_cast<std::size_t>(batch_size)) {
      std::size_t stop = std::min(use, start + static_cast<std::size_t>(batch_size));
      std::vector<PairSample> batch;
      batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) batch.push_back(pairs[static_cast<std::size_t>(order[i])]);
      adagrad_step(m, backward(graphs, batch, m, opts.jobs));
    }
  }
}

inline PredictorModel train_pairs(const std::vector<EncodedGraph>& graphs,
                                  const std::vector<PairSample>& pairs,
                                  const TrainOptions& opts) {
  PredictorModel m = init_model(opts.hyper, derive_seed(opts.seed, "init-model"));
  train_more(m, graphs, pairs, opts);
  return m;
}

// Contract-level entry point taking explicit spec pairs. Specs are
// deduplicated by canonical hash and encoded once under `input`.
inline PredictorModel train(
    const std::vector<std::tuple<ArchSpec, ArchSpec, RankTarget>>& spec_pairs,
    const TensorShape& input, const ShapeNormalizer& norm, const TrainOptions& opts) {
  std::vector<EncodedGraph> graphs;
  std::vector<PairSample> pairs;
  std::unordered_map<HashId, int> index;
  auto intern = [&](const ArchSpec& spec) {
    HashId h = canonical_hash(spec);
    auto it = index.find(h);
    if (it != index.end()) return it->second;
    graphs.push_back(encode_for(spec, input, norm, opts.hyper.use_vertex_shapes));
    int id = static_cast<int>(graphs.size()) - 1;
    index.emplace(std::move(h), id);
    return id;
  };
  for (const auto& [a, b, t] : spec_pairs)
    pairs.push_back({intern(a), intern(b), t.first_wins});
  return train_pairs(graphs, pairs, opts);
}

// Fraction of pairs whose predicted order matches the recorded outcome.
inline double pairwise_accuracy(const Vec& utilities, const std::vector<PairSample>& pairs) {
  if (pairs.empty()) throw InvalidArgumentError("no pairs to evaluate");
  std::size_t correct = 0;
  for (const PairSample& p : pairs) {
    double diff = utilities(p.first) - utilities(p.second);
    if ((diff > 0.0) == p.first_wins && diff != 0.0) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

// --- checkpointing -----------------------------------------------------------

// Binary layout: magic "GRGC", version u16, then each matrix as
// (rows u32, cols u32, row-major doubles), weights first (w0, w1, w2, head_w,
// head_b), accumulators in the same order, then scalar hyperparameters and
// metadata. All integers and doubles are little-endian.

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline void put_mat(std::string& out, const Mat& m) {
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
}

class ByteReader {
 public:
  ByteReader(const std::string& data, const std::string& what)
      : data_(data), what_(what) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(byte() | byte() << 8); }

  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
    return v;
  }

  double f64() {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(byte()) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }

  Mat mat() {
    std::uint32_t rows = u32(), cols = u32();
    if (rows > 1'000'000 || cols > 1'000'000) fail();
    Mat m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
      for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = f64();
    return m;
  }

  std::string str() {
    std::uint32_t len = u32();
    std::string s;
    for (std::uint32_t i = 0; i < len; ++i) s.push_back(static_cast<char>(byte()));
    return s;
  }

  std::uint8_t byte() {
    if (pos_ >= data_.size()) fail();
    return static_cast<std::uint8_t>(data_[pos_++]);
  }

  [[noreturn]] void fail() const { throw IoError("truncated or corrupt checkpoint: " + what_); }

 private:
  const std::string& data_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline constexpr char kCheckpointMagic[4] = {'G', 'R', 'G', 'C'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

inline void save_model(const std::filesystem::path& path, const PredictorModel& m) {
  std::string out;
  out.append(kCheckpointMagic, 4);
  detail::put_u16(out, kCheckpointVersion);
  detail::put_mat(out, m.w0);
  detail::put_mat(out, m.w1);
  detail::put_mat(out, m.w2);
  detail::put_mat(out, m.head_w);
  detail::put_mat(out, m.head_b);
  detail::put_mat(out, m.acc_w0);
  detail::put_mat(out, m.acc_w1);
  detail::put_mat(out, m.acc_w2);
  detail::put_mat(out, m.acc_head_w);
  detail::put_mat(out, m.acc_head_b);
  detail::put_f64(out, m.hyper.lr);
  detail::put_f64(out, m.hyper.weight_decay);
  detail::put_u32(out, static_cast<std::uint32_t>(m.hyper.units));
  detail::put_u32(out, static_cast<std::uint32_t>(m.hyper.batch_size));
  std::uint8_t flags = (m.hyper.antisymmetric_head ? 1 : 0) |
                       (m.hyper.dense_skip ? 2 : 0) |
                       (m.hyper.use_vertex_shapes ? 4 : 0);
  out.push_back(static_cast<char>(flags));
  detail::put_u32(out, static_cast<std::uint32_t>(m.meta.label_epoch));
  detail::put_u32(out, static_cast<std::uint32_t>(m.meta.normalizer.max_c));
  detail::put_u32(out, static_cast<std::uint32_t>(m.meta.normalizer.max_h));
  detail::put_u32(out, static_cast<std::uint32_t>(m.meta.normalizer.max_w));
  detail::put_u32(out, static_cast<std::uint32_t>(m.meta.dataset.size()));
  out.append(m.meta.dataset);
  atomic_write_file(path, out);
}

inline PredictorModel load_model(const std::filesystem::path& path) {
  std::string data = read_file(path);
  detail::ByteReader r(data, path.string());
  for (char c : kCheckpointMagic)
    if (static_cast<char>(r.byte()) != c) throw IoError("bad checkpoint magic in " + path.string());
  if (r.u16() != kCheckpointVersion)
    throw IoError("unsupported checkpoint version in " + path.string());
  PredictorModel m;
  m.w0 = r.mat();
  m.w1 = r.mat();
  m.w2 = r.mat();
  m.head_w = r.mat();
  Mat head_b = r.mat();
  m.acc_w0 = r.mat();
  m.acc_w1 = r.mat();
  m.acc_w2 = r.mat();
  m.acc_head_w = r.mat();
  Mat acc_head_b = r.mat();
  if (head_b.cols() != 1 || acc_head_b.cols() != 1)
    throw IoError("bad head bias layout in " + path.string());
  m.head_b = head_b.col(0);
  m.acc_head_b = acc_head_b.col(0);
  m.hyper.lr = r.f64();
  m.hyper.weight_decay = r.f64();
  m.hyper.units = static_cast<int>(r.u32());
  m.hyper.batch_size = static_cast<int>(r.u32());
  std::uint8_t flags = r.byte();
  m.hyper.antisymmetric_head = flags & 1;
  m.hyper.dense_skip = flags & 2;
  m.hyper.use_vertex_shapes = flags & 4;
  m.meta.label_epoch = static_cast<int>(r.u32());
  m.meta.normalizer.max_c = static_cast<int>(r.u32());
  m.meta.normalizer.max_h = static_cast<int>(r.u32());
  m.meta.normalizer.max_w = static_cast<int>(r.u32());
  m.meta.dataset = r.str();
  return m;
}

}  // namespace grasp
