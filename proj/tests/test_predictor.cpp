#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <tuple>

#include "grasp/encoding.hpp"
#include "grasp/predictor.hpp"
#include "grasp/search_space.hpp"
#include "grasp/shape_inference.hpp"
#include "oracles.hpp"

using namespace grasp;

namespace {

EncodedGraph encode_seed(std::uint64_t seed, bool use_shapes = true) {
  ArchSpec spec = sample_arch(seed, 0.5);
  return encode_for(spec, TensorShape{3, 32, 32}, ShapeNormalizer{}, use_shapes);
}

// Envelope wide enough for any sampled doubling chain; used where tests sweep
// thousands of seeds and only care about structural properties.
EncodedGraph encode_seed_wide(std::uint64_t seed) {
  ArchSpec spec = sample_arch(seed, 0.5);
  return encode_for(spec, TensorShape{3, 32, 32}, ShapeNormalizer{1 << 22, 64, 64}, true);
}

oracle::DMat to_dmat(const Mat& m) {
  oracle::DMat out(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

using Labeled = std::vector<std::pair<ArchSpec, double>>;
using SpecPairs = std::vector<std::tuple<ArchSpec, ArchSpec, RankTarget>>;

SpecPairs all_pairs(const Labeled& labeled) {
  SpecPairs out;
  for (std::size_t i = 0; i < labeled.size(); ++i)
    for (std::size_t j = i + 1; j < labeled.size(); ++j) {
      if (labeled[i].second == labeled[j].second) continue;
      out.push_back({labeled[i].first, labeled[j].first,
                     RankTarget{labeled[i].second > labeled[j].second}});
    }
  return out;
}

ShapeNormalizer covering_for(const Labeled& labeled, const TensorShape& input) {
  std::vector<VertexShapes> all;
  for (const auto& [spec, acc] : labeled) all.push_back(infer_shapes(spec, input));
  return ShapeNormalizer::covering(all);
}

// Central finite difference of the batch objective with respect to one
// parameter entry.
double fd_slope(PredictorModel& m, double* entry, const std::vector<EncodedGraph>& graphs,
                const std::vector<PairSample>& batch, double step) {
  const double saved = *entry;
  *entry = saved + step;
  const double up = batch_loss(graphs, batch, m, 1);
  *entry = saved - step;
  const double down = batch_loss(graphs, batch, m, 1);
  *entry = saved;
  return (up - down) / (2.0 * step);
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

}  // namespace

TEST_CASE("two-node encoding yields the uniform normalized adjacency") {
  AdjMatrix adj(2, std::vector<std::uint8_t>(2, 0));
  adj[0][1] = 1;
  ArchSpec spec = assign_layer_types(adj, 0);
  EncodedGraph g = encode_for(spec, TensorShape{3, 32, 32});
  REQUIRE(g.n_real == 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(g.a_norm(i, j) == Catch::Approx(0.5).epsilon(1e-15));
  for (int i = 2; i < kEncodedNodes; ++i)
    for (int j = 0; j < kEncodedNodes; ++j) {
      CHECK(g.a_norm(i, j) == 0.0);
      CHECK(g.a_norm(j, i) == 0.0);
    }
  CHECK(g.x(0, 0) == 1.0);  // input one-hot
  CHECK(g.x(1, 1) == 1.0);  // output one-hot
  CHECK(g.x(0, 9) == Catch::Approx(3.0 / 4096.0));
}

TEST_CASE("normalized adjacency eigenvalues stay within the unit bound") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EncodedGraph g = encode_seed(seed);
    Eigen::SelfAdjointEigenSolver<Mat> es(g.a_norm.topLeftCorner(g.n_real, g.n_real));
    REQUIRE(es.info() == Eigen::Success);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      CHECK(std::abs(es.eigenvalues()[i]) <= 1.0 + 1e-12);
  }
}

TEST_CASE("disabling vertex shape features zeroes their columns") {
  EncodedGraph with = encode_seed(3, true);
  EncodedGraph without = encode_seed(3, false);
  for (int i = 0; i < kEncodedNodes; ++i) {
    for (int j = 9; j < kFeatureDim; ++j) CHECK(without.x(i, j) == 0.0);
    for (int j = 0; j < 9; ++j) CHECK(without.x(i, j) == with.x(i, j));
  }
}

TEST_CASE("the embedding matches an independently coded dense route") {
  Hyper hyper;
  hyper.units = 31;
  for (bool dense_skip : {false, true}) {
    hyper.dense_skip = dense_skip;
    PredictorModel m = init_model(hyper, 17);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      EncodedGraph g = encode_seed(seed);
      Vec fast = gcn_forward(g, m);
      std::vector<bool> mask(kEncodedNodes, false);
      for (int i = 0; i < g.n_real; ++i) mask[static_cast<std::size_t>(i)] = true;
      std::vector<double> slow =
          oracle::gcn_embed(to_dmat(g.a_norm), to_dmat(g.x), mask, to_dmat(m.w0), to_dmat(m.w1),
                            to_dmat(m.w2), dense_skip);
      REQUIRE(fast.size() == static_cast<Eigen::Index>(slow.size()));
      for (Eigen::Index i = 0; i < fast.size(); ++i)
        CHECK(fast[i] == Catch::Approx(slow[static_cast<std::size_t>(i)]).margin(1e-12));
    }
  }
}

TEST_CASE("padding rows never leak into the embedding") {
  Hyper hyper;
  hyper.units = 16;
  PredictorModel m = init_model(hyper, 5);
  EncodedGraph g = encode_seed(11);
  EncodedGraph poisoned = g;
  for (int i = g.n_real; i < kEncodedNodes; ++i)
    for (int j = 0; j < kFeatureDim; ++j) poisoned.x(i, j) = 1e6;
  Vec a = gcn_forward(g, m);
  Vec b = gcn_forward(poisoned, m);
  CHECK(a == b);
}

TEST_CASE("pair probabilities are an exact partition of one") {
  Hyper hyper;
  hyper.units = 24;
  PredictorModel m = init_model(hyper, 23);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    EncodedGraph g1 = encode_seed_wide(2 * seed);
    EncodedGraph g2 = encode_seed_wide(2 * seed + 1);
    PairProb p = rank_pair(g1, g2, m);
    CHECK(p.p12 + p.p21 == 1.0);
    CHECK(p.p12 > 0.0);
    CHECK(p.p21 > 0.0);
    PairProb q = rank_pair(g2, g1, m);
    CHECK(q.p12 == p.p21);
    CHECK(q.p21 == p.p12);
  }
}

TEST_CASE("an architecture compared with itself scores exactly one half") {
  Hyper hyper;
  hyper.units = 24;
  for (bool antisym : {true, false}) {
    hyper.antisymmetric_head = antisym;
    PredictorModel m = init_model(hyper, 29);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      EncodedGraph g = encode_seed(seed);
      PairProb p = rank_pair(g, g, m);
      if (antisym) {
        CHECK(p.p12 == 0.5);
        CHECK(p.p21 == 0.5);
      } else {
        // The plain two-output head has no exact symmetry guarantee; the
        // probabilities still partition one.
        CHECK(p.p12 + p.p21 == 1.0);
      }
    }
  }
}

TEST_CASE("ranking loss reproduces hand-computed values") {
  CHECK(ranking_loss(PairProb{0.2, 0.8}, RankTarget{true}) ==
        Catch::Approx(1.6094379124341003).epsilon(1e-12));
  CHECK(ranking_loss(PairProb{0.2, 0.8}, RankTarget{false}) ==
        Catch::Approx(-std::log(0.8)).epsilon(1e-12));
  CHECK(ranking_loss(PairProb{0.5, 0.5}, RankTarget{true}) ==
        Catch::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("analytic gradients agree with finite differences") {
  Hyper hyper;
  hyper.units = 7;
  hyper.weight_decay = 0.001126;
  std::vector<EncodedGraph> graphs;
  for (std::uint64_t seed = 0; seed < 6; ++seed) graphs.push_back(encode_seed(seed));
  std::vector<PairSample> batch = {{0, 1, true}, {2, 3, false}, {4, 5, true},
                                   {1, 2, false}, {0, 5, true}};

  for (bool antisym : {true, false}) {
    for (bool dense_skip : {false, true}) {
      hyper.antisymmetric_head = antisym;
      hyper.dense_skip = dense_skip;
      PredictorModel m = init_model(hyper, 1000 + (antisym ? 1 : 0) + (dense_skip ? 2 : 0));
      Gradients g = backward(graphs, batch, m, 1);

      const double step = 1e-5;
      auto check_matrix = [&](Mat& param, const Mat& grad, const char* name) {
        for (Eigen::Index i = 0; i < param.rows(); ++i)
          for (Eigen::Index j = 0; j < param.cols(); ++j) {
            double fd = fd_slope(m, &param(i, j), graphs, batch, step);
            INFO(name << "(" << i << "," << j << ")");
            CHECK(rel_err(fd, grad(i, j)) <= 1e-4);
          }
      };
      check_matrix(m.w0, g.w0, "w0");
      check_matrix(m.w1, g.w1, "w1");
      check_matrix(m.w2, g.w2, "w2");
      check_matrix(m.head_w, g.head_w, "head_w");
      for (Eigen::Index i = 0; i < m.head_b.size(); ++i) {
        double fd = fd_slope(m, &m.head_b(i), graphs, batch, step);
        INFO("head_b(" << i << ")");
        CHECK(rel_err(fd, g.head_b(i)) <= 1e-4);
      }
    }
  }
}

TEST_CASE("self-pairs contribute exactly zero gradient") {
  // An architecture compared against itself gives p12 = 1/2 exactly; the two
  // per-pair embedding deltas cancel term for term, so with weight decay off
  // the whole gradient is identically zero and the loss is ln 2.
  Hyper hyper;
  hyper.units = 9;
  hyper.weight_decay = 0.0;
  PredictorModel m = init_model(hyper, 3);
  std::vector<EncodedGraph> graphs = {encode_seed(0), encode_seed(1)};
  std::vector<PairSample> batch = {{0, 0, true}, {1, 1, false}};
  CHECK(batch_loss(graphs, batch, m, 1) == Catch::Approx(std::log(2.0)).epsilon(1e-15));
  Gradients g = backward(graphs, batch, m, 1);
  CHECK(g.head_w.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.head_b.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.w0.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.w1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.w2.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("training is bitwise deterministic in the seed and jobs-independent") {
  auto specs = sample_unique(24, 31, 0.5);
  Labeled labeled;
  for (std::size_t i = 0; i < specs.size(); ++i)
    labeled.emplace_back(specs[i], 0.3 + 0.01 * static_cast<double>(i));
  SpecPairs pairs = all_pairs(labeled);
  ShapeNormalizer norm = covering_for(labeled, TensorShape{3, 32, 32});

  TrainOptions opts;
  opts.epochs = 3;
  opts.seed = 77;
  opts.hyper.units = 12;
  opts.hyper.batch_size = 16;

  PredictorModel a = train(pairs, TensorShape{3, 32, 32}, norm, opts);
  PredictorModel b = train(pairs, TensorShape{3, 32, 32}, norm, opts);
  CHECK(a.w0 == b.w0);
  CHECK(a.w2 == b.w2);
  CHECK(a.head_w == b.head_w);
  CHECK(a.acc_w0 == b.acc_w0);

  opts.jobs = 3;
  PredictorModel c = train(pairs, TensorShape{3, 32, 32}, norm, opts);
  CHECK(a.w0 == c.w0);
  CHECK(a.w2 == c.w2);
  CHECK(a.head_w == c.head_w);

  opts.jobs = 0;
  opts.seed = 78;
  PredictorModel d = train(pairs, TensorShape{3, 32, 32}, norm, opts);
  CHECK(a.w0 != d.w0);
}

TEST_CASE("zero training epochs leave the initialization untouched") {
  auto specs = sample_unique(6, 8, 0.5);
  Labeled labeled;
  for (std::size_t i = 0; i < specs.size(); ++i)
    labeled.emplace_back(specs[i], 0.1 * static_cast<double>(i + 1));
  TrainOptions opts;
  opts.epochs = 0;
  opts.seed = 5;
  opts.hyper.units = 8;
  ShapeNormalizer norm = covering_for(labeled, TensorShape{3, 32, 32});
  PredictorModel t = train(all_pairs(labeled), TensorShape{3, 32, 32}, norm, opts);
  PredictorModel fresh = init_model(opts.hyper, derive_seed(5, "init-model"));
  CHECK(t.w0 == fresh.w0);
  CHECK(t.w1 == fresh.w1);
  CHECK(t.w2 == fresh.w2);
  CHECK(t.head_w == fresh.head_w);
}

TEST_CASE("duplicated pairs in a batch act as integer weights") {
  Hyper hyper;
  hyper.units = 10;
  std::vector<EncodedGraph> graphs = {encode_seed(0), encode_seed(1), encode_seed(2)};
  PredictorModel m = init_model(hyper, 91);

  std::vector<PairSample> twice = {{0, 1, true}, {0, 1, true}};
  std::vector<PairSample> once = {{0, 1, true}};
  CHECK(batch_loss(graphs, twice, m, 1) == batch_loss(graphs, once, m, 1));
  Gradients g2 = backward(graphs, twice, m, 1);
  Gradients g1 = backward(graphs, once, m, 1);
  CHECK(g2.w0 == g1.w0);
  CHECK(g2.w1 == g1.w1);
  CHECK(g2.w2 == g1.w2);
  CHECK(g2.head_w == g1.head_w);
}

TEST_CASE("the model separates linearly ranked synthetic labels") {
  auto specs = sample_unique(40, 123, 0.5);
  Labeled labeled;
  for (const ArchSpec& s : specs) {
    int edges = 0;
    for (const auto& row : s.adjacency)
      for (auto v : row) edges += v;
    labeled.emplace_back(s, 0.30 + 0.005 * edges);
  }
  TrainOptions opts;
  opts.epochs = 60;
  opts.seed = 2;
  opts.hyper.units = 32;
  opts.hyper.batch_size = 64;
  const TensorShape input{3, 32, 32};
  ShapeNormalizer norm = covering_for(labeled, input);
  PredictorModel m = train(all_pairs(labeled), input, norm, opts);

  std::vector<EncodedGraph> graphs;
  for (const auto& [spec, acc] : labeled) graphs.push_back(encode_for(spec, input, norm));
  Mat embeddings = embed_all(graphs, m, 1);
  Vec scores = utility_scores(embeddings, m);
  int correct = 0, total = 0;
  for (std::size_t i = 0; i < labeled.size(); ++i)
    for (std::size_t j = i + 1; j < labeled.size(); ++j) {
      double da = labeled[i].second - labeled[j].second;
      if (da == 0.0) continue;
      ++total;
      double ds = scores[static_cast<Eigen::Index>(i)] - scores[static_cast<Eigen::Index>(j)];
      if ((da > 0) == (ds > 0)) ++correct;
    }
  REQUIRE(total > 0);
  CHECK(static_cast<double>(correct) / total >= 0.95);
}

TEST_CASE("pairwise accuracy scores sign agreement and penalizes ties") {
  Vec u(3);
  u << 0.9, 0.1, 0.1;
  std::vector<PairSample> pairs = {{0, 1, true}, {1, 0, false}, {1, 2, true}};
  CHECK(pairwise_accuracy(u, pairs) == Catch::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(pairwise_accuracy(u, {}), InvalidArgumentError);
}

TEST_CASE("checkpoints round-trip bit for bit") {
  Hyper hyper;
  hyper.units = 13;
  hyper.dense_skip = true;
  PredictorModel m = init_model(hyper, 55);
  m.meta.label_epoch = 40;
  m.meta.dataset = "cifar10";
  m.meta.normalizer = ShapeNormalizer{8192, 64, 64};
  m.acc_w0.setConstant(0.25);

  std::filesystem::path path = std::filesystem::temp_directory_path() / "grasp_ckpt_test.bin";
  save_model(path, m);
  PredictorModel back = load_model(path);
  CHECK(back.hyper.units == 13);
  CHECK(back.hyper.dense_skip);
  CHECK(back.hyper.antisymmetric_head == m.hyper.antisymmetric_head);
  CHECK(back.hyper.lr == m.hyper.lr);
  CHECK(back.hyper.weight_decay == m.hyper.weight_decay);
  CHECK(back.meta.label_epoch == 40);
  CHECK(back.meta.dataset == "cifar10");
  CHECK(back.meta.normalizer.max_c == 8192);
  CHECK(back.w0 == m.w0);
  CHECK(back.w1 == m.w1);
  CHECK(back.w2 == m.w2);
  CHECK(back.head_w == m.head_w);
  CHECK(back.head_b == m.head_b);
  CHECK(back.acc_w0 == m.acc_w0);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_model(std::filesystem::temp_directory_path() / "grasp_missing.bin"),
                  grasp::Error);
}
