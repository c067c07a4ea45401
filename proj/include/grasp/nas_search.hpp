#pragma once

// Predictor-guided architecture search. Each iteration scores the remaining
// pool against the best architecture found so far, evaluates the top
// candidates with the accuracy oracle, and refits the ranking predictor on
// everything evaluated up to now. The first iteration has no trained
// predictor, so it selects uniformly at random.

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "grasp/benchmark_store.hpp"
#include "grasp/encoding.hpp"
#include "grasp/errors.hpp"
#include "grasp/metrics.hpp"
#include "grasp/parallel.hpp"
#include "grasp/predictor.hpp"
#include "grasp/rng.hpp"
#include "grasp/search_space.hpp"
#include "grasp/shape_inference.hpp"
#include "grasp/synthetic_oracle.hpp"

namespace grasp {

using OracleFn = std::function<double(const ArchSpec&)>;

// Predictor refit schedule per iteration. The hyperparameters here are sized
// for the in-loop surrogate, which retrains many times per search; the full
// model defaults stay in Hyper.
struct RefitOptions {
  int epochs = 8;
  int max_pairs_per_epoch = 2500;
  bool warm_start = false;
  Hyper hyper = small_hyper();

  static Hyper small_hyper() {
    Hyper h;
    h.units = 48;
    return h;
  }
};

struct SearchOptions {
  int space_size = 1000;
  int iterations = 5;
  int per_iter = 40;
  std::uint64_t seed = 0;
  int label_epoch = 40;
  double edge_prob = 0.5;
  int jobs = 0;
  // Evaluates the oracle on the whole pool up front so the trace can report
  // Precision@10 against ground truth; individual evaluations then reuse the
  // cached values, keeping each architecture evaluated at most once.
  bool track_precision = true;
  RefitOptions refit{};
};

struct TraceRow {
  int iteration = 0;
  int evaluated_count = 0;
  double best_acc = 0.0;
  double precision_at_10 = -1.0;  // -1 when ground truth is not tracked
};

struct SearchResult {
  ArchSpec best;
  double best_acc = 0.0;
  HashId best_hash;
  std::vector<TraceRow> trace;
  std::vector<std::string> warnings;
};

namespace detail {

struct PoolEntry {
  ArchSpec spec;
  HashId hash;
  EncodedGraph graph;
  double acc = 0.0;
  bool has_acc = false;
  bool evaluated = false;  // counted into the evaluated set
};

inline std::vector<int> top_candidates(const std::vector<PoolEntry>& entries,
                                       const std::vector<double>& scores, int count) {
  std::vector<int> open;
  for (int i = 0; i < static_cast<int>(entries.size()); ++i)
    if (!entries[static_cast<std::size_t>(i)].evaluated) open.push_back(i);
  std::sort(open.begin(), open.end(), [&](int a, int b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return entries[static_cast<std::size_t>(a)].hash < entries[static_cast<std::size_t>(b)].hash;
  });
  if (static_cast<int>(open.size()) > count) open.resize(static_cast<std::size_t>(count));
  return open;
}

}  // namespace detail

inline SearchResult run_search(const DatasetProfile& profile, const SearchOptions& opts,
                               OracleFn oracle = {}) {
  if (opts.space_size < 1 || opts.iterations < 1 || opts.per_iter < 1)
    throw InvalidArgumentError("space size, iterations, and per-iteration count must be >= 1");
  if (static_cast<long long>(opts.per_iter) * opts.iterations > opts.space_size)
    throw InvalidArgumentError("evaluation budget exceeds the pool size");

  OracleFn eval = oracle;
  if (!eval)
    eval = [&profile, &opts](const ArchSpec& spec) {
      return synthetic_accuracy(spec, profile, opts.label_epoch, profile.total_epochs);
    };

  // Pool setup: sample, hash, and encode once under a covering normalizer.
  std::vector<ArchSpec> specs =
      sample_unique(opts.space_size, derive_seed(opts.seed, "pool"), opts.edge_prob);
  std::vector<VertexShapes> shapes;
  shapes.reserve(specs.size());
  for (const ArchSpec& s : specs) shapes.push_back(infer_shapes(s, profile.input_shape));
  const ShapeNormalizer norm = ShapeNormalizer::covering(shapes);

  std::vector<detail::PoolEntry> entries(specs.size());
  parallel_for(
      specs.size(),
      [&](std::size_t i) {
        entries[i].spec = std::move(specs[i]);
        entries[i].hash = canonical_hash(entries[i].spec);
        entries[i].graph = encode(entries[i].spec, normalize_shapes(shapes[i], norm),
                                  opts.refit.hyper.use_vertex_shapes);
      },
      opts.jobs);

  SearchResult result;

  // Ground truth for the precision column, also used as the evaluation cache.
  std::vector<std::string> truth_top10;
  if (opts.track_precision) {
    parallel_for(
        entries.size(),
        [&](std::size_t i) {
          entries[i].acc = eval(entries[i].spec);
          entries[i].has_acc = true;
        },
        opts.jobs);
    std::vector<RankedItem> truth_items;
    truth_items.reserve(entries.size());
    for (const detail::PoolEntry& e : entries) truth_items.push_back({e.hash, e.acc});
    RankedList truth = RankedList::from_scores(truth_items);
    for (std::size_t i = 0; i < truth.items.size() && i < 10; ++i)
      truth_top10.push_back(truth.items[i].id);
  }

  PredictorModel model;
  bool model_ready = false;
  int best_index = -1;
  int evaluated_count = 0;

  for (int iter = 1; iter <= opts.iterations; ++iter) {
    // Score the open pool.
    std::vector<double> scores(entries.size(), -std::numeric_limits<double>::infinity());
    if (iter == 1 || !model_ready || best_index < 0) {
      Rng rng(derive_seed(opts.seed, "iter-scores", static_cast<std::uint64_t>(iter)));
      for (std::size_t i = 0; i < entries.size(); ++i) {
        double u = rng.unit();
        if (!entries[i].evaluated) scores[i] = u;
      }
    } else {
      const EncodedGraph& best_graph = entries[static_cast<std::size_t>(best_index)].graph;
      Vec best_h = gcn_forward(best_graph, model);
      parallel_for(
          entries.size(),
          [&](std::size_t i) {
            if (entries[i].evaluated) return;
            scores[i] =
                rank_pair_embedded(gcn_forward(entries[i].graph, model), best_h, model).p12;
          },
          opts.jobs);
    }

    std::vector<int> selected = detail::top_candidates(entries, scores, opts.per_iter);
    if (selected.empty()) {
      result.warnings.push_back("pool exhausted before iteration " + std::to_string(iter));
      break;
    }

    // Evaluate, capturing per-candidate failures.
    std::vector<std::string> failures(selected.size());
    parallel_for(
        selected.size(),
        [&](std::size_t k) {
          detail::PoolEntry& e = entries[static_cast<std::size_t>(selected[k])];
          if (e.has_acc) return;
          try {
            e.acc = eval(e.spec);
            e.has_acc = true;
          } catch (const std::exception& ex) {
            failures[k] = ex.what();
          }
        },
        opts.jobs);
    for (std::size_t k = 0; k < selected.size(); ++k) {
      detail::PoolEntry& e = entries[static_cast<std::size_t>(selected[k])];
      if (!e.has_acc) {
        // Failed evaluation: the candidate stays in the pool for later
        // iterations, and the event is recorded.
        result.warnings.push_back("evaluation failed for " + e.hash + ": " + failures[k]);
        continue;
      }
      e.evaluated = true;
      ++evaluated_count;
      if (best_index < 0 || e.acc > entries[static_cast<std::size_t>(best_index)].acc)
        best_index = selected[k];
    }

    // Refit on everything evaluated so far.
    std::vector<EncodedGraph> eval_graphs;
    std::vector<double> eval_accs;
    for (const detail::PoolEntry& e : entries)
      if (e.evaluated) {
        eval_graphs.push_back(e.graph);
        eval_accs.push_back(e.acc);
      }
    std::vector<PairSample> pairs =
        make_rank_pairs(eval_accs, PairMode::kDeduped,
                        derive_seed(opts.seed, "refit-pairs", static_cast<std::uint64_t>(iter)));
    if (!pairs.empty()) {
      TrainOptions topts;
      topts.epochs = opts.refit.epochs;
      topts.seed = derive_seed(opts.seed, "refit", static_cast<std::uint64_t>(iter));
      topts.hyper = opts.refit.hyper;
      topts.max_pairs_per_epoch = opts.refit.max_pairs_per_epoch;
      topts.jobs = opts.jobs;
      if (opts.refit.warm_start && model_ready) {
        train_more(model, eval_graphs, pairs, topts);
      } else {
        model = train_pairs(eval_graphs, pairs, topts);
      }
      model_ready = true;
    }

    TraceRow row;
    row.iteration = iter;
    row.evaluated_count = evaluated_count;
    row.best_acc = best_index >= 0 ? entries[static_cast<std::size_t>(best_index)].acc : 0.0;
    if (opts.track_precision && model_ready) {
      Mat embeddings(static_cast<Eigen::Index>(entries.size()), model.embed_dim());
      parallel_for(
          entries.size(),
          [&](std::size_t i) {
            embeddings.row(static_cast<Eigen::Index>(i)) =
                gcn_forward(entries[i].graph, model).transpose();
          },
          opts.jobs);
      Vec utilities = utility_scores(embeddings, model);
      std::vector<RankedItem> pred_items;
      pred_items.reserve(entries.size());
      for (std::size_t i = 0; i < entries.size(); ++i)
        pred_items.push_back({entries[i].hash, utilities(static_cast<Eigen::Index>(i))});
      RankedList pred = RankedList::from_scores(pred_items);
      int hits = 0;
      for (std::size_t i = 0; i < pred.items.size() && i < 10; ++i)
        for (const std::string& id : truth_top10)
          if (pred.items[i].id == id) ++hits;
      row.precision_at_10 = truth_top10.empty()
                                ? -1.0
                                : static_cast<double>(hits) /
                                      static_cast<double>(truth_top10.size());
    }
    result.trace.push_back(row);
  }

  if (best_index < 0) throw ExhaustionError("search evaluated nothing successfully");
  result.best = entries[static_cast<std::size_t>(best_index)].spec;
  result.best_acc = entries[static_cast<std::size_t>(best_index)].acc;
  result.best_hash = entries[static_cast<std::size_t>(best_index)].hash;
  return result;
}

// --- transfer evaluation --------------------------------------------------------

struct TransferReport {
  double pairwise_accuracy = 0.0;
  double precision_at_10 = 0.0;
  int n_specs = 0;
  int skipped = 0;  // records that failed encoding under the model's normalizer
};

// Frozen-model evaluation on another profile's recorded ground truth; no
// fine-tuning. Records are drawn from the store's logs for profile.name.
inline TransferReport transfer_predictor(const PredictorModel& model,
                                         const DatasetProfile& profile, const BenchStore& store,
                                         int eval_epoch = 0, int max_specs = 0,
                                         std::uint64_t seed = 0, int jobs = 0) {
  const int epoch = eval_epoch > 0 ? eval_epoch : model.meta.label_epoch;

  std::vector<HashId> hashes;
  std::vector<ArchSpec> specs;
  std::vector<double> accs;
  for (const HashId& hash : store.list()) {
    BenchRecord r = store.get(hash);
    auto it = r.datasets.find(profile.name);
    if (it == r.datasets.end()) continue;
    std::optional<double> acc = it->second.acc_at(epoch);
    if (!acc.has_value()) continue;
    hashes.push_back(hash);
    specs.push_back(std::move(r.spec));
    accs.push_back(*acc);
  }
  if (specs.empty())
    throw InvalidArgumentError("store shares no records with dataset " + profile.name +
                               " at epoch " + std::to_string(epoch));

  if (max_specs > 0 && static_cast<std::size_t>(max_specs) < specs.size()) {
    std::vector<std::size_t> order(specs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, "transfer-specs"));
    rng.shuffle(order);
    order.resize(static_cast<std::size_t>(max_specs));
    std::sort(order.begin(), order.end());
    std::vector<ArchSpec> s2;
    std::vector<double> a2;
    std::vector<HashId> h2;
    for (std::size_t i : order) {
      s2.push_back(std::move(specs[i]));
      a2.push_back(accs[i]);
      h2.push_back(std::move(hashes[i]));
    }
    specs = std::move(s2);
    accs = std::move(a2);
    hashes = std::move(h2);
  }

  TransferReport report;
  std::vector<EncodedGraph> graphs;
  std::vector<double> kept_accs;
  std::vector<HashId> kept_hashes;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      graphs.push_back(encode_for(specs[i], profile.input_shape, model.meta.normalizer,
                                  model.hyper.use_vertex_shapes));
      kept_accs.push_back(accs[i]);
      kept_hashes.push_back(hashes[i]);
    } catch (const NormalizerError&) {
      ++report.skipped;
    }
  }
  if (graphs.size() < 2)
    throw InvalidArgumentError("fewer than two evaluable records for dataset " + profile.name);

  Mat embeddings = embed_all(graphs, model, jobs);
  Vec utilities = utility_scores(embeddings, model);
  std::vector<PairSample> pairs = make_rank_pairs(kept_accs, PairMode::kDeduped);
  if (pairs.empty())
    throw InvalidArgumentError("all recorded accuracies are tied; nothing to rank");
  report.pairwise_accuracy = pairwise_accuracy(utilities, pairs);
  report.n_specs = static_cast<int>(graphs.size());

  std::vector<RankedItem> pred_items, truth_items;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    pred_items.push_back({kept_hashes[i], utilities(static_cast<Eigen::Index>(i))});
    truth_items.push_back({kept_hashes[i], kept_accs[i]});
  }
  RankedList pred = RankedList::from_scores(pred_items);
  RankedList truth = RankedList::from_scores(truth_items);
  const int k = std::min<int>(10, static_cast<int>(graphs.size()));
  report.precision_at_10 = precision_at_k(pred, truth, k);
  return report;
}

}  // namespace grasp
