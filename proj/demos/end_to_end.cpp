// Miniature end-to-end run of the whole pipeline, all in process: sample a
// pool, label it with the synthetic oracle, train the ranking predictor on
// early-epoch labels, check its held-out pairwise accuracy, then let the
// predictor guide a small search and compare against random selection.

#include <cstdio>
#include <vector>

#include "grasp/benchmark_store.hpp"
#include "grasp/encoding.hpp"
#include "grasp/metrics.hpp"
#include "grasp/nas_search.hpp"
#include "grasp/predictor.hpp"
#include "grasp/search_space.hpp"
#include "grasp/shape_inference.hpp"
#include "grasp/synthetic_oracle.hpp"

using namespace grasp;

int main() {
  const DatasetProfile& profile = profile_by_name("cifar10");
  const int n_specs = 120;
  const int label_epoch = 40;

  std::printf("sampling %d unique architectures...\n", n_specs);
  std::vector<ArchSpec> specs = sample_unique(n_specs, 7, 0.5);

  std::vector<double> accs40, accs120;
  std::vector<VertexShapes> shapes;
  for (const ArchSpec& s : specs) {
    accs40.push_back(synthetic_accuracy(s, profile, label_epoch, profile.total_epochs));
    accs120.push_back(synthetic_accuracy(s, profile, 120, profile.total_epochs));
    shapes.push_back(infer_shapes(s, profile.input_shape));
  }
  std::printf("kendall tau between epoch-40 and epoch-120 labels: %.3f\n",
              kendall_tau(accs40, accs120));

  // Train on the first 90 specs, hold out the remaining 30.
  const int n_train = 90;
  ShapeNormalizer norm = ShapeNormalizer::covering(shapes);
  std::vector<EncodedGraph> graphs;
  for (std::size_t i = 0; i < specs.size(); ++i)
    graphs.push_back(encode(specs[i], normalize_shapes(shapes[i], norm)));

  std::vector<double> train_accs(accs40.begin(), accs40.begin() + n_train);
  std::vector<EncodedGraph> train_graphs(graphs.begin(), graphs.begin() + n_train);
  std::vector<PairSample> train_pairs_list =
      make_rank_pairs(train_accs, PairMode::kDeduped, 11);

  TrainOptions opts;
  opts.epochs = 30;
  opts.seed = 11;
  opts.hyper.units = 48;
  opts.hyper.batch_size = 64;
  std::printf("training on %zu pairs from %d specs...\n", train_pairs_list.size(), n_train);
  PredictorModel model = train_pairs(train_graphs, train_pairs_list, opts);
  model.meta.label_epoch = label_epoch;
  model.meta.dataset = profile.name;
  model.meta.normalizer = norm;

  std::vector<EncodedGraph> held_graphs(graphs.begin() + n_train, graphs.end());
  std::vector<double> held_accs(accs40.begin() + n_train, accs40.end());
  Mat held_embed = embed_all(held_graphs, model);
  Vec held_util = utility_scores(held_embed, model);
  std::vector<PairSample> held_pairs = make_rank_pairs(held_accs, PairMode::kDeduped);
  std::printf("held-out pairwise accuracy (%zu pairs): %.3f\n", held_pairs.size(),
              pairwise_accuracy(held_util, held_pairs));

  SearchOptions sopts;
  sopts.space_size = 300;
  sopts.iterations = 4;
  sopts.per_iter = 15;
  sopts.seed = 3;
  sopts.label_epoch = label_epoch;
  std::printf("running guided search (4 iterations x 15 evaluations)...\n");
  SearchResult guided = run_search(profile, sopts);

  SearchOptions ropts = sopts;
  ropts.iterations = 1;
  ropts.per_iter = 60;
  SearchResult random = run_search(profile, ropts);

  std::printf("guided search best: %.4f (hash %.12s...)\n", guided.best_acc,
              guided.best_hash.c_str());
  std::printf("random search best: %.4f (same pool, same budget)\n", random.best_acc);
  for (const TraceRow& row : guided.trace)
    std::printf("  iter %d: evaluated %3d, best %.4f, precision@10 %.2f\n", row.iteration,
                row.evaluated_count, row.best_acc, row.precision_at_10);
  return 0;
}
