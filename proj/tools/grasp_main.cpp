// Command-line front end. Every pipeline stage is a subcommand; all
// randomness flows from --seed through named substreams, outputs are written
// atomically, and each run logs its resolved configuration to stderr.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grasp/benchmark_store.hpp"
#include "grasp/encoding.hpp"
#include "grasp/errors.hpp"
#include "grasp/json_io.hpp"
#include "grasp/metrics.hpp"
#include "grasp/nas_search.hpp"
#include "grasp/predictor.hpp"
#include "grasp/search_space.hpp"
#include "grasp/shape_inference.hpp"
#include "grasp/synthetic_oracle.hpp"

namespace fs = std::filesystem;
using grasp::Json;

namespace {

bool g_quiet = false;

void log_config(const std::string& command, const Json& config) {
  if (g_quiet) return;
  Json line = config;
  line["command"] = command;
  std::cerr << "config: " << line.dump() << "\n";
}

grasp::TensorShape parse_shape(const std::string& text) {
  grasp::TensorShape shape{};
  char comma1 = 0, comma2 = 0;
  std::istringstream in(text);
  if (!(in >> shape.c >> comma1 >> shape.h >> comma2 >> shape.w) || comma1 != ',' ||
      comma2 != ',' || !in.eof())
    throw grasp::InvalidArgumentError("expected C,H,W but got \"" + text + "\"");
  shape.validate();
  return shape;
}

std::string default_store() {
  const char* env = std::getenv("GRASP_STORE");
  return env ? env : "";
}

const std::string& require_store(const std::string& path) {
  if (path.empty())
    throw grasp::InvalidArgumentError("no store given: pass --store or set GRASP_STORE");
  return path;
}

std::vector<fs::path> spec_files_in(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<grasp::DatasetProfile> resolve_profiles(const std::vector<std::string>& names) {
  if (names.empty()) return grasp::builtin_profiles();
  std::vector<grasp::DatasetProfile> out;
  for (const std::string& n : names) out.push_back(grasp::profile_by_name(n));
  return out;
}

// --- sample -------------------------------------------------------------------

struct SampleArgs {
  int count = 10;
  std::uint64_t seed = 0;
  double edge_prob = 0.5;
  std::string out;
};

int run_sample(const SampleArgs& a) {
  log_config("sample", Json{{"count", a.count},
                            {"seed", a.seed},
                            {"edge_prob", a.edge_prob},
                            {"out", a.out}});
  fs::create_directories(a.out);
  auto specs = grasp::sample_unique(a.count, a.seed, a.edge_prob);
  for (const grasp::ArchSpec& spec : specs) {
    grasp::HashId hash = grasp::canonical_hash(spec);
    grasp::write_json_file(fs::path(a.out) / (hash + ".json"), grasp::spec_to_json(spec));
  }
  std::cout << Json{{"sampled", specs.size()}, {"dir", a.out}}.dump() << "\n";
  return 0;
}

// --- shapes -------------------------------------------------------------------

struct ShapesArgs {
  std::string arch;
  std::string input = "3,32,32";
  std::string out;
};

int run_shapes(const ShapesArgs& a) {
  log_config("shapes", Json{{"arch", a.arch}, {"input", a.input}, {"out", a.out}});
  grasp::ArchSpec spec = grasp::spec_from_json(grasp::read_json_file(a.arch));
  grasp::TensorShape input = parse_shape(a.input);
  grasp::VertexShapes vs = grasp::infer_shapes(spec, input);
  Json nodes = Json::array();
  for (int v = 0; v < spec.n; ++v) {
    const grasp::TensorShape& s = vs.shapes[static_cast<std::size_t>(v)];
    nodes.push_back(Json{{"node", v},
                         {"type", grasp::to_string(spec.layer_types[static_cast<std::size_t>(v)])},
                         {"shape", Json::array({s.c, s.h, s.w})}});
  }
  Json result{{"hash", grasp::canonical_hash(spec)},
              {"input", Json::array({input.c, input.h, input.w})},
              {"nodes", std::move(nodes)}};
  if (a.out.empty())
    std::cout << result.dump(2) << "\n";
  else
    grasp::write_json_file(a.out, result);
  return 0;
}

// --- store --------------------------------------------------------------------

struct StoreAddArgs {
  std::string store;
  std::vector<std::string> archs;
  std::string from;
  bool synthetic = false;
  std::vector<std::string> profiles;
};

int run_store_init(const std::string& store) {
  log_config("store init", Json{{"store", store}});
  grasp::BenchStore::create(require_store(store));
  std::cout << Json{{"store", store}, {"created", true}}.dump() << "\n";
  return 0;
}

int run_store_add(const StoreAddArgs& a) {
  log_config("store add", Json{{"store", a.store},
                               {"archs", a.archs},
                               {"from", a.from},
                               {"synthetic", a.synthetic},
                               {"profiles", a.profiles}});
  grasp::BenchStore store = grasp::BenchStore::open(require_store(a.store));
  std::vector<fs::path> files;
  for (const std::string& f : a.archs) files.emplace_back(f);
  if (!a.from.empty())
    for (fs::path& p : spec_files_in(a.from)) files.push_back(std::move(p));
  if (files.empty()) throw grasp::InvalidArgumentError("store add needs --arch or --from");

  const auto profiles = resolve_profiles(a.profiles);
  int added = 0;
  for (const fs::path& file : files) {
    grasp::ArchSpec spec = grasp::spec_from_json(grasp::read_json_file(file));
    grasp::BenchRecord record;
    if (a.synthetic) {
      record = grasp::make_synthetic_record(spec, profiles);
    } else {
      record.spec = spec;
      record.hash = grasp::canonical_hash(spec);
    }
    store.put(record);
    ++added;
  }
  std::cout << Json{{"added", added}, {"synthetic", a.synthetic}}.dump() << "\n";
  return 0;
}

int run_store_ingest(const std::string& store_dir, const std::string& from,
                     const std::string& dataset) {
  log_config("store ingest", Json{{"store", store_dir}, {"from", from}, {"dataset", dataset}});
  grasp::BenchStore store = grasp::BenchStore::open(require_store(store_dir));
  grasp::IngestReport report = store.ingest(from, dataset);
  Json failures = Json::array();
  for (const auto& [file, reason] : report.failures)
    failures.push_back(Json{{"file", file}, {"reason", reason}});
  std::cout << Json{{"merged", report.merged},
                    {"skipped", report.skipped},
                    {"failures", std::move(failures)}}
                   .dump(2)
            << "\n";
  return report.failures.empty() ? 0 : 1;
}

int run_store_stats(const std::string& store_dir) {
  log_config("store stats", Json{{"store", store_dir}});
  grasp::BenchStore store = grasp::BenchStore::open(require_store(store_dir));
  grasp::StoreStats stats = store.stats();
  Json datasets = Json::object();
  for (const auto& [name, ds] : stats.datasets)
    datasets[name] = Json{{"records", ds.records},
                          {"min_epoch", ds.min_epoch},
                          {"max_epoch", ds.max_epoch}};
  std::cout << Json{{"records", stats.records}, {"datasets", std::move(datasets)}}.dump(2)
            << "\n";
  return 0;
}

// --- train / eval ---------------------------------------------------------------

struct TrainArgs {
  std::string store;
  std::string dataset = "cifar10";
  int label_epoch = 40;
  int n_archs = 0;  // 0 = all
  std::uint64_t seed = 0;
  int epochs = 40;
  std::string pair_mode = "deduped";
  int max_pairs = 0;
  int max_pairs_per_epoch = 0;
  int units = 265;
  int batch = 128;
  double lr = 0.019041;
  double weight_decay = 0.001126;
  bool no_shapes = false;
  bool dense_skip = false;
  bool plain_head = false;
  int jobs = 0;
  std::string out = "model.bin";
};

int run_train(const TrainArgs& a) {
  log_config("train", Json{{"store", a.store},
                           {"dataset", a.dataset},
                           {"label_epoch", a.label_epoch},
                           {"n_archs", a.n_archs},
                           {"seed", a.seed},
                           {"epochs", a.epochs},
                           {"pair_mode", a.pair_mode},
                           {"max_pairs", a.max_pairs},
                           {"max_pairs_per_epoch", a.max_pairs_per_epoch},
                           {"units", a.units},
                           {"batch", a.batch},
                           {"lr", a.lr},
                           {"weight_decay", a.weight_decay},
                           {"use_vertex_shapes", !a.no_shapes},
                           {"dense_skip", a.dense_skip},
                           {"antisymmetric_head", !a.plain_head},
                           {"jobs", a.jobs},
                           {"out", a.out}});
  grasp::BenchStore store = grasp::BenchStore::open(require_store(a.store));
  const grasp::DatasetProfile& profile = grasp::profile_by_name(a.dataset);

  int n_archs = a.n_archs;
  if (n_archs == 0) n_archs = static_cast<int>(store.list().size());
  grasp::LabeledSet set = grasp::labeled_set(store, a.dataset, a.label_epoch, n_archs, a.seed);

  grasp::PairMode mode;
  if (a.pair_mode == "deduped")
    mode = grasp::PairMode::kDeduped;
  else if (a.pair_mode == "ordered")
    mode = grasp::PairMode::kOrdered;
  else
    throw grasp::InvalidArgumentError("--pair-mode must be deduped or ordered");
  std::vector<grasp::PairSample> pairs =
      grasp::make_rank_pairs(set.accs, mode, a.seed, a.max_pairs);
  if (pairs.empty()) throw grasp::InvalidArgumentError("no trainable pairs (all accuracies tied?)");

  std::vector<grasp::VertexShapes> shapes;
  shapes.reserve(set.specs.size());
  for (const grasp::ArchSpec& s : set.specs)
    shapes.push_back(grasp::infer_shapes(s, profile.input_shape));
  grasp::ShapeNormalizer norm = grasp::ShapeNormalizer::covering(shapes);

  grasp::TrainOptions opts;
  opts.epochs = a.epochs;
  opts.seed = a.seed;
  opts.max_pairs_per_epoch = a.max_pairs_per_epoch;
  opts.jobs = a.jobs;
  opts.hyper.units = a.units;
  opts.hyper.batch_size = a.batch;
  opts.hyper.lr = a.lr;
  opts.hyper.weight_decay = a.weight_decay;
  opts.hyper.use_vertex_shapes = !a.no_shapes;
  opts.hyper.dense_skip = a.dense_skip;
  opts.hyper.antisymmetric_head = !a.plain_head;

  std::vector<grasp::EncodedGraph> graphs;
  graphs.reserve(set.specs.size());
  for (std::size_t i = 0; i < set.specs.size(); ++i)
    graphs.push_back(grasp::encode(set.specs[i], grasp::normalize_shapes(shapes[i], norm),
                                   opts.hyper.use_vertex_shapes));

  grasp::PredictorModel model = grasp::train_pairs(graphs, pairs, opts);
  model.meta.label_epoch = a.label_epoch;
  model.meta.dataset = a.dataset;
  model.meta.normalizer = norm;
  grasp::save_model(a.out, model);

  grasp::Mat embeddings = grasp::embed_all(graphs, model, a.jobs);
  grasp::Vec utilities = grasp::utility_scores(embeddings, model);
  std::cout << Json{{"model", a.out},
                    {"n_specs", set.specs.size()},
                    {"n_pairs", pairs.size()},
                    {"train_pairwise_accuracy", grasp::pairwise_accuracy(utilities, pairs)}}
                   .dump(2)
            << "\n";
  return 0;
}

struct EvalArgs {
  std::string model = "model.bin";
  std::string store;
  std::string dataset;
  int epoch = 0;    // 0 = the model's label epoch
  int n_archs = 0;  // 0 = all
  std::uint64_t seed = 0;
  int jobs = 0;
};

int run_eval(const EvalArgs& a) {
  log_config("eval", Json{{"model", a.model},
                          {"store", a.store},
                          {"dataset", a.dataset},
                          {"epoch", a.epoch},
                          {"n_archs", a.n_archs},
                          {"seed", a.seed},
                          {"jobs", a.jobs}});
  grasp::PredictorModel model = grasp::load_model(a.model);
  grasp::BenchStore store = grasp::BenchStore::open(require_store(a.store));
  const std::string dataset = a.dataset.empty() ? model.meta.dataset : a.dataset;
  const grasp::DatasetProfile& profile = grasp::profile_by_name(dataset);
  grasp::TransferReport report =
      grasp::transfer_predictor(model, profile, store, a.epoch, a.n_archs, a.seed, a.jobs);
  std::cout << Json{{"dataset", dataset},
                    {"epoch", a.epoch > 0 ? a.epoch : model.meta.label_epoch},
                    {"n_specs", report.n_specs},
                    {"skipped", report.skipped},
                    {"pairwise_accuracy", report.pairwise_accuracy},
                    {"precision_at_10", report.precision_at_10}}
                   .dump(2)
            << "\n";
  return 0;
}

// --- search -------------------------------------------------------------------

struct SearchArgs {
  int pool = 1000;
  int iters = 5;
  int per_iter = 40;
  std::string profile = "cifar10";
  int label_epoch = 40;
  std::uint64_t seed = 0;
  double edge_prob = 0.5;
  int refit_epochs = 8;
  int refit_units = 48;
  int refit_max_pairs = 2500;
  bool warm_start = false;
  bool no_precision = false;
  int jobs = 0;
  std::string trace = "trace.csv";
  std::string out;
};

int run_search_cmd(const SearchArgs& a) {
  log_config("search", Json{{"pool", a.pool},
                            {"iters", a.iters},
                            {"per_iter", a.per_iter},
                            {"profile", a.profile},
                            {"label_epoch", a.label_epoch},
                            {"seed", a.seed},
                            {"edge_prob", a.edge_prob},
                            {"refit_epochs", a.refit_epochs},
                            {"refit_units", a.refit_units},
                            {"refit_max_pairs", a.refit_max_pairs},
                            {"warm_start", a.warm_start},
                            {"track_precision", !a.no_precision},
                            {"jobs", a.jobs},
                            {"trace", a.trace},
                            {"out", a.out}});
  const grasp::DatasetProfile& profile = grasp::profile_by_name(a.profile);
  grasp::SearchOptions opts;
  opts.space_size = a.pool;
  opts.iterations = a.iters;
  opts.per_iter = a.per_iter;
  opts.seed = a.seed;
  opts.label_epoch = a.label_epoch;
  opts.edge_prob = a.edge_prob;
  opts.jobs = a.jobs;
  opts.track_precision = !a.no_precision;
  opts.refit.epochs = a.refit_epochs;
  opts.refit.max_pairs_per_epoch = a.refit_max_pairs;
  opts.refit.warm_start = a.warm_start;
  opts.refit.hyper.units = a.refit_units;

  grasp::SearchResult result = grasp::run_search(profile, opts);

  std::ostringstream csv;
  csv << "iteration,evaluated_count,best_acc,precision_at_10\n";
  for (const grasp::TraceRow& row : result.trace) {
    csv << row.iteration << "," << row.evaluated_count << ",";
    csv.precision(17);
    csv << row.best_acc << "," << row.precision_at_10 << "\n";
  }
  grasp::atomic_write_file(a.trace, csv.str());
  if (!a.out.empty()) grasp::write_json_file(a.out, grasp::spec_to_json(result.best));

  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << Json{{"best_hash", result.best_hash},
                    {"best_acc", result.best_acc},
                    {"iterations", result.trace.size()},
                    {"trace", a.trace}}
                   .dump(2)
            << "\n";
  return 0;
}

// --- analyze ------------------------------------------------------------------

struct AnalyzeArgs {
  std::string store;
  std::string dataset = "cifar10";
  int k = 10;
  std::string out = "curves.csv";
  std::vector<std::string> cross;
  std::string cross_out = "cross.json";
};

// Per-epoch rankings of every record in the store by accuracy on `dataset`.
std::vector<grasp::RankedList> epoch_rankings(const grasp::BenchStore& store,
                                              const std::string& dataset,
                                              std::vector<int>* epochs_out) {
  std::map<int, std::vector<grasp::RankedItem>> by_epoch;
  std::size_t n_records = 0;
  for (const grasp::HashId& hash : store.list()) {
    grasp::BenchRecord r = store.get(hash);
    auto it = r.datasets.find(dataset);
    if (it == r.datasets.end()) continue;
    ++n_records;
    for (const grasp::EpochAcc& e : it->second.epochs)
      by_epoch[e.epoch].push_back({hash, e.val_acc});
  }
  if (by_epoch.empty())
    throw grasp::NotFoundError("store has no logs for dataset " + dataset);
  std::vector<grasp::RankedList> lists;
  for (auto& [epoch, items] : by_epoch) {
    if (items.size() != n_records) continue;  // keep epochs common to all records
    if (epochs_out) epochs_out->push_back(epoch);
    lists.push_back(grasp::RankedList::from_scores(items));
  }
  if (lists.size() < 2)
    throw grasp::InvalidArgumentError("need at least two epochs common to every record");
  return lists;
}

int run_analyze(const AnalyzeArgs& a) {
  if (!a.cross.empty()) {
    log_config("analyze", Json{{"cross", a.cross}, {"out", a.cross_out}, {"k", a.k}});
    grasp::BenchStore store_a = grasp::BenchStore::open(a.cross[0]);
    grasp::BenchStore store_b = grasp::BenchStore::open(a.cross[1]);

    // Final-epoch ranking per dataset, restricted to the shared hash set.
    std::vector<grasp::HashId> hashes_a = store_a.list();
    std::vector<grasp::HashId> hashes_b = store_b.list();
    std::vector<grasp::HashId> shared;
    std::set_intersection(hashes_a.begin(), hashes_a.end(), hashes_b.begin(), hashes_b.end(),
                          std::back_inserter(shared));
    if (shared.empty())
      throw grasp::InvalidArgumentError("the two stores share no architectures");

    auto final_rankings = [&shared](const grasp::BenchStore& store) {
      std::map<std::string, std::vector<grasp::RankedItem>> per_dataset;
      for (const grasp::HashId& hash : shared) {
        grasp::BenchRecord r = store.get(hash);
        for (const auto& [name, log] : r.datasets)
          if (!log.epochs.empty())
            per_dataset[name].push_back({hash, log.epochs.back().val_acc});
      }
      std::map<std::string, grasp::RankedList> out;
      for (auto& [name, items] : per_dataset) {
        if (items.size() != shared.size()) continue;
        out.emplace(name, grasp::RankedList::from_scores(items));
      }
      return out;
    };
    auto rank_a = final_rankings(store_a);
    auto rank_b = final_rankings(store_b);
    if (rank_a.empty() || rank_b.empty())
      throw grasp::InvalidArgumentError("no dataset covers every shared architecture");

    Json matrix = Json::object();
    for (const auto& [da, la] : rank_a) {
      Json row = Json::object();
      for (const auto& [db, lb] : rank_b)
        row[db] = 1.0 - grasp::ndcg_at_k(lb, la, static_cast<int>(shared.size()));
      matrix[da] = std::move(row);
    }
    Json result{{"shared_records", shared.size()},
                {"truth", "rows"},
                {"one_minus_ndcg", std::move(matrix)}};
    grasp::write_json_file(a.cross_out, result);
    std::cout << result.dump(2) << "\n";
    return 0;
  }

  log_config("analyze",
             Json{{"store", a.store}, {"dataset", a.dataset}, {"k", a.k}, {"out", a.out}});
  std::vector<int> epochs;
  std::vector<grasp::RankedList> lists = epoch_rankings(grasp::BenchStore::open(require_store(a.store)),
                                                        a.dataset, &epochs);
  std::vector<double> at_k = grasp::ndcg_vs_final_curve(lists, a.k);
  std::vector<double> full = grasp::ndcg_vs_final_curve(lists, 0);

  std::ostringstream csv;
  csv << "epoch,one_minus_ndcg_at_" << a.k << ",one_minus_ndcg_full\n";
  csv.precision(17);
  for (std::size_t i = 0; i < lists.size(); ++i)
    csv << epochs[i] << "," << at_k[i] << "," << full[i] << "\n";
  grasp::atomic_write_file(a.out, csv.str());
  std::cout << Json{{"epochs", lists.size()}, {"out", a.out}}.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Architecture sampling, ranking predictor, and search pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from a TOML/INI config file");
  app.add_flag("--quiet", g_quiet, "Suppress the resolved-config log line");

  SampleArgs sample;
  CLI::App* c_sample = app.add_subcommand("sample", "Sample unique architectures to JSON files");
  c_sample->add_option("--count", sample.count, "How many unique architectures")->required();
  c_sample->add_option("--seed", sample.seed, "Sampling seed");
  c_sample->add_option("--edge-prob", sample.edge_prob, "Bernoulli edge probability")
      ->check(CLI::Range(0.0, 1.0));
  c_sample->add_option("--out", sample.out, "Output directory")->required();

  ShapesArgs shapes;
  CLI::App* c_shapes = app.add_subcommand("shapes", "Infer per-node tensor shapes for a spec");
  c_shapes->add_option("--arch", shapes.arch, "Architecture JSON file")->required();
  c_shapes->add_option("--input", shapes.input, "Input shape C,H,W");
  c_shapes->add_option("--out", shapes.out, "Write JSON here instead of stdout");

  CLI::App* c_store = app.add_subcommand("store", "Benchmark store maintenance");
  c_store->require_subcommand(1);
  std::string store_dir = default_store();

  CLI::App* c_init = c_store->add_subcommand("init", "Create an empty store");
  c_init->add_option("--store", store_dir, "Store directory (default $GRASP_STORE)");

  StoreAddArgs add;
  add.store = default_store();
  CLI::App* c_add = c_store->add_subcommand("add", "Add architectures as records");
  c_add->add_option("--store", add.store, "Store directory (default $GRASP_STORE)");
  c_add->add_option("--arch", add.archs, "Architecture JSON file(s)");
  c_add->add_option("--from", add.from, "Directory of architecture JSON files");
  c_add->add_flag("--synthetic", add.synthetic,
                  "Label each record with the synthetic oracle at every epoch");
  c_add->add_option("--profiles", add.profiles,
                    "Profiles to label (default: all built-ins)");

  std::string ingest_from, ingest_dataset;
  CLI::App* c_ingest = c_store->add_subcommand("ingest", "Merge external JSON training logs");
  std::string ingest_store = default_store();
  c_ingest->add_option("--store", ingest_store, "Store directory (default $GRASP_STORE)");
  c_ingest->add_option("--from", ingest_from, "Directory of log JSON files")->required();
  c_ingest->add_option("--dataset", ingest_dataset, "Only merge logs for this dataset");

  std::string stats_store = default_store();
  CLI::App* c_stats = c_store->add_subcommand("stats", "Summarize a store");
  c_stats->add_option("--store", stats_store, "Store directory (default $GRASP_STORE)");

  TrainArgs train;
  train.store = default_store();
  CLI::App* c_train = app.add_subcommand("train", "Train the ranking predictor on store labels");
  c_train->add_option("--store", train.store, "Store directory (default $GRASP_STORE)");
  c_train->add_option("--dataset", train.dataset, "Dataset name for labels");
  c_train->add_option("--label-epoch", train.label_epoch, "Epoch whose accuracies label pairs");
  c_train->add_option("--n-archs", train.n_archs, "Records to use (0 = all)");
  c_train->add_option("--seed", train.seed, "Training seed");
  c_train->add_option("--epochs", train.epochs, "Predictor training epochs");
  c_train->add_option("--pair-mode", train.pair_mode, "deduped or ordered");
  c_train->add_option("--max-pairs", train.max_pairs, "Cap on training pairs (0 = all)");
  c_train->add_option("--max-pairs-per-epoch", train.max_pairs_per_epoch,
                      "Pairs visited per epoch (0 = all)");
  c_train->add_option("--units", train.units, "Hidden units per layer");
  c_train->add_option("--batch", train.batch, "Minibatch size");
  c_train->add_option("--lr", train.lr, "Adagrad learning rate");
  c_train->add_option("--weight-decay", train.weight_decay, "L2 penalty");
  c_train->add_flag("--no-shapes", train.no_shapes, "Drop vertex shape features");
  c_train->add_flag("--dense-skip", train.dense_skip, "Concatenate all three layer poolings");
  c_train->add_flag("--plain-head", train.plain_head, "Two-logit head without weight sharing");
  c_train->add_option("--jobs", train.jobs, "Worker threads (0 = hardware)");
  c_train->add_option("--out", train.out, "Checkpoint path");

  EvalArgs eval;
  eval.store = default_store();
  CLI::App* c_eval = app.add_subcommand("eval", "Evaluate a frozen model on store ground truth");
  c_eval->add_option("--model", eval.model, "Checkpoint path");
  c_eval->add_option("--store", eval.store, "Store directory (default $GRASP_STORE)");
  c_eval->add_option("--dataset", eval.dataset, "Dataset (default: the model's)");
  c_eval->add_option("--epoch", eval.epoch, "Evaluation epoch (0 = model's label epoch)");
  c_eval->add_option("--n-archs", eval.n_archs, "Records to evaluate (0 = all)");
  c_eval->add_option("--seed", eval.seed, "Subsampling seed");
  c_eval->add_option("--jobs", eval.jobs, "Worker threads (0 = hardware)");

  SearchArgs search;
  CLI::App* c_search = app.add_subcommand("search", "Predictor-guided architecture search");
  c_search->add_option("--pool", search.pool, "Pool size to sample");
  c_search->add_option("--iters", search.iters, "Search iterations");
  c_search->add_option("--per-iter", search.per_iter, "Evaluations per iteration");
  c_search->add_option("--profile", search.profile, "Dataset profile");
  c_search->add_option("--label-epoch", search.label_epoch, "Oracle evaluation epoch");
  c_search->add_option("--seed", search.seed, "Search seed");
  c_search->add_option("--edge-prob", search.edge_prob, "Pool sampling edge probability");
  c_search->add_option("--refit-epochs", search.refit_epochs, "Refit epochs per iteration");
  c_search->add_option("--refit-units", search.refit_units, "Refit hidden units");
  c_search->add_option("--refit-max-pairs", search.refit_max_pairs,
                       "Refit pairs per epoch (0 = all)");
  c_search->add_flag("--warm-start", search.warm_start, "Continue the model across iterations");
  c_search->add_flag("--no-precision", search.no_precision,
                     "Skip ground-truth Precision@10 tracking");
  c_search->add_option("--jobs", search.jobs, "Worker threads (0 = hardware)");
  c_search->add_option("--trace", search.trace, "Trace CSV path");
  c_search->add_option("--out", search.out, "Write the best architecture JSON here");

  AnalyzeArgs analyze;
  analyze.store = default_store();
  CLI::App* c_analyze = app.add_subcommand("analyze", "Ranking stability reports from a store");
  c_analyze->add_option("--store", analyze.store, "Store directory (default $GRASP_STORE)");
  c_analyze->add_option("--dataset", analyze.dataset, "Dataset to analyze");
  c_analyze->add_option("--k", analyze.k, "Cutoff for the NDCG@k column")->check(CLI::PositiveNumber);
  c_analyze->add_option("--out", analyze.out, "Curve CSV path");
  c_analyze->add_option("--cross", analyze.cross, "Two stores: cross-dataset 1-NDCG matrix")
      ->expected(2);
  c_analyze->add_option("--cross-out", analyze.cross_out, "Matrix JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_sample->parsed()) return run_sample(sample);
    if (c_shapes->parsed()) return run_shapes(shapes);
    if (c_store->parsed()) {
      if (c_init->parsed()) return run_store_init(store_dir);
      if (c_add->parsed()) return run_store_add(add);
      if (c_ingest->parsed()) return run_store_ingest(ingest_store, ingest_from, ingest_dataset);
      if (c_stats->parsed()) return run_store_stats(stats_store);
    }
    if (c_train->parsed()) return run_train(train);
    if (c_eval->parsed()) return run_eval(eval);
    if (c_search->parsed()) return run_search_cmd(search);
    if (c_analyze->parsed()) return run_analyze(analyze);
  } catch (const grasp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
