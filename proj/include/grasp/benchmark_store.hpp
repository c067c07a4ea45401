#pragma once

// Directory-per-architecture persistence of per-epoch accuracies, keyed by
// canonical hash. Layout:
//
//   <store>/store.json                      manifest
//   <store>/<hash>/arch.json                ArchSpec JSON
//   <store>/<hash>/log_<dataset>.json       {dataset, input_shape,
//                                            num_classes, epochs: [{epoch,
//                                            val_acc}], meta}
//
// Writes are serialized per hash directory through an advisory lock file;
// reads need no coordination.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "grasp/errors.hpp"
#include "grasp/json_io.hpp"
#include "grasp/predictor.hpp"
#include "grasp/rng.hpp"
#include "grasp/search_space.hpp"
#include "grasp/shape_inference.hpp"
#include "grasp/synthetic_oracle.hpp"

namespace grasp {

struct EpochAcc {
  int epoch = 0;
  double val_acc = 0.0;
  friend bool operator==(const EpochAcc&, const EpochAcc&) = default;
};

struct DatasetLog {
  TensorShape input_shape{3, 32, 32};
  int num_classes = 10;
  std::vector<EpochAcc> epochs;  // strictly increasing epoch numbers
  std::map<std::string, std::string> meta;

  friend bool operator==(const DatasetLog&, const DatasetLog&) = default;

  void validate() const {
    input_shape.validate();
    if (num_classes < 2) throw InvalidArgumentError("log needs at least 2 classes");
    for (std::size_t i = 0; i < epochs.size(); ++i) {
      if (epochs[i].epoch < 1) throw InvalidArgumentError("epoch numbers start at 1");
      if (i > 0 && epochs[i].epoch <= epochs[i - 1].epoch)
        throw InvalidArgumentError("epochs must be strictly increasing");
      if (epochs[i].val_acc < 0.0 || epochs[i].val_acc > 1.0)
        throw InvalidArgumentError("accuracy outside [0,1] at epoch " +
                                   std::to_string(epochs[i].epoch));
    }
  }

  std::optional<double> acc_at(int epoch) const {
    for (const EpochAcc& e : epochs)
      if (e.epoch == epoch) return e.val_acc;
    return std::nullopt;
  }
};

struct BenchRecord {
  HashId hash;
  ArchSpec spec;
  std::map<std::string, DatasetLog> datasets;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;

  void validate() const {
    spec.validate();
    if (hash != canonical_hash(spec))
      throw IntegrityError("record hash does not match its architecture");
    for (const auto& [name, log] : datasets) {
      if (name.empty()) throw InvalidArgumentError("empty dataset name");
      log.validate();
    }
  }
};

inline Json log_to_json(const std::string& dataset, const DatasetLog& log) {
  Json epochs = Json::array();
  for (const EpochAcc& e : log.epochs)
    epochs.push_back(Json{{"epoch", e.epoch}, {"val_acc", e.val_acc}});
  return Json{{"dataset", dataset},
              {"input_shape", Json::array({log.input_shape.c, log.input_shape.h,
                                           log.input_shape.w})},
              {"num_classes", log.num_classes},
              {"epochs", std::move(epochs)},
              {"meta", log.meta}};
}

inline std::pair<std::string, DatasetLog> log_from_json(const Json& j) {
  try {
    DatasetLog log;
    std::string dataset = j.at("dataset").get<std::string>();
    const Json& shape = j.at("input_shape");
    if (!shape.is_array() || shape.size() != 3)
      throw InvalidArgumentError("input_shape must be [c, h, w]");
    log.input_shape = TensorShape{shape[0].get<int>(), shape[1].get<int>(), shape[2].get<int>()};
    log.num_classes = j.at("num_classes").get<int>();
    for (const Json& e : j.at("epochs"))
      log.epochs.push_back({e.at("epoch").get<int>(), e.at("val_acc").get<double>()});
    if (j.contains("meta"))
      log.meta = j.at("meta").get<std::map<std::string, std::string>>();
    log.validate();
    return {std::move(dataset), std::move(log)};
  } catch (const Json::exception& e) {
    throw InvalidArgumentError(std::string("malformed dataset log: ") + e.what());
  }
}

namespace detail {

// Advisory lock: exclusive-create of a lock file inside the hash directory.
class ScopedDirLock {
 public:
  explicit ScopedDirLock(const std::filesystem::path& dir) : path_(dir / ".lock") {
    for (int attempt = 0; attempt < 5000; ++attempt) {
      std::FILE* f = std::fopen(path_.string().c_str(), "wx");
      if (f) {
        std::fclose(f);
        held_ = true;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    throw IoError("could not acquire lock " + path_.string());
  }
  ~ScopedDirLock() {
    if (held_) {
      std::error_code ec;
      std::filesystem::remove(path_, ec);
    }
  }
  ScopedDirLock(const ScopedDirLock&) = delete;
  ScopedDirLock& operator=(const ScopedDirLock&) = delete;

 private:
  std::filesystem::path path_;
  bool held_ = false;
};

inline bool is_hash_name(const std::string& name) {
  if (name.size() != 64) return false;
  for (char c : name)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

}  // namespace detail

struct DatasetStats {
  int records = 0;
  int min_epoch = 0;
  int max_epoch = 0;
};

struct StoreStats {
  int records = 0;
  std::map<std::string, DatasetStats> datasets;
};

struct IngestReport {
  int merged = 0;
  int skipped = 0;  // filtered out by dataset name
  std::vector<std::pair<std::string, std::string>> failures;  // (file, reason)
};

class BenchStore {
 public:
  static BenchStore create(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    atomic_write_file(dir / "store.json", Json{{"format", "grasp-bench"}, {"version", 1}}.dump(2) + "\n");
    return BenchStore(dir);
  }

  static BenchStore open(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir / "store.json"))
      throw NotFoundError("no store at " + dir.string());
    return BenchStore(dir);
  }

  const std::filesystem::path& dir() const { return dir_; }

  bool contains(const HashId& hash) const {
    return std::filesystem::exists(dir_ / hash / "arch.json");
  }

  // Merge-write. New epochs extend existing logs; a re-write of an existing
  // (dataset, epoch) must carry the identical accuracy.
  void put(const BenchRecord& record) const {
    record.validate();
    const std::filesystem::path rdir = dir_ / record.hash;
    std::filesystem::create_directories(rdir);
    detail::ScopedDirLock lock(rdir);

    BenchRecord merged = record;
    if (std::filesystem::exists(rdir / "arch.json")) {
      BenchRecord existing = read_record(record.hash);
      if (canonical_hash(existing.spec) != record.hash)
        throw IntegrityError("existing record at " + record.hash + " holds a different spec");
      merged = merge_into(std::move(existing), record);
    }
    atomic_write_file(rdir / "arch.json", spec_to_json(merged.spec).dump(2) + "\n");
    for (const auto& [name, log] : merged.datasets)
      atomic_write_file(rdir / ("log_" + name + ".json"), log_to_json(name, log).dump(2) + "\n");
  }

  BenchRecord get(const HashId& hash) const {
    if (!contains(hash)) throw NotFoundError("no record for hash " + hash);
    BenchRecord r = read_record(hash);
    r.validate();
    if (r.hash != hash) throw IntegrityError("record " + hash + " stores a mismatched spec");
    return r;
  }

  std::vector<HashId> list() const {
    std::vector<HashId> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
      if (!entry.is_directory()) continue;
      std::string name = entry.path().filename().string();
      if (detail::is_hash_name(name)) out.push_back(std::move(name));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  StoreStats stats() const {
    StoreStats s;
    for (const HashId& hash : list()) {
      BenchRecord r = get(hash);
      ++s.records;
      for (const auto& [name, log] : r.datasets) {
        if (log.epochs.empty()) continue;
        DatasetStats& ds = s.datasets[name];
        const int lo = log.epochs.front().epoch;
        const int hi = log.epochs.back().epoch;
        if (ds.records == 0) {
          ds.min_epoch = lo;
          ds.max_epoch = hi;
        } else {
          ds.min_epoch = std::min(ds.min_epoch, lo);
          ds.max_epoch = std::max(ds.max_epoch, hi);
        }
        ++ds.records;
      }
    }
    return s;
  }

  // Merges external JSON logs. Each file holds one dataset log plus either
  // the hash of an already stored architecture or the architecture itself.
  // Malformed files are reported and skipped; a conflicting accuracy for an
  // already recorded (hash, dataset, epoch) aborts with an integrity error.
  IngestReport ingest(const std::filesystem::path& src,
                      const std::string& dataset_filter = "") const {
    if (!std::filesystem::is_directory(src))
      throw NotFoundError("ingest source is not a directory: " + src.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(src))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    IngestReport report;
    for (const std::filesystem::path& file : files) {
      try {
        Json j = read_json_file(file);
        auto [dataset, log] = log_from_json(j);
        if (!dataset_filter.empty() && dataset != dataset_filter) {
          ++report.skipped;
          continue;
        }
        BenchRecord record;
        if (j.contains("arch")) {
          record.spec = spec_from_json(j.at("arch"));
          record.hash = canonical_hash(record.spec);
          if (j.contains("hash") && j.at("hash").get<std::string>() != record.hash)
            throw IntegrityError("embedded hash does not match the embedded architecture");
        } else if (j.contains("hash")) {
          HashId hash = j.at("hash").get<std::string>();
          if (!contains(hash))
            throw NotFoundError("log references unknown hash " + hash +
                                " and embeds no architecture");
          record = get(hash);
          record.datasets.clear();
        } else {
          throw InvalidArgumentError("log carries neither \"hash\" nor \"arch\"");
        }
        record.datasets.emplace(dataset, std::move(log));
        put(record);
        ++report.merged;
      } catch (const IntegrityError&) {
        throw;
      } catch (const std::exception& e) {
        report.failures.emplace_back(file.filename().string(), e.what());
      }
    }
    return report;
  }

 private:
  explicit BenchStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  BenchRecord read_record(const HashId& hash) const {
    const std::filesystem::path rdir = dir_ / hash;
    BenchRecord r;
    r.spec = spec_from_json(read_json_file(rdir / "arch.json"));
    r.hash = canonical_hash(r.spec);
    for (const auto& entry : std::filesystem::directory_iterator(rdir)) {
      if (!entry.is_regular_file()) continue;
      std::string name = entry.path().filename().string();
      if (name.rfind("log_", 0) != 0 || entry.path().extension() != ".json") continue;
      auto [dataset, log] = log_from_json(read_json_file(entry.path()));
      r.datasets.emplace(std::move(dataset), std::move(log));
    }
    return r;
  }

  BenchRecord merge_into(BenchRecord base, const BenchRecord& incoming) const {
    for (const auto& [name, log] : incoming.datasets) {
      auto it = base.datasets.find(name);
      if (it == base.datasets.end()) {
        base.datasets.emplace(name, log);
        continue;
      }
      DatasetLog& dst = it->second;
      if (!(dst.input_shape == log.input_shape) || dst.num_classes != log.num_classes)
        throw IntegrityError("dataset " + name + " metadata conflict for " + base.hash);
      for (const EpochAcc& e : log.epochs) {
        std::optional<double> existing = dst.acc_at(e.epoch);
        if (existing.has_value()) {
          if (*existing != e.val_acc)
            throw IntegrityError("conflicting accuracy for (" + base.hash + ", " + name +
                                 ", epoch " + std::to_string(e.epoch) + ")");
          continue;
        }
        dst.epochs.push_back(e);
      }
      std::sort(dst.epochs.begin(), dst.epochs.end(),
                [](const EpochAcc& a, const EpochAcc& b) { return a.epoch < b.epoch; });
      for (const auto& [k, v] : log.meta) dst.meta[k] = v;
    }
    return base;
  }

  std::filesystem::path dir_;
};

// Record with synthetic-oracle accuracies for every profile at every epoch of
// that profile's schedule.
inline BenchRecord make_synthetic_record(const ArchSpec& spec,
                                         const std::vector<DatasetProfile>& profiles,
                                         const OracleParams& params = {}) {
  BenchRecord r;
  r.spec = spec;
  r.hash = canonical_hash(spec);
  for (const DatasetProfile& p : profiles) {
    DatasetLog log;
    log.input_shape = p.input_shape;
    log.num_classes = p.num_classes;
    log.epochs.reserve(static_cast<std::size_t>(p.total_epochs));
    for (int e = 1; e <= p.total_epochs; ++e)
      log.epochs.push_back({e, synthetic_accuracy(spec, p, e, p.total_epochs, params)});
    r.datasets.emplace(p.name, std::move(log));
  }
  return r;
}

// --- pair construction --------------------------------------------------------

enum class PairMode {
  kDeduped,  // each unordered pair once
  kOrdered,  // both (i, j) and (j, i)
};

// Index pairs over a label vector; ties dropped. With max_pairs > 0 a seeded
// shuffle picks the subsample, otherwise enumeration order is kept.
inline std::vector<PairSample> make_rank_pairs(const std::vector<double>& accs, PairMode mode,
                                               std::uint64_t seed = 0, int max_pairs = 0) {
  const int n = static_cast<int>(accs.size());
  std::vector<PairSample> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (accs[static_cast<std::size_t>(i)] == accs[static_cast<std::size_t>(j)]) continue;
      const bool first_wins = accs[static_cast<std::size_t>(i)] > accs[static_cast<std::size_t>(j)];
      out.push_back({i, j, first_wins});
      if (mode == PairMode::kOrdered) out.push_back({j, i, !first_wins});
    }
  if (max_pairs > 0 && static_cast<std::size_t>(max_pairs) < out.size()) {
    Rng rng(derive_seed(seed, "pair-subsample"));
    rng.shuffle(out);
    out.resize(static_cast<std::size_t>(max_pairs));
  }
  return out;
}

struct LabeledSet {
  std::vector<ArchSpec> specs;
  std::vector<HashId> hashes;
  std::vector<double> accs;
};

// Pulls n_archs records (seeded subsample of the sorted hash list) and their
// accuracy at (dataset, epoch). Every selected record must carry that epoch.
inline LabeledSet labeled_set(const BenchStore& store, const std::string& dataset, int epoch,
                              int n_archs, std::uint64_t seed) {
  std::vector<HashId> hashes = store.list();
  if (n_archs <= 0 || static_cast<std::size_t>(n_archs) > hashes.size())
    throw InvalidArgumentError("store holds " + std::to_string(hashes.size()) +
                               " records, requested " + std::to_string(n_archs));
  if (static_cast<std::size_t>(n_archs) < hashes.size()) {
    Rng rng(derive_seed(seed, "label-archs"));
    rng.shuffle(hashes);
    hashes.resize(static_cast<std::size_t>(n_archs));
    std::sort(hashes.begin(), hashes.end());
  }

  LabeledSet set;
  std::string missing;
  for (const HashId& hash : hashes) {
    BenchRecord r = store.get(hash);
    auto it = r.datasets.find(dataset);
    std::optional<double> acc =
        it == r.datasets.end() ? std::nullopt : it->second.acc_at(epoch);
    if (!acc.has_value()) {
      missing += missing.empty() ? hash : (", " + hash);
      continue;
    }
    set.specs.push_back(std::move(r.spec));
    set.hashes.push_back(hash);
    set.accs.push_back(*acc);
  }
  if (!missing.empty())
    throw NotFoundError("records missing (" + dataset + ", epoch " + std::to_string(epoch) +
                        "): " + missing);
  return set;
}

// Spec-level training pairs as consumed by train().
inline std::vector<std::tuple<ArchSpec, ArchSpec, RankTarget>> label_pairs(
    const BenchStore& store, const std::string& dataset, int epoch, int n_archs,
    std::uint64_t seed, PairMode mode = PairMode::kDeduped, int max_pairs = 0) {
  LabeledSet set = labeled_set(store, dataset, epoch, n_archs, seed);
  std::vector<PairSample> pairs = make_rank_pairs(set.accs, mode, seed, max_pairs);
  std::vector<std::tuple<ArchSpec, ArchSpec, RankTarget>> out;
  out.reserve(pairs.size());
  for (const PairSample& p : pairs)
    out.push_back({set.specs[static_cast<std::size_t>(p.first)],
                   set.specs[static_cast<std::size_t>(p.second)], RankTarget{p.first_wins}});
  return out;
}

}  // namespace grasp
