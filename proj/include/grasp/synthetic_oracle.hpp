#pragma once

// Deterministic stand-in for real training runs. Each architecture gets a
// capacity score from its graph and inferred vertex shapes; accuracy curves
// over epochs follow a saturating rise with step-ups at the learning-rate
// drop epochs and hash-seeded noise whose amplitude shrinks as capacity
// grows. Everything is a pure function of (spec, profile, epoch), so records
// can be regenerated bit for bit on any machine.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "grasp/errors.hpp"
#include "grasp/rng.hpp"
#include "grasp/search_space.hpp"
#include "grasp/shape_inference.hpp"

namespace grasp {

struct DatasetProfile {
  std::string name;
  TensorShape input_shape{3, 32, 32};
  int num_classes = 10;
  // Abstract hardness knob in (0, 1]: shrinks attainable accuracy and bends
  // the capacity-to-accuracy mapping, so profiles rank the same specs
  // similarly but not identically.
  double difficulty = 0.5;
  std::vector<int> lr_drops = {40, 80};
  int total_epochs = 120;
};

inline const std::vector<DatasetProfile>& builtin_profiles() {
  static const std::vector<DatasetProfile> profiles = {
      {"fashion-mnist", TensorShape{1, 28, 28}, 10, 0.25, {40, 80}, 120},
      {"cifar10", TensorShape{3, 32, 32}, 10, 0.45, {40, 80}, 120},
      {"cifar100", TensorShape{3, 32, 32}, 100, 0.70, {40, 80, 100}, 120},
      {"tiny-imagenet", TensorShape{3, 64, 64}, 200, 0.90, {30, 60, 90}, 120},
  };
  return profiles;
}

inline const DatasetProfile& profile_by_name(std::string_view name) {
  for (const DatasetProfile& p : builtin_profiles())
    if (p.name == name) return p;
  throw NotFoundError("unknown dataset profile: " + std::string(name));
}

struct OracleParams {
  // Capacity mix: positive weights reward depth, shortcuts, and channel
  // width; the collapse weight penalizes early spatial bottlenecks.
  double w_depth = 0.40;
  double w_skip = 0.15;
  double w_channel = 0.45;
  double w_collapse = 0.35;
  double depth_scale = 12.0;
  double skip_scale = 6.0;
  double log_channel_scale = 12.0;
  // Accuracy curve.
  double top_acc = 0.999;
  double headroom_loss = 0.30;
  double warp_base = 0.6;
  double warp_gain = 0.8;
  double rise = 0.9;
  double rise_rate = 25.0;
  double bump = 0.08;
  // Noise, relative to the earned lift; damped for high-capacity specs and
  // halved after each learning-rate drop.
  double noise = 0.18;
  double noise_damp = 0.8;
};

// Weighted blend of depth, shortcut count, channel growth, and spatial
// collapse, clamped to [0, 1]. The degenerate input->output graph has no
// internal nodes and scores exactly zero.
inline double capacity_score(const ArchSpec& spec, const TensorShape& input,
                             const OracleParams& params = {}) {
  spec.validate();
  if (spec.n <= 2) return 0.0;
  const double depth =
      std::min(1.0, static_cast<double>(longest_internal_path(spec)) / params.depth_scale);
  const double skips =
      std::min(1.0, static_cast<double>(count_skip_edges(spec)) / params.skip_scale);

  VertexShapes vs = infer_shapes(spec, input);
  const double in_extent = std::log2(1.0 + std::min(input.h, input.w));
  double channel_sum = 0.0;
  double collapse_sum = 0.0;
  const int internal = spec.n - 2;
  for (int v = 1; v + 1 < spec.n; ++v) {
    const TensorShape& s = vs.shapes[static_cast<std::size_t>(v)];
    channel_sum += std::clamp(std::log2(static_cast<double>(s.c)) / params.log_channel_scale,
                              0.0, 1.0);
    collapse_sum += 1.0 - std::log2(1.0 + std::min(s.h, s.w)) / in_extent;
  }
  const double channels = channel_sum / internal;
  const double collapse = collapse_sum / internal;

  const double raw = params.w_depth * depth + params.w_skip * skips +
                     params.w_channel * channels - params.w_collapse * collapse;
  return std::clamp(raw, 0.0, 1.0);
}

namespace detail {

// Hash-seeded noise in [-1, 1], distinct per (spec, profile, epoch).
inline double oracle_noise_unit(const HashId& hash, const std::string& profile_name, int epoch) {
  std::uint64_t folded = fnv1a64(hash);
  std::uint64_t s = derive_seed(folded, profile_name, static_cast<std::uint64_t>(epoch));
  s = splitmix64_next(s);
  const double unit = static_cast<double>(s >> 11) * 0x1.0p-53;  // [0, 1)
  return 2.0 * unit - 1.0;
}

inline int drops_passed(const std::vector<int>& lr_drops, int epoch) {
  int n = 0;
  for (int d : lr_drops)
    if (epoch >= d) ++n;
  return n;
}

// Saturating curve in [0, 1]: exponential approach plus a step-up at each
// learning-rate drop already passed, with geometrically shrinking steps.
inline double epoch_shape(const OracleParams& p, const std::vector<int>& lr_drops, int epoch) {
  double s = p.rise * (1.0 - std::exp(-static_cast<double>(epoch) / p.rise_rate));
  double step = p.bump;
  for (int d : lr_drops) {
    if (epoch >= d) s += step;
    step *= 0.5;
  }
  return std::min(1.0, s);
}

}  // namespace detail

// Deterministic validation accuracy of `spec` on `profile` after `epoch`
// epochs of the simulated schedule. Clamped to [chance, top_acc].
inline double synthetic_accuracy(const ArchSpec& spec, const DatasetProfile& profile, int epoch,
                                 int total_epochs = 120, const OracleParams& params = {}) {
  if (epoch < 1 || epoch > total_epochs)
    throw InvalidArgumentError("epoch " + std::to_string(epoch) + " outside [1, " +
                               std::to_string(total_epochs) + "]");
  if (profile.num_classes < 2) throw InvalidArgumentError("profile needs at least 2 classes");
  const double chance = 1.0 / profile.num_classes;
  const double cap = capacity_score(spec, profile.input_shape, params);
  if (cap <= 0.0) return chance;

  const double d = profile.difficulty;
  const double lift_max = (params.top_acc - chance) * (1.0 - params.headroom_loss * d) *
                          std::pow(cap, params.warp_base + params.warp_gain * d);
  const double shape = detail::epoch_shape(params, profile.lr_drops, epoch);
  const int drops = detail::drops_passed(profile.lr_drops, epoch);
  const double amplitude =
      params.noise * (1.0 - params.noise_damp * cap) * std::pow(0.5, drops);
  const double u = detail::oracle_noise_unit(canonical_hash(spec), profile.name, epoch);
  const double acc = chance + lift_max * shape * (1.0 + amplitude * u);
  return std::clamp(acc, chance, params.top_acc);
}

// Largest possible deviation of synthetic_accuracy from its noise-free value
// at this epoch, useful for monotonicity bounds in tests.
inline double synthetic_noise_bound(const ArchSpec& spec, const DatasetProfile& profile,
                                    int epoch, const OracleParams& params = {}) {
  const double chance = 1.0 / profile.num_classes;
  const double cap = capacity_score(spec, profile.input_shape, params);
  if (cap <= 0.0) return 0.0;
  const double d = profile.difficulty;
  const double lift_max = (params.top_acc - chance) * (1.0 - params.headroom_loss * d) *
                          std::pow(cap, params.warp_base + params.warp_gain * d);
  const double shape = detail::epoch_shape(params, profile.lr_drops, epoch);
  const int drops = detail::drops_passed(profile.lr_drops, epoch);
  return lift_max * shape * params.noise * (1.0 - params.noise_damp * cap) *
         std::pow(0.5, drops);
}

}  // namespace grasp
