#pragma once

// Random DAG search space over convolutional cells.
//
// Architectures are built in three steps:
//   1. sample_submatrices: two binary 4x4 seeds (r1 strictly upper
//      triangular, r2 unconstrained).
//   2. compose_adjacency: 16x16 adjacency I4 (x) r1 + S4 (x) r2, where S4 is
//      the superdiagonal shift matrix. r1 fills the diagonal blocks, r2 the
//      first superdiagonal blocks, so the result is strictly upper
//      triangular, i.e. already topologically ordered.
//   3. attach_io + assign_layer_types: wrap the cell with input/output nodes,
//      prune nodes that sit on no input-to-output path, and label the
//      survivors with layer types.
//
// Specs are content-addressed: canonical_hash() digests a fixed byte layout
// (node count, adjacency bits, layer types) with SHA-256.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "grasp/errors.hpp"
#include "grasp/rng.hpp"
#include "grasp/sha256.hpp"

namespace grasp {

inline constexpr int kBlockSize = 4;
inline constexpr int kBlockCount = 4;
inline constexpr int kCellNodes = kBlockSize * kBlockCount;  // 16
inline constexpr int kMaxNodes = kCellNodes + 2;             // input + cell + output

using Bin4x4 = std::array<std::array<std::uint8_t, 4>, 4>;
using AdjMatrix = std::vector<std::vector<std::uint8_t>>;
using HashId = std::string;  // 64 lowercase hex chars

struct SubMatrixPair {
  Bin4x4 r1{};  // strictly upper triangular
  Bin4x4 r2{};
};

enum class LayerType : std::uint8_t {
  kInput = 0,
  kOutput = 1,
  kStemConv3x3 = 2,       // fixed 64 output channels
  kConv3x3Same = 3,       // keeps parent channels
  kConv3x3Double = 4,     // doubles parent channels
  kConv3x3Halve = 5,      // halves parent channels
  kConv3x3S2Same = 6,     // stride 2 variants additionally halve H and W
  kConv3x3S2Double = 7,
  kConv3x3S2Halve = 8,
};

inline constexpr int kLayerTypeCount = 9;

inline const char* to_string(LayerType t) {
  switch (t) {
    case LayerType::kInput: return "input";
    case LayerType::kOutput: return "output";
    case LayerType::kStemConv3x3: return "stem-conv3x3";
    case LayerType::kConv3x3Same: return "conv3x3-same";
    case LayerType::kConv3x3Double: return "conv3x3-double";
    case LayerType::kConv3x3Halve: return "conv3x3-halve";
    case LayerType::kConv3x3S2Same: return "conv3x3s2-same";
    case LayerType::kConv3x3S2Double: return "conv3x3s2-double";
    case LayerType::kConv3x3S2Halve: return "conv3x3s2-halve";
  }
  return "?";
}

inline LayerType layer_type_from_string(const std::string& s) {
  for (int i = 0; i < kLayerTypeCount; ++i) {
    auto t = static_cast<LayerType>(i);
    if (s == to_string(t)) return t;
  }
  throw InvalidArgumentError("unknown layer type: " + s);
}

inline bool is_stride2(LayerType t) {
  return t == LayerType::kConv3x3S2Same || t == LayerType::kConv3x3S2Double ||
         t == LayerType::kConv3x3S2Halve;
}

// The six types an ordinary (non stem-eligible) internal node can take.
inline constexpr std::array<LayerType, 6> kNonStemConvTypes = {
    LayerType::kConv3x3Same,   LayerType::kConv3x3Double,   LayerType::kConv3x3Halve,
    LayerType::kConv3x3S2Same, LayerType::kConv3x3S2Double, LayerType::kConv3x3S2Halve};

// A pruned, labeled architecture. Node 0 is the input, node n-1 the output,
// and the adjacency is strictly upper triangular, so node index order is a
// topological order.
struct ArchSpec {
  int n = 0;
  AdjMatrix adjacency;                 // n x n, entries 0/1
  std::vector<LayerType> layer_types;  // size n

  friend bool operator==(const ArchSpec&, const ArchSpec&) = default;

  std::vector<int> parents(int v) const {
    std::vector<int> out;
    for (int u = 0; u < v; ++u)
      if (adjacency[u][v]) out.push_back(u);
    return out;
  }

  std::vector<int> children(int u) const {
    std::vector<int> out;
    for (int v = u + 1; v < n; ++v)
      if (adjacency[u][v]) out.push_back(v);
    return out;
  }

  void validate() const {
    if (n < 2 || n > kMaxNodes) throw InvalidArgumentError("spec node count out of range");
    if (static_cast<int>(adjacency.size()) != n ||
        static_cast<int>(layer_types.size()) != n)
      throw InvalidArgumentError("spec field sizes disagree with n");
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(adjacency[i].size()) != n)
        throw InvalidArgumentError("adjacency is not square");
      for (int j = 0; j < n; ++j) {
        if (adjacency[i][j] != 0 && adjacency[i][j] != 1)
          throw InvalidArgumentError("adjacency entries must be 0/1");
        if (j <= i && adjacency[i][j] != 0)
          throw InvalidArgumentError("adjacency must be strictly upper triangular");
      }
    }
    if (layer_types[0] != LayerType::kInput)
      throw InvalidArgumentError("node 0 must be the input");
    if (layer_types[n - 1] != LayerType::kOutput)
      throw InvalidArgumentError("last node must be the output");
    for (int v = 1; v + 1 < n; ++v) {
      LayerType t = layer_types[v];
      if (t == LayerType::kInput || t == LayerType::kOutput)
        throw InvalidArgumentError("internal node labeled input/output");
    }
    for (int v = 1; v < n; ++v)
      if (parents(v).empty())
        throw InvalidArgumentError("node " + std::to_string(v) + " has no predecessor");
    for (int u = 0; u + 1 < n; ++u)
      if (children(u).empty())
        throw InvalidArgumentError("node " + std::to_string(u) + " has no successor");
  }
};

// --- step 1: seed matrices -------------------------------------------------

// Each eligible entry is an independent Bernoulli(edge_prob) draw. Draw order
// is fixed (r1 strict upper row-major, then r2 row-major) so a seed pins the
// exact matrices.
inline SubMatrixPair sample_submatrices(std::uint64_t seed, double edge_prob = 0.5) {
  if (edge_prob < 0.0 || edge_prob > 1.0)
    throw InvalidArgumentError("edge_prob must lie in [0, 1]");
  Rng rng(seed);
  SubMatrixPair out;
  for (int i = 0; i < kBlockSize; ++i)
    for (int j = i + 1; j < kBlockSize; ++j)
      out.r1[i][j] = rng.bernoulli(edge_prob) ? 1 : 0;
  for (int i = 0; i < kBlockSize; ++i)
    for (int j = 0; j < kBlockSize; ++j)
      out.r2[i][j] = rng.bernoulli(edge_prob) ? 1 : 0;
  return out;
}

// --- step 2: Kronecker composition ----------------------------------------

inline Bin4x4 skeleton_identity() {
  Bin4x4 k{};
  for (int i = 0; i < kBlockCount; ++i) k[i][i] = 1;
  return k;
}

inline Bin4x4 skeleton_shift() {
  Bin4x4 k{};
  for (int i = 0; i + 1 < kBlockCount; ++i) k[i][i + 1] = 1;
  return k;
}

inline AdjMatrix kronecker(const Bin4x4& k, const Bin4x4& r) {
  AdjMatrix out(kCellNodes, std::vector<std::uint8_t>(kCellNodes, 0));
  for (int bi = 0; bi < kBlockCount; ++bi)
    for (int bj = 0; bj < kBlockCount; ++bj)
      if (k[bi][bj])
        for (int i = 0; i < kBlockSize; ++i)
          for (int j = 0; j < kBlockSize; ++j)
            out[bi * kBlockSize + i][bj * kBlockSize + j] = r[i][j];
  return out;
}

inline void check_strictly_upper(const Bin4x4& r1) {
  for (int i = 0; i < kBlockSize; ++i)
    for (int j = 0; j <= i; ++j)
      if (r1[i][j]) throw InvalidArgumentError("r1 must be strictly upper triangular");
}

// a16 = I4 (x) r1 + S4 (x) r2. The two terms never overlap (diagonal vs
// superdiagonal blocks), so the sum stays binary.
inline AdjMatrix compose_adjacency(const SubMatrixPair& sub) {
  check_strictly_upper(sub.r1);
  AdjMatrix a = kronecker(skeleton_identity(), sub.r1);
  AdjMatrix b = kronecker(skeleton_shift(), sub.r2);
  for (int i = 0; i < kCellNodes; ++i)
    for (int j = 0; j < kCellNodes; ++j) a[i][j] = a[i][j] | b[i][j];
  return a;
}

// --- step 3: input/output attachment and pruning ---------------------------

namespace detail {

inline std::vector<char> reachable_from(const AdjMatrix& adj, int start) {
  int n = static_cast<int>(adj.size());
  std::vector<char> seen(n, 0);
  std::vector<int> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v)
      if (adj[u][v] && !seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
  }
  return seen;
}

inline std::vector<char> coreachable_to(const AdjMatrix& adj, int target) {
  int n = static_cast<int>(adj.size());
  std::vector<char> seen(n, 0);
  std::vector<int> stack{target};
  seen[target] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int u = 0; u < n; ++u)
      if (adj[u][v] && !seen[u]) {
        seen[u] = 1;
        stack.push_back(u);
      }
  }
  return seen;
}

}  // namespace detail

// Wraps a 16-node cell with input/output nodes and prunes dead nodes.
//
// The input feeds every cell source that has at least one outgoing edge (an
// isolated node starts no computation path, so it gets no input edge and is
// pruned below). The output collects from every cell sink. Nodes not on any
// input-to-output path are removed; if nothing survives, the result is the
// minimal two-node graph with a direct input-to-output edge.
inline AdjMatrix attach_io(const AdjMatrix& a16) {
  const int n = static_cast<int>(a16.size());
  if (n != kCellNodes) throw InvalidArgumentError("attach_io expects a 16-node cell");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(a16[i].size()) != n)
      throw InvalidArgumentError("attach_io expects a square matrix");
    for (int j = 0; j <= i; ++j)
      if (a16[i][j]) throw InvalidArgumentError("cell adjacency must be strictly upper triangular");
  }

  std::vector<int> in_deg(n, 0), out_deg(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (a16[i][j]) {
        ++out_deg[i];
        ++in_deg[j];
      }

  // Candidate graph: node 0 = input, 1..16 = cell, 17 = output.
  const int total = n + 2, in = 0, out = n + 1;
  AdjMatrix full(total, std::vector<std::uint8_t>(total, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) full[i + 1][j + 1] = a16[i][j];
  for (int v = 0; v < n; ++v) {
    if (in_deg[v] == 0 && out_deg[v] > 0) full[in][v + 1] = 1;
    if (out_deg[v] == 0) full[v + 1][out] = 1;
  }

  auto fwd = detail::reachable_from(full, in);
  auto bwd = detail::coreachable_to(full, out);
  std::vector<int> keep;
  for (int v = 1; v <= n; ++v)
    if (fwd[v] && bwd[v]) keep.push_back(v);

  if (keep.empty()) {
    AdjMatrix minimal(2, std::vector<std::uint8_t>(2, 0));
    minimal[0][1] = 1;
    return minimal;
  }

  std::vector<int> index(total, -1);
  index[in] = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) index[keep[i]] = static_cast<int>(i) + 1;
  index[out] = static_cast<int>(keep.size()) + 1;

  const int m = static_cast<int>(keep.size()) + 2;
  AdjMatrix pruned(m, std::vector<std::uint8_t>(m, 0));
  for (int u = 0; u < total; ++u) {
    if (index[u] < 0) continue;
    for (int v = 0; v < total; ++v)
      if (index[v] >= 0 && full[u][v]) pruned[index[u]][index[v]] = 1;
  }
  return pruned;
}

// Labels a pruned adjacency. Direct successors of the input draw uniformly
// from all seven conv types (the stem included); every other internal node
// draws uniformly from the six non-stem types.
inline ArchSpec assign_layer_types(const AdjMatrix& adj, std::uint64_t seed) {
  const int n = static_cast<int>(adj.size());
  if (n < 2) throw InvalidArgumentError("adjacency too small");
  Rng rng(seed);
  ArchSpec spec;
  spec.n = n;
  spec.adjacency = adj;
  spec.layer_types.assign(n, LayerType::kConv3x3Same);
  spec.layer_types[0] = LayerType::kInput;
  spec.layer_types[n - 1] = LayerType::kOutput;
  for (int v = 1; v + 1 < n; ++v) {
    if (adj[0][v]) {
      std::uint64_t pick = rng.below(kNonStemConvTypes.size() + 1);
      spec.layer_types[v] = pick == 0 ? LayerType::kStemConv3x3
                                      : kNonStemConvTypes[pick - 1];
    } else {
      spec.layer_types[v] = kNonStemConvTypes[rng.below(kNonStemConvTypes.size())];
    }
  }
  spec.validate();
  return spec;
}

// --- hashing ----------------------------------------------------------------

// Byte layout: [n : 1 byte][n*n adjacency bits, row-major, MSB-first, padded
// with zeros to a byte boundary][n layer-type bytes]. SHA-256 of that buffer,
// rendered as lowercase hex.
inline HashId canonical_hash(const ArchSpec& spec) {
  spec.validate();
  std::vector<std::uint8_t> bytes;
  bytes.push_back(static_cast<std::uint8_t>(spec.n));
  const int bits = spec.n * spec.n;
  std::uint8_t cur = 0;
  for (int k = 0; k < bits; ++k) {
    int i = k / spec.n, j = k % spec.n;
    if (spec.adjacency[i][j]) cur |= static_cast<std::uint8_t>(1u << (7 - k % 8));
    if (k % 8 == 7) {
      bytes.push_back(cur);
      cur = 0;
    }
  }
  if (bits % 8 != 0) bytes.push_back(cur);
  for (LayerType t : spec.layer_types) bytes.push_back(static_cast<std::uint8_t>(t));
  return sha256_hex(bytes.data(), bytes.size());
}

// --- sampling ---------------------------------------------------------------

// One full draw. Sub-streams are derived from the seed so the three stages
// stay independent.
inline ArchSpec sample_arch(std::uint64_t seed, double edge_prob = 0.5) {
  SubMatrixPair sub = sample_submatrices(derive_seed(seed, "submatrices"), edge_prob);
  AdjMatrix pruned = attach_io(compose_adjacency(sub));
  return assign_layer_types(pruned, derive_seed(seed, "layer-types"));
}

// Draws `count` distinct architectures (distinct canonical hashes) by
// rejection resampling. Attempt i uses derive_seed(seed, "arch", i), so the
// result is a pure function of (count, seed, edge_prob).
inline std::vector<ArchSpec> sample_unique(std::size_t count, std::uint64_t seed,
                                           double edge_prob = 0.5) {
  std::vector<ArchSpec> out;
  out.reserve(count);
  std::unordered_set<HashId> seen;
  const std::size_t max_consecutive = 100 * std::max<std::size_t>(count, 1);
  std::size_t consecutive_rejects = 0;
  for (std::uint64_t attempt = 0; out.size() < count; ++attempt) {
    ArchSpec spec = sample_arch(derive_seed(seed, "arch", attempt), edge_prob);
    if (seen.insert(canonical_hash(spec)).second) {
      out.push_back(std::move(spec));
      consecutive_rejects = 0;
    } else if (++consecutive_rejects >= max_consecutive) {
      throw ExhaustionError("sample_unique: " + std::to_string(consecutive_rejects) +
                            " consecutive duplicate draws; space looks exhausted");
    }
  }
  return out;
}

// --- small graph statistics (used by the synthetic benchmark) ---------------

// Number of internal nodes on the longest input-to-output path.
inline int longest_internal_path(const ArchSpec& spec) {
  std::vector<int> best(spec.n, 0);
  for (int v = 1; v < spec.n; ++v) {
    int m = 0;
    for (int u = 0; u < v; ++u)
      if (spec.adjacency[u][v]) m = std::max(m, best[u] + 1);
    best[v] = m;
  }
  return std::max(0, best[spec.n - 1] - 1);
}

// Edges that jump over at least one node in topological order.
inline int count_skip_edges(const ArchSpec& spec) {
  int count = 0;
  for (int u = 0; u < spec.n; ++u)
    for (int v = u + 2; v < spec.n; ++v) count += spec.adjacency[u][v];
  return count;
}

}  // namespace grasp
