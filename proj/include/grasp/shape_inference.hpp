#pragma once

// Per-node tensor shape propagation.
//
// Shapes flow through the DAG in topological (index) order. A node with
// several parents merges them by taking the maximum parent channel count and
// the minimum parent spatial extent (the smallest map every parent can be
// cropped/projected to). Convolutions use 3x3 kernels with padding 1, so
// stride-1 layers keep H and W and stride-2 layers halve them with ceiling
// division: floor((H + 2*1 - 3) / 2) + 1 == ceil(H / 2).

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "grasp/errors.hpp"
#include "grasp/search_space.hpp"

namespace grasp {

struct TensorShape {
  int c = 0, h = 0, w = 0;

  friend bool operator==(const TensorShape&, const TensorShape&) = default;

  void validate() const {
    if (c < 1 || h < 1 || w < 1)
      throw InvalidArgumentError("tensor shape components must be >= 1");
  }
};

struct VertexShapes {
  TensorShape input;                // the shape fed to node 0
  std::vector<TensorShape> shapes;  // one per node, shapes[0] == input
};

inline TensorShape merge_parent_shapes(const std::vector<TensorShape>& parents) {
  TensorShape ref = parents.front();
  for (const TensorShape& p : parents) {
    ref.c = std::max(ref.c, p.c);
    ref.h = std::min(ref.h, p.h);
    ref.w = std::min(ref.w, p.w);
  }
  return ref;
}

inline int ceil_half(int x) { return (x + 1) / 2; }

inline TensorShape apply_layer(LayerType t, const TensorShape& ref, int node) {
  TensorShape out = ref;
  switch (t) {
    case LayerType::kInput:
      break;
    case LayerType::kOutput:
      out = {ref.c, 1, 1};
      break;
    case LayerType::kStemConv3x3:
      out.c = 64;
      break;
    case LayerType::kConv3x3Same:
    case LayerType::kConv3x3S2Same:
      break;
    case LayerType::kConv3x3Double:
    case LayerType::kConv3x3S2Double:
      out.c = 2 * ref.c;
      break;
    case LayerType::kConv3x3Halve:
    case LayerType::kConv3x3S2Halve:
      out.c = std::max(1, ref.c / 2);
      break;
  }
  if (is_stride2(t)) {
    out.h = ceil_half(ref.h);
    out.w = ceil_half(ref.w);
  }
  if (out.h < 1 || out.w < 1)
    throw ShapeUnderflowError("spatial size fell below 1 at node " + std::to_string(node));
  return out;
}

inline VertexShapes infer_shapes(const ArchSpec& spec, const TensorShape& input) {
  spec.validate();
  input.validate();
  VertexShapes out;
  out.input = input;
  out.shapes.resize(spec.n);
  out.shapes[0] = input;
  for (int v = 1; v < spec.n; ++v) {
    std::vector<TensorShape> parents;
    for (int u = 0; u < v; ++u)
      if (spec.adjacency[u][v]) parents.push_back(out.shapes[u]);
    out.shapes[v] = apply_layer(spec.layer_types[v], merge_parent_shapes(parents), v);
  }
  return out;
}

// Divides shapes by fixed dataset-wide maxima, mapping each component into
// (0, 1]. The defaults cover 64x64 inputs and channel counts up to 4096.
struct ShapeNormalizer {
  int max_c = 4096;
  int max_h = 64;
  int max_w = 64;

  void validate() const {
    if (max_c < 1 || max_h < 1 || max_w < 1)
      throw InvalidArgumentError("normalizer maxima must be >= 1");
  }

  // Grows the defaults just enough to cover every shape in `all`, rounding
  // the channel maximum up to a power of two so nearby spec sets agree.
  static ShapeNormalizer covering(const std::vector<VertexShapes>& all) {
    return covering(all, ShapeNormalizer{});
  }
  static ShapeNormalizer covering(const std::vector<VertexShapes>& all,
                                  ShapeNormalizer floor_values) {
    ShapeNormalizer norm = floor_values;
    for (const VertexShapes& vs : all)
      for (const TensorShape& s : vs.shapes) {
        while (norm.max_c < s.c) norm.max_c *= 2;
        norm.max_h = std::max(norm.max_h, s.h);
        norm.max_w = std::max(norm.max_w, s.w);
      }
    return norm;
  }
};

using NormalizedShape = std::array<double, 3>;

inline std::vector<NormalizedShape> normalize_shapes(const VertexShapes& vs,
                                                     const ShapeNormalizer& norm = {}) {
  norm.validate();
  std::vector<NormalizedShape> out;
  out.reserve(vs.shapes.size());
  for (std::size_t i = 0; i < vs.shapes.size(); ++i) {
    const TensorShape& s = vs.shapes[i];
    if (s.c > norm.max_c || s.h > norm.max_h || s.w > norm.max_w)
      throw NormalizerError("shape at node " + std::to_string(i) +
                            " exceeds the normalizer maxima");
    out.push_back({static_cast<double>(s.c) / norm.max_c,
                   static_cast<double>(s.h) / norm.max_h,
                   static_cast<double>(s.w) / norm.max_w});
  }
  return out;
}

}  // namespace grasp
