#pragma once

// Fixed-size graph encoding for the ranking predictor.
//
// A spec with n <= 18 nodes becomes:
//   a_norm : 18x18, symmetrically normalized adjacency with self-loops
//            D^{-1/2} (sym(A) + I) D^{-1/2}, zero-padded beyond n
//   x      : 18x12 node features, one-hot layer type (9) followed by the
//            normalized (c, h, w) triple
//   mask   : which rows correspond to real nodes
//
// Padded rows/columns are all zero, so they contribute nothing to message
// passing, and pooling averages over real nodes only.

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "grasp/errors.hpp"
#include "grasp/search_space.hpp"
#include "grasp/shape_inference.hpp"

namespace grasp {

inline constexpr int kEncodedNodes = 18;
inline constexpr int kShapeFeatureDim = 3;
inline constexpr int kFeatureDim = kLayerTypeCount + kShapeFeatureDim;  // 12

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct EncodedGraph {
  Mat a_norm;  // kEncodedNodes x kEncodedNodes
  Mat x;       // kEncodedNodes x kFeatureDim
  std::array<bool, kEncodedNodes> mask{};
  int n_real = 0;
};

// `use_vertex_shapes = false` zeroes the shape columns (ablation switch); the
// feature width stays 12 either way so models remain interchangeable.
inline EncodedGraph encode(const ArchSpec& spec,
                           const std::vector<NormalizedShape>& norm_shapes,
                           bool use_vertex_shapes = true) {
  spec.validate();
  if (spec.n > kEncodedNodes)
    throw CapacityError("spec has more nodes than the encoder supports");
  if (static_cast<int>(norm_shapes.size()) != spec.n)
    throw InvalidArgumentError("normalized shape count disagrees with spec");

  EncodedGraph g;
  g.n_real = spec.n;
  g.a_norm = Mat::Zero(kEncodedNodes, kEncodedNodes);
  g.x = Mat::Zero(kEncodedNodes, kFeatureDim);

  const int n = spec.n;
  Mat tilde = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (spec.adjacency[i][j]) {
        tilde(i, j) = 1.0;
        tilde(j, i) = 1.0;
      }
  Vec inv_sqrt_deg(n);
  for (int i = 0; i < n; ++i) inv_sqrt_deg(i) = 1.0 / std::sqrt(tilde.row(i).sum());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g.a_norm(i, j) = tilde(i, j) * inv_sqrt_deg(i) * inv_sqrt_deg(j);

  for (int v = 0; v < n; ++v) {
    g.x(v, static_cast<int>(spec.layer_types[v])) = 1.0;
    if (use_vertex_shapes) {
      g.x(v, kLayerTypeCount + 0) = norm_shapes[v][0];
      g.x(v, kLayerTypeCount + 1) = norm_shapes[v][1];
      g.x(v, kLayerTypeCount + 2) = norm_shapes[v][2];
    }
    g.mask[v] = true;
  }
  return g;
}

// Convenience path: infer shapes under `input`, normalize, encode.
inline EncodedGraph encode_for(const ArchSpec& spec, const TensorShape& input,
                               const ShapeNormalizer& norm = {},
                               bool use_vertex_shapes = true) {
  return encode(spec, normalize_shapes(infer_shapes(spec, input), norm), use_vertex_shapes);
}

}  // namespace grasp
