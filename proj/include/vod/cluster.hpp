// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "vod/mlp.hpp"
#include "vod/rng.hpp"
#include "vod/tensor.hpp"

namespace vod {

struct Interval {
  double left = 0.0;
  double right = 0.0;
  double center() const { return 0.5 * (left + right); }
  double width() const { return right - left; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Data-independent grid over the encoder square (-1, 1)^2.
///
/// The positive half-axis (0, 1) is split recursively: each round divides the
/// current innermost interval into `divisions` equal parts, keeps the part
/// touching 0 for the next round and retains the rest. Rounds stop once the
/// retained count reaches sqrt(budget) / 2. The final innermost interval plus
/// the retained ones, mirrored onto the negative half-axis, form the 1-D
/// interval set; blocks are its Cartesian square, indexed ix * n + iy.
class BlockPartition {
 public:
  static BlockPartition build(std::size_t divisions, std::size_t budget);
  // Rebuilds from a [n, 2] tensor of (left, right) endpoints.
  static BlockPartition from_tensor(const Tensor& endpoints);

  std::span<const Interval> intervals() const { return intervals_; }
  std::size_t interval_count() const { return intervals_.size(); }
  std::size_t cluster_count() const { return intervals_.size() * intervals_.size(); }

  // Index of the interval holding x under [left, right); throws outside (-1, 1).
  std::size_t locate(double x) const;
  std::size_t assign(double x, double y) const;
  // Encoder outputs that rounded onto +-1 are pulled back inside the open square.
  std::size_t assign_code(const std::array<double, 2>& code) const;
  std::array<double, 2> center(std::size_t block) const;
  double area(std::size_t block) const;

  Tensor to_tensor() const;

  friend bool operator==(const BlockPartition&, const BlockPartition&) = default;

 private:
  explicit BlockPartition(std::vector<Interval> intervals);
  std::vector<Interval> intervals_;
};

struct ClusterConfig {
  std::vector<std::size_t> hidden{64, 16};
  double omega = 0.1;
  std::size_t divisions = 2;
  std::size_t budget = 16;
};

/// Encoder (input -> hidden... -> 2, tanh output) and mirrored decoder (linear output).
struct Autoencoder {
  MlpSpec encoder;
  MlpSpec decoder;

  static Autoencoder make(std::size_t input_dim, const std::vector<std::size_t>& hidden);
};

/// Adds "cluster.enc.*" and "cluster.dec.*" parameters.
void init_autoencoder(ParamSet& params, const Autoencoder& ae, Rng& rng);

struct ClusterForward {
  Tensor embedding;               // input T_v, kept for the normalization backward
  std::vector<double> normalized;  // NT
  MlpCache encoder, decoder;
  std::array<double, 2> code{};   // E
  std::size_t cluster = 0;        // block containing E
  std::size_t nearest = 0;        // block whose center is nearest to E
  double reconstruction = 0.0;
  double quantization = 0.0;      // min_b ||E - O_b||^2
  double loss = 0.0;              // reconstruction + omega * quantization
};

/// Normalizes, encodes, decodes and scores one video's temporal embedding.
ClusterForward cluster_forward(const Tensor& embedding, const ParamSet& params, const Autoencoder& ae,
                               const BlockPartition& partition, double omega);

/// Encoder-only path used by the clustering predictor.
std::array<double, 2> encode(const Tensor& embedding, const ParamSet& params, const Autoencoder& ae);

struct ClusterGradients {
  Gradients params;
  Tensor embedding;  // dL/dT_v
};

/// Gradients of scale * loss. The quantization term pulls toward the nearest
/// center only (ties resolved to the lowest block index).
ClusterGradients cluster_backward(const ClusterForward& fwd, const ParamSet& params, const Autoencoder& ae,
                                  const BlockPartition& partition, double omega, double scale = 1.0);

}  // namespace vod
