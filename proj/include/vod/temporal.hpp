// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vod/request_tensor.hpp"
#include "vod/rng.hpp"
#include "vod/tensor.hpp"

namespace vod {

/// Geometry of the shared temporal layers.
///
/// The mean branch output (length T) is reshaped three ways before pooling:
///   row view    row_rows x row_cols                 (pooled per row    -> row_rows values)
///   column view col_rows x col_cols                 (pooled per column -> col_cols values)
///   block view  (tile_rows_count * tile_rows) x (tile_cols_count * tile_cols),
///               pooled per tile_rows x tile_cols tile -> tile_rows_count * tile_cols_count values
/// All three must produce exactly `peak_intervals` values.
struct TemporalConfig {
  std::size_t intervals = 24;      // T
  std::size_t peak_intervals = 6;  // K
  std::size_t days = 7;            // D
  std::size_t conv_width = 3;
  std::size_t row_rows = 6;
  std::size_t row_cols = 4;
  std::size_t col_rows = 4;
  std::size_t col_cols = 6;
  std::size_t tile_rows_count = 3;  // B_row1
  std::size_t tile_rows = 2;        // B_row2
  std::size_t tile_cols_count = 2;  // B_column1
  std::size_t tile_cols = 2;        // B_column2
  std::size_t hidden = 16;          // H

  std::size_t gru_input() const { return 2 * peak_intervals; }
  std::size_t block_cols() const { return tile_cols_count * tile_cols; }

  // Throws ConfigError naming the first violated identity.
  void validate() const;

  static TemporalConfig desk();
  // Five-minute intervals over a day.
  static TemporalConfig full_scale();
};

/// Creates every "temporal.*" parameter with Xavier-initialized weights and zero biases.
ParamSet init_temporal_params(const TemporalConfig& cfg, Rng& rng);

struct PeakSelection {
  std::vector<std::size_t> indices;  // ascending
  std::vector<double> values;        // series at `indices`
};

/// Picks the K intervals with the largest totals (ties go to the smaller
/// index) and returns the series at those intervals in chronological order.
PeakSelection top_k_pool(std::span<const double> totals, std::span<const double> series, std::size_t k);

/// Same-length 1-D cross-correlation with zero padding followed by ReLU.
/// Returns the pre-activation through `pre` when non-null.
std::vector<double> conv_relu(std::span<const double> x, std::span<const double> kernel, double bias,
                              std::vector<double>* pre = nullptr);

struct PoolMix {
  std::vector<double> row, column, block, mixed;
  std::vector<std::size_t> row_arg, column_arg, block_arg;  // positions in the length-T input
};

PoolMix pool_mix(std::span<const double> ymc, const TemporalConfig& cfg, double w_row, double w_column,
                 double w_block);

struct GruWeights {
  const Tensor* w_z;
  const Tensor* u_z;
  const Tensor* b_z;
  const Tensor* w_r;
  const Tensor* u_r;
  const Tensor* b_r;
  const Tensor* w_h;
  const Tensor* u_h;
  const Tensor* b_h;

  static GruWeights bind(const ParamSet& params);
};

struct GruStep {
  std::vector<double> z, r, candidate, h;
};

/// One recurrence step: z, r gates and h = (1 - z) * h_prev + z * candidate.
GruStep gru_step(std::span<const double> input, std::span<const double> h_prev, const GruWeights& w);

/// Intermediates retained by temporal_forward for the backward pass.
struct TemporalDay {
  std::vector<std::size_t> peak_idx;
  std::vector<double> yp_pre, ymc_pre, ymc;
  PoolMix pools;
  std::vector<double> input;  // [YP, YM]
  std::vector<double> h_prev;
  GruStep gru;
};

struct TemporalCache {
  std::size_t users = 0;
  std::vector<std::vector<TemporalDay>> days;  // [user][day]
  RequestTensor x;
  bool valid() const { return users > 0 && !days.empty(); }
};

struct TemporalOutput {
  Tensor embedding;  // users x hidden, row u = final hidden state of user u
  TemporalCache cache;
};

/// Runs the first cfg.days days of `x` through the temporal layers. Peak
/// intervals for (u, d) are chosen from `peak_totals.series(u, d)`.
TemporalOutput temporal_forward(const RequestTensor& x, const TemporalConfig& cfg, const ParamSet& params,
                                const RequestTensor& peak_totals, bool keep_cache = true);

struct TemporalGradients {
  Gradients params;
  RequestTensor input;
};

/// Exact gradients of the composite temporal function given dL/d(embedding).
/// Peak selection and pooling argmax positions are held fixed.
TemporalGradients temporal_backward(const TemporalCache& cache, const TemporalConfig& cfg, const ParamSet& params,
                                    const Tensor& d_embedding);

}  // namespace vod
