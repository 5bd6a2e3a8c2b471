// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

// Shared fixtures for the unit tests: tiny network geometries and random inputs.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vod/request_tensor.hpp"
#include "vod/rng.hpp"
#include "vod/temporal.hpp"
#include "vod/tensor.hpp"

namespace vod::testing {

// U=3, T=8, K=2, D=2, H=3 with every reshape identity satisfied.
inline TemporalConfig tiny_temporal() {
  TemporalConfig c;
  c.intervals = 8;
  c.peak_intervals = 2;
  c.days = 2;
  c.conv_width = 3;
  c.row_rows = 2;
  c.row_cols = 4;
  c.col_rows = 4;
  c.col_cols = 2;
  c.tile_rows_count = 2;
  c.tile_rows = 2;
  c.tile_cols_count = 1;
  c.tile_cols = 2;
  c.hidden = 3;
  return c;
}

// Xavier weights with nonzero biases so every term is exercised.
inline ParamSet random_temporal(const TemporalConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  ParamSet p = init_temporal_params(cfg, rng);
  Rng b = rng.split("bias");
  for (const auto& [name, t] : ParamSet(p)) {
    if (name.find(".b") != std::string::npos) {
      for (double& v : p.mutable_at(name).values()) v = b.uniform(-0.3, 0.3);
    }
  }
  return p;
}

inline RequestTensor random_requests(std::size_t users, std::size_t days, std::size_t intervals, Rng& rng,
                                     double scale = 5.0) {
  RequestTensor x(users, days, intervals);
  for (double& v : x.values()) v = std::floor(rng.uniform() * scale);
  return x;
}

// Continuous positive values keep relu and max-pool kinks away from the probe points.
inline RequestTensor smooth_requests(std::size_t users, std::size_t days, std::size_t intervals, Rng& rng) {
  RequestTensor x(users, days, intervals);
  for (double& v : x.values()) v = rng.uniform(0.1, 2.0);
  return x;
}

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace vod::testing
