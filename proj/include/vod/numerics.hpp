// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "vod/rng.hpp"
#include "vod/tensor.hpp"

namespace vod {

/// Uniform on [-b, b] with b = sqrt(6 / (fan_in + fan_out)).
Tensor xavier_init(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);
double xavier_bound(std::size_t fan_in, std::size_t fan_out);

/// Layer-wise learning rates for mini-batch gradient descent. A parameter's
/// rate comes from the longest registered prefix matching its name, falling
/// back to the default rate; every rate decays geometrically per step.
class OptimizerState {
 public:
  explicit OptimizerState(double base_rate = 0.01, double decay = 1.0);

  void set_layer_rate(std::string prefix, double base_rate, double decay);
  double rate(std::string_view param_name) const;
  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t s) { step_ = s; }
  void advance() { ++step_; }

 private:
  struct LayerRate {
    std::string prefix;
    double base_rate;
    double decay;
  };
  static void validate(double base_rate, double decay);

  LayerRate default_;
  std::vector<LayerRate> layers_;
  std::uint64_t step_ = 0;
};

/// p <- p - rate(p) * g for every named gradient, then commits a new version.
ParamSet mbgd_step(ParamSet params, const Gradients& grads, OptimizerState& opt);

struct LossAndGradients {
  double loss = 0.0;
  Gradients grads;
};

struct GradCheckOptions {
  double step = 1e-5;
  // Tried in order when `step` misses: a coordinate scores its best step.
  // Rescues tiny gradients lost to roundoff and probes straddling a relu or
  // max-pool kink; a wrong analytic gradient misses at every step.
  std::vector<double> fallback_steps;
  // 0 checks every coordinate; otherwise a seeded sample per tensor.
  std::size_t max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t coords_checked = 0;
  std::size_t fallback_coords = 0;  // coordinates scored at a fallback step
};

/// Central-difference comparison of analytic gradients. Only tensors present
/// in the analytic gradient map are perturbed.
GradCheckResult finite_difference_check(const std::function<LossAndGradients(const ParamSet&)>& fn,
                                        const ParamSet& params, const GradCheckOptions& options = {});

}  // namespace vod
