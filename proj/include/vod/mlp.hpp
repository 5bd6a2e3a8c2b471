// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "vod/rng.hpp"
#include "vod/tensor.hpp"

namespace vod {

/// Stack of fully connected layers stored in a ParamSet as
/// "<prefix>.l<i>.W" (out x in) and "<prefix>.l<i>.b" (out).
struct MlpSpec {
  std::string prefix;
  std::vector<std::size_t> sizes;  // input, hidden..., output
  Activation hidden = Activation::kTanh;
  Activation output = Activation::kIdentity;

  std::size_t layers() const { return sizes.size() - 1; }
  std::string weight_name(std::size_t layer) const;
  std::string bias_name(std::size_t layer) const;
};

void init_mlp(ParamSet& params, const MlpSpec& spec, Rng& rng);

struct MlpCache {
  // activations[0] is the input, activations[i + 1] the output of layer i.
  std::vector<std::vector<double>> activations;
  const std::vector<double>& output() const { return activations.back(); }
};

MlpCache mlp_forward(const ParamSet& params, const MlpSpec& spec, std::span<const double> input);

struct MlpGradients {
  Gradients params;
  std::vector<double> input;
};

MlpGradients mlp_backward(const ParamSet& params, const MlpSpec& spec, const MlpCache& cache,
                          std::span<const double> d_output);

}  // namespace vod
