// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vod/mlp.hpp"

#include "vod/errors.hpp"
#include "vod/numerics.hpp"

namespace vod {

std::string MlpSpec::weight_name(std::size_t layer) const { return prefix + ".l" + std::to_string(layer) + ".W"; }
std::string MlpSpec::bias_name(std::size_t layer) const { return prefix + ".l" + std::to_string(layer) + ".b"; }

void init_mlp(ParamSet& params, const MlpSpec& spec, Rng& rng) {
  if (spec.sizes.size() < 2) throw ConfigError("mlp needs at least an input and an output size");
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const std::size_t in = spec.sizes[l];
    const std::size_t out = spec.sizes[l + 1];
    params.insert(spec.weight_name(l), xavier_init({out, in}, in, out, rng));
    params.insert(spec.bias_name(l), Tensor({out}));
  }
}

MlpCache mlp_forward(const ParamSet& params, const MlpSpec& spec, std::span<const double> input) {
  if (input.size() != spec.sizes.front()) throw ShapeError("mlp input size mismatch for " + spec.prefix);
  MlpCache cache;
  cache.activations.reserve(spec.sizes.size());
  cache.activations.emplace_back(input.begin(), input.end());
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const Tensor& w = params.at(spec.weight_name(l));
    const Tensor& b = params.at(spec.bias_name(l));
    const Activation act = (l + 1 == spec.layers()) ? spec.output : spec.hidden;
    std::vector<double> y(spec.sizes[l + 1]);
    matvec(w, cache.activations.back(), y);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = activate(y[i] + b[i], act);
    cache.activations.push_back(std::move(y));
  }
  return cache;
}

MlpGradients mlp_backward(const ParamSet& params, const MlpSpec& spec, const MlpCache& cache,
                          std::span<const double> d_output) {
  if (cache.activations.size() != spec.sizes.size()) throw MissingArtifact("mlp backward: forward cache missing");
  MlpGradients out;
  std::vector<double> delta(d_output.begin(), d_output.end());
  for (std::size_t l = spec.layers(); l-- > 0;) {
    const Activation act = (l + 1 == spec.layers()) ? spec.output : spec.hidden;
    const auto& y = cache.activations[l + 1];
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= activation_grad_from_output(y[i], act);

    const Tensor& w = params.at(spec.weight_name(l));
    Tensor dw(w.shape());
    outer_add(dw, delta, cache.activations[l]);
    out.params.emplace(spec.weight_name(l), std::move(dw));
    out.params.emplace(spec.bias_name(l), Tensor::vector(delta));

    std::vector<double> prev(spec.sizes[l], 0.0);
    matvec_transposed_add(w, delta, prev);
    delta = std::move(prev);
  }
  out.input = std::move(delta);
  return out;
}

}  // namespace vod
