// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vod/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vod/errors.hpp"

namespace vod {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw ConfigError("Rng::below requires n > 0");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double xavier_bound(std::size_t fan_in, std::size_t fan_out) {
  if (fan_in == 0 || fan_out == 0) throw ConfigError("degenerate layer shape");
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Tensor xavier_init(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double b = xavier_bound(fan_in, fan_out);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-b, b);
  return t;
}

OptimizerState::OptimizerState(double base_rate, double decay) : default_{"", base_rate, decay} {
  validate(base_rate, decay);
}

void OptimizerState::validate(double base_rate, double decay) {
  if (!(base_rate > 0.0) || !std::isfinite(base_rate)) throw ConfigError("learning rate must be positive");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("learning-rate decay must lie in (0, 1]");
}

void OptimizerState::set_layer_rate(std::string prefix, double base_rate, double decay) {
  validate(base_rate, decay);
  for (auto& l : layers_) {
    if (l.prefix == prefix) {
      l.base_rate = base_rate;
      l.decay = decay;
      return;
    }
  }
  layers_.push_back({std::move(prefix), base_rate, decay});
}

double OptimizerState::rate(std::string_view param_name) const {
  const LayerRate* best = &default_;
  for (const auto& l : layers_) {
    if (param_name.starts_with(l.prefix) && l.prefix.size() >= best->prefix.size()) best = &l;
  }
  return best->base_rate * std::pow(best->decay, static_cast<double>(step_));
}

ParamSet mbgd_step(ParamSet params, const Gradients& grads, OptimizerState& opt) {
  for (const auto& [name, g] : grads) {
    if (!params.contains(name)) throw ShapeError("gradient for unknown parameter " + name);
    Tensor& p = params.mutable_at(name);
    if (!p.same_shape(g)) {
      throw ShapeError("gradient shape " + g.shape_string() + " does not match parameter " + name + " " +
                       p.shape_string());
    }
    const double lr = opt.rate(name);
    auto pv = p.values();
    auto gv = g.values();
    for (std::size_t i = 0; i < pv.size(); ++i) pv[i] -= lr * gv[i];
  }
  params.bump_version();
  opt.advance();
  return params;
}

namespace {
// Errors at or below this are not worth a fallback probe.
constexpr double kGradCheckGood = 1e-6;
}  // namespace

GradCheckResult finite_difference_check(const std::function<LossAndGradients(const ParamSet&)>& fn,
                                        const ParamSet& params, const GradCheckOptions& options) {
  const LossAndGradients analytic = fn(params);
  if (!std::isfinite(analytic.loss)) throw NumericError("non-finite loss in gradient check");

  GradCheckResult result;
  Rng rng(options.seed);
  ParamSet probe = params;

  for (const auto& [name, grad] : analytic.grads) {
    Tensor& p = probe.mutable_at(name);
    if (!p.same_shape(grad)) throw ShapeError("analytic gradient shape mismatch for " + name);

    std::vector<std::size_t> coords(p.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_tensor > 0 && coords.size() > options.max_coords_per_tensor) {
      for (std::size_t i = 0; i < options.max_coords_per_tensor; ++i) {
        std::swap(coords[i], coords[i + rng.below(coords.size() - i)]);
      }
      coords.resize(options.max_coords_per_tensor);
    }

    for (std::size_t idx : coords) {
      const double original = p[idx];
      auto rel_error = [&](double h) {
        p[idx] = original + h;
        const double up = fn(probe).loss;
        p[idx] = original - h;
        const double down = fn(probe).loss;
        p[idx] = original;
        if (!std::isfinite(up) || !std::isfinite(down)) throw NumericError("non-finite loss in gradient check");
        const double numeric = (up - down) / (2.0 * h);
        const double a = grad[idx];
        return std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      };
      double rel = rel_error(options.step);
      for (double h : options.fallback_steps) {
        if (rel <= kGradCheckGood) break;
        const double r = rel_error(h);
        if (r < rel) {
          rel = r;
          if (rel <= kGradCheckGood) ++result.fallback_coords;
        }
      }
      ++result.coords_checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = name;
        result.worst_index = idx;
      }
    }
  }
  return result;
}

}  // namespace vod
