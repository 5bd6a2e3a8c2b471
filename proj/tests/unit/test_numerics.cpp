// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "vod/errors.hpp"
#include "vod/numerics.hpp"
#include "vod/tensor.hpp"

namespace vod {
namespace {

TEST(Activation, ReluClampsNegatives) {
  const Tensor y = apply_activation(Tensor::vector({-1.0, 0.0, 2.0}), Activation::kRelu);
  EXPECT_EQ(y, Tensor::vector({0.0, 0.0, 2.0}));
}

TEST(Activation, SigmoidAtZeroIsHalf) {
  EXPECT_EQ(apply_activation(Tensor::vector({0.0}), Activation::kSigmoid)[0], 0.5);
}

TEST(Activation, TanhMatchesExponentialForm) {
  const double x = 0.5;
  const double oracle = (std::exp(x) - std::exp(-x)) / (std::exp(x) + std::exp(-x));
  const double y = apply_activation(Tensor::vector({x}), Activation::kTanh)[0];
  EXPECT_NEAR(y, oracle, 1e-15);
  EXPECT_NEAR(y, 0.46211715726000974, 1e-15);
}

TEST(Activation, RangesHoldOnExtremeInputs) {
  const Tensor x = Tensor::vector({-700.0, -30.0, -1.0, 0.0, 1.0, 30.0, 700.0});
  const Tensor s = apply_activation(x, Activation::kSigmoid);
  const Tensor t = apply_activation(x, Activation::kTanh);
  const Tensor r = apply_activation(x, Activation::kRelu);
  for (double v : s.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_TRUE(std::isfinite(v));
  }
  for (double v : t.values()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
  for (double v : r.values()) EXPECT_GE(v, 0.0);
}

TEST(Activation, ShapeIsPreserved) {
  const Tensor x({2, 3}, 0.25);
  EXPECT_EQ(apply_activation(x, Activation::kTanh).shape(), x.shape());
}

TEST(L2Normalize, ThreeFourFive) {
  const Tensor y = l2_normalize(Tensor::vector({3.0, 4.0}));
  EXPECT_NEAR(y[0], 0.6, 1e-15);
  EXPECT_NEAR(y[1], 0.8, 1e-15);
}

TEST(L2Normalize, ZeroVectorPassesThrough) {
  EXPECT_EQ(l2_normalize(Tensor::vector({0.0, 0.0})), Tensor::vector({0.0, 0.0}));
}

TEST(L2Normalize, OnesOfLengthFour) {
  const Tensor y = l2_normalize(Tensor::vector({1.0, 1.0, 1.0, 1.0}));
  for (double v : y.values()) EXPECT_NEAR(v, 1.0 / std::sqrt(4.0), 1e-15);
}

TEST(L2Normalize, UnitNormAndIdempotent) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor x = testing::random_tensor({7}, rng, -10.0, 10.0);
    const Tensor y = l2_normalize(x);
    EXPECT_NEAR(l2_norm(y.values()), 1.0, 1e-12);
    const Tensor z = l2_normalize(y);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(z[i], y[i], 1e-10);
  }
}

TEST(L2Normalize, BackwardMatchesFiniteDifferences) {
  Rng rng(12);
  const Tensor c = testing::random_tensor({5}, rng);
  ParamSet p;
  p.insert("x", testing::random_tensor({5}, rng, 0.5, 2.0));
  auto fn = [&](const ParamSet& ps) {
    LossAndGradients out;
    const Tensor y = l2_normalize(ps.at("x"));
    out.loss = testing::dot(y.values(), c.values());
    out.grads["x"] = l2_normalize_backward(ps.at("x"), c);
    return out;
  };
  EXPECT_LT(finite_difference_check(fn, p).max_rel_error, 1e-6);
}

TEST(Xavier, BoundOfSquareThreeLayerIsOne) {
  EXPECT_DOUBLE_EQ(xavier_bound(3, 3), 1.0);
  Rng rng(1);
  const Tensor w = xavier_init({3, 3}, 3, 3, rng);
  for (double v : w.values()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Xavier, BoundFormula) { EXPECT_NEAR(xavier_bound(1, 2), std::sqrt(2.0), 1e-15); }

TEST(Xavier, DeterministicPerSeed) {
  Rng a(99), b(99);
  EXPECT_EQ(xavier_init({4, 5}, 5, 4, a), xavier_init({4, 5}, 5, 4, b));
}

TEST(Xavier, ZeroFanIsRejected) {
  Rng rng(1);
  EXPECT_THROW(xavier_init({0, 3}, 0, 3, rng), ConfigError);
}

TEST(Mbgd, SingleStepArithmetic) {
  ParamSet p;
  p.insert("w", Tensor::vector({1.0}));
  OptimizerState opt(0.1);
  Gradients g{{"w", Tensor::vector({0.5})}};
  const ParamSet q = mbgd_step(p, g, opt);
  EXPECT_NEAR(q.at("w")[0], 0.95, 1e-15);
  EXPECT_EQ(q.version(), p.version() + 1);
  EXPECT_EQ(opt.step(), 1u);
}

TEST(Mbgd, ZeroGradientKeepsValuesAndBumpsVersion) {
  Rng rng(3);
  ParamSet p;
  p.insert("a", testing::random_tensor({3, 2}, rng));
  p.insert("b", testing::random_tensor({4}, rng));
  p.set_version(7);
  OptimizerState opt(0.3);
  Gradients g{{"a", Tensor({3, 2})}, {"b", Tensor({4})}};
  const ParamSet q = mbgd_step(p, g, opt);
  EXPECT_EQ(q.at("a"), p.at("a"));
  EXPECT_EQ(q.at("b"), p.at("b"));
  EXPECT_EQ(q.version(), 8u);
}

TEST(Mbgd, DecayOverTwoSteps) {
  ParamSet p;
  p.insert("w", Tensor::vector({1.0}));
  OptimizerState opt(0.4, 0.5);
  Gradients g{{"w", Tensor::vector({1.0})}};
  p = mbgd_step(p, g, opt);
  p = mbgd_step(p, g, opt);
  EXPECT_NEAR(p.at("w")[0], 1.0 - 0.4 - 0.2, 1e-15);
}

TEST(Mbgd, ShapeMismatchNamesParameter) {
  ParamSet p;
  p.insert("layer.W", Tensor({2, 2}));
  OptimizerState opt(0.1);
  Gradients g{{"layer.W", Tensor({3})}};
  try {
    mbgd_step(p, g, opt);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("layer.W"), std::string::npos);
  }
}

TEST(Mbgd, LayerRatesUseLongestPrefix) {
  OptimizerState opt(0.1);
  opt.set_layer_rate("policy.", 0.5, 1.0);
  opt.set_layer_rate("policy.head.l1", 0.7, 1.0);
  EXPECT_DOUBLE_EQ(opt.rate("temporal.W_peak"), 0.1);
  EXPECT_DOUBLE_EQ(opt.rate("policy.head.l0.W"), 0.5);
  EXPECT_DOUBLE_EQ(opt.rate("policy.head.l1.b"), 0.7);
}

TEST(Mbgd, RejectsNonPositiveRatesAndBadDecay) {
  EXPECT_THROW(OptimizerState(0.0), ConfigError);
  EXPECT_THROW(OptimizerState(-1.0), ConfigError);
  EXPECT_THROW(OptimizerState(0.1, 0.0), ConfigError);
  EXPECT_THROW(OptimizerState(0.1, 1.5), ConfigError);
}

LossAndGradients square(const ParamSet& p, double grad_scale) {
  const double x = p.at("p")[0];
  LossAndGradients out;
  out.loss = x * x;
  out.grads["p"] = Tensor::vector({grad_scale * 2.0 * x});
  return out;
}

TEST(GradCheck, QuadraticIsExact) {
  ParamSet p;
  p.insert("p", Tensor::vector({3.0}));
  const auto r = finite_difference_check([](const ParamSet& ps) { return square(ps, 1.0); }, p);
  EXPECT_LT(r.max_rel_error, 1e-8);
  EXPECT_EQ(r.coords_checked, 1u);
}

TEST(GradCheck, SigmoidDerivativeAtZero) {
  ParamSet p;
  p.insert("p", Tensor::vector({0.0}));
  auto fn = [](const ParamSet& ps) {
    const double s = sigmoid(ps.at("p")[0]);
    LossAndGradients out;
    out.loss = s;
    out.grads["p"] = Tensor::vector({s * (1.0 - s)});
    return out;
  };
  EXPECT_LT(finite_difference_check(fn, p).max_rel_error, 1e-6);
}

TEST(GradCheck, DetectsGradientTwiceTooLarge) {
  ParamSet p;
  p.insert("p", Tensor::vector({3.0}));
  const auto r = finite_difference_check([](const ParamSet& ps) { return square(ps, 2.0); }, p);
  EXPECT_NEAR(r.max_rel_error, 0.5, 1e-6);
  EXPECT_EQ(r.worst_param, "p");
}

// |x - k| with the kink 5e-6 from the probe point: h = 1e-5 straddles it.
LossAndGradients near_kink(const ParamSet& p, double grad_scale) {
  const double d = p.at("p")[0] - (1.0 + 5e-6);
  LossAndGradients out;
  out.loss = std::abs(d);
  out.grads["p"] = Tensor::vector({grad_scale * (d < 0 ? -1.0 : 1.0)});
  return out;
}

TEST(GradCheck, FallbackStepRescuesKinkStraddle) {
  ParamSet p;
  p.insert("p", Tensor::vector({1.0}));
  auto fn = [](const ParamSet& ps) { return near_kink(ps, 1.0); };
  EXPECT_GT(finite_difference_check(fn, p).max_rel_error, 0.1);
  GradCheckOptions o;
  o.fallback_steps = {1e-6};
  const auto r = finite_difference_check(fn, p, o);
  EXPECT_LT(r.max_rel_error, 1e-8);
  EXPECT_EQ(r.fallback_coords, 1u);
}

TEST(GradCheck, FallbackStepsDoNotRescueWrongGradient) {
  ParamSet p;
  p.insert("p", Tensor::vector({1.0}));
  GradCheckOptions o;
  o.fallback_steps = {1e-4, 1e-6, 1e-3};
  const auto r = finite_difference_check([](const ParamSet& ps) { return near_kink(ps, 2.0); }, p, o);
  EXPECT_GT(r.max_rel_error, 0.4);
  const auto q = finite_difference_check([](const ParamSet& ps) { return square(ps, 2.0); }, p, o);
  EXPECT_NEAR(q.max_rel_error, 0.5, 1e-6);
}

TEST(GradCheck, NonFiniteLossIsAnError) {
  ParamSet p;
  p.insert("p", Tensor::vector({1.0}));
  auto fn = [](const ParamSet&) {
    LossAndGradients out;
    out.loss = std::nan("");
    out.grads["p"] = Tensor::vector({0.0});
    return out;
  };
  EXPECT_THROW(finite_difference_check(fn, p), NumericError);
}

TEST(GradCheck, CoordinateSamplingIsBounded) {
  Rng rng(5);
  ParamSet p;
  p.insert("w", testing::random_tensor({40}, rng));
  auto fn = [](const ParamSet& ps) {
    LossAndGradients out;
    const Tensor& w = ps.at("w");
    Tensor g(w.shape());
    for (std::size_t i = 0; i < w.size(); ++i) {
      out.loss += 0.5 * w[i] * w[i];
      g[i] = w[i];
    }
    out.grads["w"] = g;
    return out;
  };
  GradCheckOptions o;
  o.max_coords_per_tensor = 6;
  o.seed = 2;
  const auto r = finite_difference_check(fn, p, o);
  EXPECT_EQ(r.coords_checked, 6u);
  EXPECT_LT(r.max_rel_error, 1e-8);
}

TEST(ParamSetTest, ChecksumTracksContentAndSubsetFilters) {
  ParamSet p;
  p.insert("temporal.a", Tensor::vector({1.0, 2.0}));
  p.insert("policy.b", Tensor::vector({3.0}));
  const auto c0 = p.checksum();
  p.mutable_at("policy.b")[0] = 3.5;
  EXPECT_NE(p.checksum(), c0);
  const ParamSet t = p.subset("temporal.");
  EXPECT_EQ(t.size(), 1u);
  EXPECT_TRUE(t.contains("temporal.a"));
  EXPECT_EQ(p.scalar_count(), 3u);
}

TEST(TensorTest, ShapeMismatchOnConstructionAndAdd) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1.0, 2.0, 3.0}), ShapeError);
  Tensor a({2});
  EXPECT_THROW(a += Tensor({3}), ShapeError);
}

TEST(RngTest, SplitsAreIndependentAndReproducible) {
  Rng root(42);
  Rng a = root.split("policy");
  Rng b = root.split("policy");
  Rng c = root.split("temporal");
  EXPECT_EQ(a(), b());
  EXPECT_NE(Rng(42).split("policy")(), c());
  Rng d(1);
  for (int i = 0; i < 1000; ++i) {
    const auto v = d.below(7);
    EXPECT_LT(v, 7u);
    const double u = d.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

}  // namespace
}  // namespace vod
