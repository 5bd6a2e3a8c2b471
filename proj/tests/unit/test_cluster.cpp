// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "gradient_problems.hpp"
#include "test_util.hpp"
#include "vod/cluster.hpp"
#include "vod/errors.hpp"
#include "vod/numerics.hpp"

namespace vod {
namespace {

TEST(Partition, DivisionsTwoBudgetSixteen) {
  const auto p = BlockPartition::build(2, 16);
  const std::vector<Interval> want{{-1.0, -0.5}, {-0.5, -0.25}, {-0.25, 0.0},
                                   {0.0, 0.25},  {0.25, 0.5},   {0.5, 1.0}};
  ASSERT_EQ(p.interval_count(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(p.intervals()[i], want[i]) << i;
  EXPECT_EQ(p.cluster_count(), 36u);
}

TEST(Partition, DivisionsTwoBudgetFour) {
  const auto p = BlockPartition::build(2, 4);
  const std::vector<Interval> want{{-1.0, -0.5}, {-0.5, 0.0}, {0.0, 0.5}, {0.5, 1.0}};
  ASSERT_EQ(p.interval_count(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(p.intervals()[i], want[i]);
  EXPECT_EQ(p.cluster_count(), 16u);
}

TEST(Partition, PureFunctionOfArguments) {
  EXPECT_EQ(BlockPartition::build(3, 50), BlockPartition::build(3, 50));
}

TEST(Partition, TooSmallBudgetOrDivisions) {
  EXPECT_THROW(BlockPartition::build(2, 3), ConfigError);
  EXPECT_THROW(BlockPartition::build(1, 16), ConfigError);
}

TEST(Partition, StructuralInvariantsAcrossArguments) {
  for (std::size_t ndh = 2; ndh <= 5; ++ndh) {
    for (std::size_t budget = 4; budget <= 400; budget += 17) {
      const auto p = BlockPartition::build(ndh, budget);
      const auto iv = p.intervals();
      EXPECT_GE(p.cluster_count(), budget);
      EXPECT_EQ(iv.front().left, -1.0);
      EXPECT_EQ(iv.back().right, 1.0);
      for (std::size_t i = 0; i < iv.size(); ++i) {
        EXPECT_LT(iv[i].left, iv[i].right);
        if (i > 0) EXPECT_EQ(iv[i].left, iv[i - 1].right);
      }
      if (ndh == 2) {
        // One interval retained per round: (2(|RIntv1| + 1))^2 blocks.
        const std::size_t retained = iv.size() / 2 - 1;
        EXPECT_EQ(p.cluster_count(), (2 * (retained + 1)) * (2 * (retained + 1)));
        EXPECT_GE(static_cast<double>(retained), 0.5 * std::sqrt(static_cast<double>(budget)));
      }
    }
  }
}

TEST(Partition, HandTracedAssignments) {
  const auto p = BlockPartition::build(2, 16);
  EXPECT_EQ(p.assign(0.3, -0.6), 24u);
  EXPECT_EQ(p.assign(0.25, 0.25), 28u);
}

TEST(Partition, OutsideOpenSquareIsRejected) {
  const auto p = BlockPartition::build(2, 16);
  EXPECT_THROW(p.assign(1.0, 0.0), ShapeError);
  EXPECT_THROW(p.assign(0.0, -1.0), ShapeError);
  EXPECT_THROW(p.assign(std::nan(""), 0.0), ShapeError);
  EXPECT_NO_THROW(p.assign_code({1.0, -1.0}));
}

TEST(Partition, UniformPointsLandInExactlyOneBlock) {
  for (std::size_t budget : {4u, 16u}) {
    const auto p = BlockPartition::build(2, budget);
    std::vector<std::size_t> counts(p.cluster_count(), 0);
    Rng rng(budget);
    for (int i = 0; i < 10000; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      const double y = rng.uniform(-1.0, 1.0);
      const std::size_t b = p.assign(x, y);
      ASSERT_LT(b, p.cluster_count());
      // Independent membership count: exactly one block contains the point.
      std::size_t hits = 0;
      for (std::size_t k = 0; k < p.cluster_count(); ++k) {
        const auto& ix = p.intervals()[k / p.interval_count()];
        const auto& iy = p.intervals()[k % p.interval_count()];
        if (x >= ix.left && x < ix.right && y >= iy.left && y < iy.right) ++hits;
      }
      ASSERT_EQ(hits, 1u);
      ++counts[b];
    }
    if (budget == 4) {
      for (auto c : counts) EXPECT_GT(c, 0u);
    }
  }
}

TEST(Partition, CentersAndAreasAndTensorRoundTrip) {
  const auto p = BlockPartition::build(2, 16);
  EXPECT_EQ(p.center(p.assign(0.3, -0.6)), (std::array<double, 2>{0.375, -0.75}));
  double total = 0.0;
  for (std::size_t b = 0; b < p.cluster_count(); ++b) total += p.area(b);
  EXPECT_NEAR(total, 4.0, 1e-12);
  EXPECT_EQ(BlockPartition::from_tensor(p.to_tensor()), p);
}

using testing::AeProblem;

TEST(ClusterForwardTest, LossMatchesFormula) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    AeProblem prob(seed, 0.3);
    const auto f = cluster_forward(prob.embedding, prob.params, prob.ae, prob.partition, prob.omega);
    // Independent recomputation from the definition.
    double norm = 0.0;
    for (double v : prob.embedding.values()) norm += v * v;
    norm = std::sqrt(norm);
    std::vector<double> nt;
    for (double v : prob.embedding.values()) nt.push_back(v / norm);
    const auto enc = mlp_forward(prob.params, prob.ae.encoder, nt);
    const auto dec = mlp_forward(prob.params, prob.ae.decoder, enc.output());
    double rec = 0.0;
    for (std::size_t i = 0; i < nt.size(); ++i) rec += 0.5 * (nt[i] - dec.output()[i]) * (nt[i] - dec.output()[i]);
    double q = 1e300;
    for (std::size_t b = 0; b < prob.partition.cluster_count(); ++b) {
      const auto c = prob.partition.center(b);
      q = std::min(q, std::pow(enc.output()[0] - c[0], 2) + std::pow(enc.output()[1] - c[1], 2));
    }
    EXPECT_NEAR(f.loss, rec + prob.omega * q, 1e-12);
    EXPECT_EQ(f.cluster, prob.partition.assign(enc.output()[0], enc.output()[1]));
    EXPECT_GT(f.code[0], -1.0);
    EXPECT_LT(f.code[0], 1.0);
  }
}

TEST(ClusterForwardTest, ZeroOmegaIsPureReconstruction) {
  AeProblem prob(2, 0.0);
  const auto f = cluster_forward(prob.embedding, prob.params, prob.ae, prob.partition, 0.0);
  EXPECT_EQ(f.loss, f.reconstruction);
  EXPECT_GT(f.quantization, 0.0);
}

TEST(ClusterForwardTest, CodeAtCenterHasNoQuantizationTerm) {
  // One-layer encoder with zero weights and bias atanh(center) lands exactly on a center.
  Autoencoder ae = Autoencoder::make(4, {});
  ParamSet params;
  Rng rng(3);
  init_autoencoder(params, ae, rng);
  const auto partition = BlockPartition::build(2, 16);
  const auto c = partition.center(7);
  params.mutable_at(ae.encoder.weight_name(0)).fill(0.0);
  params.mutable_at(ae.encoder.bias_name(0))[0] = std::atanh(c[0]);
  params.mutable_at(ae.encoder.bias_name(0))[1] = std::atanh(c[1]);
  const auto f = cluster_forward(Tensor::vector({1, 2, 3, 4}), params, ae, partition, 5.0);
  EXPECT_NEAR(f.quantization, 0.0, 1e-28);
  EXPECT_NEAR(f.loss, f.reconstruction, 1e-15);
  EXPECT_EQ(f.cluster, 7u);
}

TEST(ClusterForwardTest, NegativeOmegaIsConfigError) {
  AeProblem prob(1, 0.1);
  EXPECT_THROW(cluster_forward(prob.embedding, prob.params, prob.ae, prob.partition, -0.1), ConfigError);
}

using testing::cluster_objective;

TEST(ClusterBackwardTest, FiniteDifferencesOnParametersAndInput) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    AeProblem prob(seed, 0.2);
    ParamSet ps = prob.params;
    ps.insert("emb", prob.embedding);
    const auto r = finite_difference_check([&](const ParamSet& q) { return cluster_objective(prob, q); }, ps);
    EXPECT_LT(r.max_rel_error, 1e-4) << "seed " << seed << " " << r.worst_param;
  }
}

TEST(ClusterBackwardTest, ZeroScaleGivesZeroGradients) {
  AeProblem prob(4, 0.5);
  const auto f = cluster_forward(prob.embedding, prob.params, prob.ae, prob.partition, prob.omega);
  const auto g = cluster_backward(f, prob.params, prob.ae, prob.partition, prob.omega, 0.0);
  for (const auto& [name, t] : g.params) {
    for (double v : t.values()) EXPECT_EQ(v, 0.0) << name;
  }
  for (double v : g.embedding.values()) EXPECT_EQ(v, 0.0);
}

TEST(ClusterBackwardTest, LargeOmegaPullsCodeTowardNearestCenter) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    AeProblem prob(seed, 1e6);
    const auto f = cluster_forward(prob.embedding, prob.params, prob.ae, prob.partition, prob.omega);
    const auto g = cluster_backward(f, prob.params, prob.ae, prob.partition, prob.omega);
    // A small descent step on the encoder's output bias moves E toward O_nearest.
    ParamSet stepped = prob.params;
    const auto bias = prob.ae.encoder.bias_name(prob.ae.encoder.layers() - 1);
    for (std::size_t i = 0; i < 2; ++i) stepped.mutable_at(bias)[i] -= 1e-10 * g.params.at(bias)[i];
    const auto f2 = cluster_forward(prob.embedding, stepped, prob.ae, prob.partition, prob.omega);
    const auto c = prob.partition.center(f.nearest);
    const double before = std::hypot(f.code[0] - c[0], f.code[1] - c[1]);
    const double after = std::hypot(f2.code[0] - c[0], f2.code[1] - c[1]);
    EXPECT_LT(after, before) << "seed " << seed;
  }
}

TEST(ClusterBackwardTest, MissingCacheIsMissingArtifact) {
  AeProblem prob(1, 0.1);
  EXPECT_THROW(cluster_backward(ClusterForward{}, prob.params, prob.ae, prob.partition, 0.1), MissingArtifact);
}

TEST(AutoencoderTraining, IdentityCapableNetReconstructsFixedVectors) {
  // Input dimension 2 fits through the 2-D code, so reconstruction can reach zero.
  const Autoencoder ae = Autoencoder::make(2, {8});
  ParamSet params;
  Rng rng(21);
  init_autoencoder(params, ae, rng);
  const auto partition = BlockPartition::build(2, 16);
  std::vector<Tensor> data;
  for (int i = 0; i < 10; ++i) {
    const double a = 0.3 + 0.25 * i;
    data.push_back(Tensor({1, 2}, std::vector<double>{std::cos(a), std::sin(a)}));
  }
  OptimizerState opt(0.1);
  double mean = 0.0;
  for (int it = 0; it < 6000; ++it) {
    Gradients g;
    mean = 0.0;
    for (const auto& x : data) {
      const auto f = cluster_forward(x, params, ae, partition, 0.0);
      mean += f.loss / 10.0;
      accumulate(g, cluster_backward(f, params, ae, partition, 0.0, 0.1).params);
    }
    params = mbgd_step(params, g, opt);
  }
  EXPECT_LT(mean, 1e-3);
}

TEST(ClusterStability, AssignmentIgnoresBatchCompanions) {
  AeProblem prob(5, 0.1, 4, 3);
  Rng rng(77);
  std::vector<Tensor> videos;
  for (int i = 0; i < 50; ++i) videos.push_back(testing::random_tensor({4, 3}, rng));
  std::vector<std::size_t> reference;
  for (const auto& v : videos) reference.push_back(prob.partition.assign_code(encode(v, prob.params, prob.ae)));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> order(50);
    std::iota(order.begin(), order.end(), 0);
    shuffle_in_place(order, rng);
    for (std::size_t i : order) {
      const auto f = cluster_forward(videos[i], prob.params, prob.ae, prob.partition, prob.omega);
      EXPECT_EQ(f.cluster, reference[i]);
    }
  }
}

}  // namespace
}  // namespace vod
