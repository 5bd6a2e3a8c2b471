// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "test_util.hpp"
#include "vod/dispatcher.hpp"
#include "vod/errors.hpp"

namespace vod {
namespace {

// Users a=0, b=1; CDN 0 serves both, CDN 1 serves b only.
Topology two_by_two(std::size_t budget = 1) {
  Topology t;
  t.users = 2;
  t.cdns = 2;
  t.serving = {{0}, {0, 1}};
  t.budget = {budget, budget};
  return t;
}

Topology single(std::size_t budget) {
  Topology t;
  t.users = 1;
  t.cdns = 1;
  t.serving = {{0}};
  t.budget = {budget};
  return t;
}

TEST(TopologyTest, MixMatrixIsColumnStochastic) {
  const Tensor uc = two_by_two().mix_matrix();
  EXPECT_EQ(uc, Tensor({2, 2}, {0.5, 0.0, 0.5, 1.0}));
}

TEST(TopologyTest, ValidationRejectsOrphans) {
  Topology t = two_by_two();
  t.serving[0].clear();
  EXPECT_THROW(t.validate(), ConfigError);
  t = two_by_two();
  t.serving = {{0}, {0}};
  EXPECT_THROW(t.validate(), ConfigError);
}

TEST(ComputeCp, HandProduct) {
  const Tensor up({1, 2}, {0.5, 0.9});
  const Tensor cp = compute_cp(up, two_by_two().mix_matrix());
  EXPECT_NEAR(cp.at(0, 0), 0.7, 1e-15);
  EXPECT_NEAR(cp.at(0, 1), 0.9, 1e-15);
}

TEST(ComputeCp, ConstantRowsAndIdentity) {
  const Tensor cp = compute_cp(Tensor({2, 2}, 0.3), two_by_two().mix_matrix());
  for (double v : cp.values()) EXPECT_NEAR(v, 0.3, 1e-15);
  EXPECT_EQ(compute_cp(Tensor({1, 1}, {0.42}), single(1).mix_matrix()), Tensor({1, 1}, {0.42}));
  EXPECT_THROW(compute_cp(Tensor({1, 3}), two_by_two().mix_matrix()), ShapeError);
}

TEST(ComputeCp, EntriesStayInUnitInterval) {
  Rng rng(4);
  Topology t;
  t.users = 6;
  t.cdns = 3;
  t.serving = {{0}, {0, 1}, {1}, {1, 2}, {2}, {2}};
  t.budget = {1, 1, 1};
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor cp = compute_cp(testing::random_tensor({5, 6}, rng, 0.0, 1.0), t.mix_matrix());
    for (double v : cp.values()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Plan, HighestClusterNewestFirst) {
  const Tensor cp({2, 1}, {0.9, 0.2});
  const std::vector<Candidate> cands{{1, 0, 3.0}, {2, 1, 9.0}, {3, 0, 5.0}};
  const DispatchPlan plan = build_dispatch_plan(cp, cands, single(2));
  ASSERT_EQ(plan.per_cdn[0].size(), 2u);
  EXPECT_EQ(plan.per_cdn[0][0].video, 3u);
  EXPECT_EQ(plan.per_cdn[0][1].video, 1u);
  EXPECT_EQ(plan.per_cdn[0][0].cp, 0.9);
}

TEST(Plan, LargeBudgetKeepsEverythingInOrderAndTiesUseId) {
  const Tensor cp({1, 1}, {0.5});
  const std::vector<Candidate> cands{{7, 0, 1.0}, {3, 0, 1.0}, {5, 0, 1.0}};
  const DispatchPlan plan = build_dispatch_plan(cp, cands, single(10));
  ASSERT_EQ(plan.total(), 3u);
  EXPECT_EQ(plan.per_cdn[0][0].video, 3u);
  EXPECT_EQ(plan.per_cdn[0][1].video, 5u);
  EXPECT_EQ(plan.per_cdn[0][2].video, 7u);
}

TEST(Plan, StableAndWithinBudget) {
  Rng rng(6);
  const Topology t = two_by_two(3);
  const Tensor cp = testing::random_tensor({4, 2}, rng, 0.0, 1.0);
  std::vector<Candidate> cands;
  for (VideoId v = 0; v < 20; ++v) cands.push_back({v, v % 4, std::floor(rng.uniform() * 5)});
  const DispatchPlan a = build_dispatch_plan(cp, cands, t);
  const DispatchPlan b = build_dispatch_plan(cp, cands, t);
  for (std::size_t i = 0; i < 2; ++i) {
    ASSERT_EQ(a.per_cdn[i].size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(a.per_cdn[i][k].video, b.per_cdn[i][k].video);
  }
}

TEST(Plan, ZeroBudgetIsRejected) {
  EXPECT_THROW(build_dispatch_plan(Tensor({1, 1}, {0.5}), std::vector<Candidate>{{1, 0, 0.0}}, single(0)),
               ConfigError);
}

std::vector<RequestRecord> series_stream(const std::vector<double>& sums, VideoId v = 1) {
  std::vector<RequestRecord> s;
  for (std::size_t t = 0; t < sums.size(); ++t) {
    if (sums[t] > 0.0) s.push_back({v, 0, 0, t, sums[t]});
  }
  return s;
}

TEST(Baseline, FiresAfterTheRun) {
  const auto stream = series_stream({1, 4, 5, 2});
  const DispatchPlan plan = baseline_dispatch(stream, 4, 3.0, 2, single(5));
  ASSERT_EQ(plan.per_cdn[0].size(), 1u);
  EXPECT_EQ(plan.per_cdn[0][0].video, 1u);
  EXPECT_EQ(plan.per_cdn[0][0].dispatched_at, 2);
}

TEST(Baseline, RunMustBeConsecutive) {
  const auto stream = series_stream({4, 0, 5, 1, 6});
  EXPECT_EQ(baseline_dispatch(stream, 5, 3.0, 2, single(5)).total(), 0u);
}

TEST(Baseline, InfiniteThresholdNeverFires) {
  const auto stream = series_stream({100, 200, 300});
  EXPECT_EQ(baseline_dispatch(stream, 3, std::numeric_limits<double>::infinity(), 1, single(5)).total(), 0u);
}

TEST(Baseline, ZeroThresholdPeriodOneIsImmediate) {
  const auto stream = series_stream({0, 0, 1, 3});
  const DispatchPlan plan = baseline_dispatch(stream, 4, 0.0, 1, single(5));
  ASSERT_EQ(plan.total(), 1u);
  EXPECT_EQ(plan.per_cdn[0][0].dispatched_at, 2);
}

TEST(Baseline, SumsUsersPerCdnAndRespectsBudget) {
  // User 0 on CDN 0; user 1 on both. Two users at 2 each exceed h=3 only on CDN 0.
  std::vector<RequestRecord> s{{1, 0, 0, 0, 2.0}, {1, 1, 0, 0, 2.0}, {2, 1, 0, 1, 9.0}, {3, 1, 0, 2, 9.0}};
  const DispatchPlan plan = baseline_dispatch(s, 4, 3.0, 1, two_by_two(1));
  ASSERT_EQ(plan.per_cdn[0].size(), 1u);
  EXPECT_EQ(plan.per_cdn[0][0].video, 1u);
  ASSERT_EQ(plan.per_cdn[1].size(), 1u);
  EXPECT_EQ(plan.per_cdn[1][0].video, 2u);
}

TEST(Baseline, RejectsBadArgumentsAndUnorderedStreams) {
  const auto stream = series_stream({1, 2});
  EXPECT_THROW(baseline_dispatch(stream, 2, -1.0, 1, single(1)), ConfigError);
  EXPECT_THROW(baseline_dispatch(stream, 2, 1.0, 0, single(1)), ConfigError);
  std::vector<RequestRecord> rev(stream.rbegin(), stream.rend());
  EXPECT_THROW(baseline_dispatch(rev, 2, 0.0, 1, single(1)), ConfigError);
}

// Brute force over every (user, request, serving CDN) triple.
double objective_oracle(const Assignment& a, const Tensor& cp, const PeakRequests& req, const Topology& t) {
  double total = 0.0;
  for (std::size_t u = 0; u < t.users; ++u) {
    for (const auto& [v, n] : req[u]) {
      double miss = 1.0;
      for (std::size_t i = 0; i < t.cdns; ++i) {
        if (t.serves(i, u)) miss *= 1.0 - cp.at(a.at(v), i);
      }
      total += n * miss;
    }
  }
  return total;
}

TEST(Objective, PerfectAndEmptyCoverage) {
  const Topology t = two_by_two();
  const Assignment a{{1, 0}, {2, 1}};
  const PeakRequests req{{{1, 3.0}}, {{1, 2.0}, {2, 4.0}}};
  EXPECT_EQ(evaluate_objective(a, Tensor({2, 2}, 1.0), req, t), 0.0);
  EXPECT_EQ(evaluate_objective(a, Tensor({2, 2}, 0.0), req, t), 9.0);
}

TEST(Objective, MatchesBruteForce) {
  const Topology t = two_by_two();
  const Assignment a{{1, 0}, {2, 1}, {3, 0}};
  const Tensor cp({2, 2}, {0.2, 0.7, 0.9, 0.4});
  const PeakRequests req{{{1, 3.0}, {2, 1.0}}, {{2, 2.0}, {3, 5.0}}};
  EXPECT_NEAR(evaluate_objective(a, cp, req, t), objective_oracle(a, cp, req, t), 1e-12);
  // 3*(0.8) + 1*(0.1) + 2*(0.1*0.6) + 5*(0.8*0.3)
  EXPECT_NEAR(evaluate_objective(a, cp, req, t), 2.4 + 0.1 + 0.12 + 1.2, 1e-12);
}

TEST(Objective, UnassignedVideosAreListed) {
  const Topology t = two_by_two();
  const PeakRequests req{{{1, 1.0}, {42, 1.0}}, {}};
  try {
    evaluate_objective({{1, 0}}, Tensor({1, 2}), req, t);
    FAIL() << "expected MissingArtifact";
  } catch (const MissingArtifact& e) {
    EXPECT_NE(std::string(e.what()).find("42"), std::string::npos);
  }
}

TEST(Objective, PlanObjectiveOnlyCreditsPlacedVideos) {
  const Topology t = two_by_two();
  const Assignment a{{1, 0}, {2, 0}};
  const Tensor cp({1, 2}, {0.5, 0.5});
  const PeakRequests req{{{1, 2.0}}, {{2, 4.0}}};
  DispatchPlan plan;
  plan.per_cdn = {{{1, 0, 0.5}}, {}};
  // video 1 on CDN 0 halves user 0's misses; video 2 was not placed.
  EXPECT_DOUBLE_EQ(plan_objective(plan, a, cp, req, t), 1.0 + 4.0);
}

TEST(Metrics, AccuracyArithmetic) {
  const Topology t = single(4);
  DispatchPlan plan;
  plan.per_cdn = {{{1, 0, 0.5}, {2, 0, 0.5}, {3, 0, 0.5}, {4, 0, 0.5}}};
  const std::vector<std::size_t> peak{2, 3};
  // 1 and 2 requested in peak; 3 only off-peak; 4 never; other-day records are ignored.
  const std::vector<RequestRecord> reqs{
      {1, 0, 5, 2, 1.0}, {2, 0, 5, 3, 2.0}, {3, 0, 5, 0, 1.0}, {4, 0, 4, 2, 9.0}};
  const EvalReport r = evaluate_metrics(plan, reqs, 5, 4, peak, t);
  EXPECT_EQ(r.dispatched, 4u);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(r.r_peak, 0.5);
  EXPECT_DOUBLE_EQ(r.r_whole, 0.75);
  EXPECT_DOUBLE_EQ(r.cp_load[0], 2.0);
}

TEST(Metrics, PlanInsideRequestedSetHasFullWholeRatio) {
  const Topology t = single(2);
  DispatchPlan plan;
  plan.per_cdn = {{{1, 0, 0.1}, {2, 0, 0.1}}};
  const std::vector<std::size_t> peak{0};
  const std::vector<RequestRecord> reqs{{1, 0, 0, 1, 1.0}, {2, 0, 0, 3, 1.0}};
  EXPECT_DOUBLE_EQ(evaluate_metrics(plan, reqs, 0, 4, peak, t).r_whole, 1.0);
}

TEST(Metrics, HitsNeedRequestsAfterTheDispatch) {
  const Topology t = single(2);
  DispatchPlan plan;
  plan.per_cdn = {{{1, 0, 0.0, 6}, {2, 0, 0.0, 6}}};  // day 1, interval 2 of T=4
  const std::vector<std::size_t> peak{2, 3};
  const std::vector<RequestRecord> reqs{{1, 0, 1, 2, 5.0}, {2, 0, 1, 3, 1.0}};
  const EvalReport r = evaluate_metrics(plan, reqs, 1, 4, peak, t);
  EXPECT_EQ(r.peak_hits, 1u);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
}

TEST(Metrics, EmptyPlanAndCapacityFlag) {
  Topology t = single(2);
  t.capacity = {0.5};
  DispatchPlan empty;
  empty.per_cdn.resize(1);
  const std::vector<std::size_t> peak{0};
  EXPECT_THROW(evaluate_metrics(empty, {}, 0, 4, peak, t), ConfigError);
  DispatchPlan plan;
  plan.per_cdn = {{{1, 0, 0.4}, {2, 0, 0.4}}};
  EXPECT_TRUE(evaluate_metrics(plan, {}, 0, 4, peak, t).capacity_exceeded);
}

TEST(PlanCsv, HeaderAndRows) {
  DispatchPlan plan;
  plan.per_cdn = {{{9, 2, 0.25}}, {{4, 1, 0.5}, {5, 1, 0.5}}};
  std::ostringstream os;
  write_plan_csv(os, plan);
  EXPECT_EQ(os.str(), "cdn_id,rank,video_id,cluster,cp\n0,0,9,2,0.25\n1,0,4,1,0.5\n1,1,5,1,0.5\n");
}

}  // namespace
}  // namespace vod
