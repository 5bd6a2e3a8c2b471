// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "vod/analysis.hpp"
#include "vod/errors.hpp"

namespace vod {
namespace {

// Raw-sum form of the product-moment coefficient.
double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

TEST(Pearson, PerfectLines) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_NEAR(pearson(x, x), 1.0, 1e-15);
  const std::vector<double> y{1, -1, -3, -5};
  EXPECT_NEAR(pearson(x, y), -1.0, 1e-15);
}

TEST(Pearson, SmallHandCase) {
  const std::vector<double> x{1, 2, 3}, y{1, 2, 4};
  EXPECT_NEAR(pearson(x, y), pearson_oracle(x, y), 1e-14);
  EXPECT_NEAR(pearson(x, y), 0.98198, 1e-5);
}

TEST(Pearson, RandomAgreesWithOracleAndStaysInRange) {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(9), y(9);
    for (auto& v : x) v = rng.uniform(-5, 5);
    for (auto& v : y) v = rng.uniform(-5, 5);
    const double r = pearson(x, y);
    EXPECT_NEAR(r, pearson_oracle(x, y), 1e-12);
    EXPECT_LE(std::abs(r), 1.0);
  }
}

TEST(Pearson, Errors) {
  const std::vector<double> a{1, 2}, b{1, 2, 3}, flat{2, 2}, one{1};
  EXPECT_THROW(pearson(a, b), ShapeError);
  EXPECT_THROW(pearson(one, one), ShapeError);
  EXPECT_THROW(pearson(a, flat), NumericError);
}

TEST(DifferenceOfMeans, ConstantIsZero) {
  const std::vector<double> s(48, 3.0);
  EXPECT_EQ(difference_of_means(s, 24), 0.0);
}

TEST(DifferenceOfMeans, LinearTrendShiftsBySlopeTimesWindow) {
  std::vector<double> s(40);
  for (std::size_t t = 0; t < s.size(); ++t) s[t] = 0.5 * static_cast<double>(t) + 2.0;
  EXPECT_NEAR(difference_of_means(s, 8), 0.5 * 8, 1e-12);
}

TEST(DifferenceOfMeans, ShortSeriesIsAnError) {
  const std::vector<double> s(5, 1.0);
  EXPECT_THROW(difference_of_means(s, 3), ShapeError);
  EXPECT_THROW(difference_of_means(s, 0), ShapeError);
}

TEST(Stationarity, LinearTrendIsRemovedByDifferencing) {
  std::vector<RequestTensor> vids(1, RequestTensor(2, 3, 6));
  for (std::size_t u = 0; u < 2; ++u) {
    for (std::size_t d = 0; d < 3; ++d) {
      for (std::size_t t = 0; t < 6; ++t) vids[0].at(u, d, t) = static_cast<double>((u + 1) * (d * 6 + t));
    }
  }
  const StationarityReport r = stationarity_report(vids, 6);
  EXPECT_EQ(r.series, 2u);
  EXPECT_NEAR(r.raw, (1.0 * 6 + 2.0 * 6) / 2.0, 1e-12);
  EXPECT_NEAR(r.differenced, 0.0, 1e-12);
}

TEST(Stationarity, ConstantAndEmptySeries) {
  std::vector<RequestTensor> vids{RequestTensor(1, 2, 4, 5.0), RequestTensor(1, 2, 4)};
  const StationarityReport r = stationarity_report(vids, 3);
  EXPECT_EQ(r.series, 1u);
  EXPECT_EQ(r.raw, 0.0);
  EXPECT_EQ(r.differenced, 0.0);
  std::vector<RequestTensor> none{RequestTensor(1, 2, 4)};
  EXPECT_THROW(stationarity_report(none, 3), ShapeError);
  EXPECT_THROW(stationarity_report(vids, 4), ShapeError);
}

TEST(ClusterQuality, IdenticalVideosHaveEqualIntraAndInter) {
  const BlockPartition p = BlockPartition::build(2, 4);
  const std::vector<std::vector<double>> v(4, std::vector<double>{1, 2, 0});
  const std::vector<std::size_t> c{0, 0, 5, 5};
  const std::vector<std::array<double, 2>> codes(4, std::array<double, 2>{0.0, 0.0});
  const auto r = cluster_quality_report(v, c, codes, p);
  EXPECT_EQ(r.intra_mean, r.inter_mean);
  EXPECT_EQ(r.intra_pairs, 2u);
  EXPECT_EQ(r.inter_pairs, 4u);
}

TEST(ClusterQuality, HandComputedDensities) {
  const BlockPartition p = BlockPartition::build(2, 4);  // intervals of width 1/2, 16 blocks
  const std::vector<std::vector<double>> v{{2, 0}, {1, 0}, {0, 3}};
  const std::vector<std::size_t> c{0, 0, 15};
  const auto c0 = p.center(0), c15 = p.center(15);
  const std::vector<std::array<double, 2>> codes{
      std::array<double, 2>{c0[0] + 0.1, c0[1]}, std::array<double, 2>{c0[0], c0[1] - 0.2}, c15};
  const auto r = cluster_quality_report(v, c, codes, p);
  EXPECT_DOUBLE_EQ(r.intra_mean, 2.0);
  EXPECT_DOUBLE_EQ(r.inter_mean, 0.0);
  ASSERT_EQ(r.clusters.size(), 2u);
  const auto& a = r.clusters[0];
  EXPECT_EQ(a.members, 2u);
  EXPECT_DOUBLE_EQ(a.area, 0.25);
  EXPECT_DOUBLE_EQ(a.ns.mean, 0.5);
  EXPECT_DOUBLE_EQ(a.ns.cv, 0.0);
  EXPECT_DOUBLE_EQ(a.l1.mean, 0.75);
  EXPECT_NEAR(a.l1.cv, 0.25 / 0.75, 1e-15);
  EXPECT_NEAR(a.average_distance, 0.15, 1e-12);
  EXPECT_EQ(r.clusters[1].average_distance, 0.0);
  // Two clusters of equal area: the size/area correlation is undefined.
  EXPECT_TRUE(std::isnan(r.corr_nv_area));
  EXPECT_NEAR(r.corr_nv_ad, 1.0, 1e-12);
}

TEST(ClusterQuality, NeedsTwoPopulatedClusters) {
  const BlockPartition p = BlockPartition::build(2, 4);
  const std::vector<std::vector<double>> v{{1}, {2}};
  const std::vector<std::array<double, 2>> codes(2);
  EXPECT_THROW(cluster_quality_report(v, std::vector<std::size_t>{3, 3}, codes, p), ShapeError);
  EXPECT_THROW(cluster_quality_report(v, std::vector<std::size_t>{3, 99}, codes, p), ShapeError);
}

TEST(RankFrequencyTest, SortedWithIdTieBreak) {
  std::vector<RequestTensor> vids{RequestTensor(1, 1, 2, 1.0), RequestTensor(1, 1, 2, 3.0), RequestTensor(1, 1, 2, 1.0)};
  const auto rf = rank_frequency(vids);
  ASSERT_EQ(rf.size(), 3u);
  EXPECT_EQ(rf[0].video, 1u);
  EXPECT_EQ(rf[0].rank, 1u);
  EXPECT_EQ(rf[0].requests, 6.0);
  EXPECT_EQ(rf[1].video, 0u);
  EXPECT_EQ(rf[2].video, 2u);
  EXPECT_EQ(rf[2].rank, 3u);
}

}  // namespace
}  // namespace vod
