// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "vod/cluster.hpp"
#include "vod/request_tensor.hpp"

namespace vod {

/// Product-moment correlation; throws NumericError on zero variance and
/// ShapeError on mismatched or too-short inputs.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Mean over k of |mean(s[k+w, k+2w)) - mean(s[k, k+w))|. Throws ShapeError
/// when the series is shorter than 2w.
double difference_of_means(std::span<const double> series, std::size_t window);

struct StationarityReport {
  double raw = 0.0;
  double differenced = 0.0;
  std::size_t series = 0;
};

/// Averages difference_of_means over every per-(video, user) series (days
/// concatenated) with at least one request, before and after first-order
/// differencing.
StationarityReport stationarity_report(std::span<const RequestTensor> videos, std::size_t window);

struct DensityStats {
  double mean = 0.0;
  double cv = 0.0;
};

struct ClusterDensity {
  std::size_t cluster = 0;
  std::size_t members = 0;
  DensityStats ns, l1, l2;
  double area = 0.0;
  double average_distance = 0.0;  // mean distance of member codes to the block center
};

struct ClusterQualityReport {
  double intra_mean = 0.0, intra_cv = 0.0;
  double inter_mean = 0.0, inter_cv = 0.0;
  std::size_t intra_pairs = 0, inter_pairs = 0;
  double corr_nv_area = 0.0;
  double corr_nv_ad = 0.0;
  std::vector<ClusterDensity> clusters;  // populated clusters, ascending index
};

/// Pairwise inner products of request vectors within and across clusters,
/// per-cluster density statistics, and correlations of cluster size with
/// block area and with member spread. Needs at least two populated clusters.
ClusterQualityReport cluster_quality_report(std::span<const std::vector<double>> vectors,
                                            std::span<const std::size_t> clusters,
                                            std::span<const std::array<double, 2>> codes,
                                            const BlockPartition& partition);

struct RankFrequency {
  std::size_t rank = 0;  // 1-based
  std::size_t video = 0;
  double requests = 0.0;
};

/// Videos by total requests, most requested first (ties by id).
std::vector<RankFrequency> rank_frequency(std::span<const RequestTensor> videos);

}  // namespace vod
