// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vod/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "vod/errors.hpp"

namespace vod {

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ShapeError("pearson: inputs differ in length");
  if (xs.size() < 2) throw ShapeError("pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw NumericError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double difference_of_means(std::span<const double> s, std::size_t window) {
  if (window == 0) throw ShapeError("difference_of_means: window must be positive");
  if (s.size() < 2 * window) throw ShapeError("difference_of_means: series shorter than two windows");
  std::vector<double> prefix(s.size() + 1, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) prefix[i + 1] = prefix[i] + s[i];
  const double w = static_cast<double>(window);
  const std::size_t positions = s.size() - 2 * window + 1;
  double total = 0.0;
  for (std::size_t k = 0; k < positions; ++k) {
    const double first = prefix[k + window] - prefix[k];
    const double second = prefix[k + 2 * window] - prefix[k + window];
    total += std::abs(second - first) / w;
  }
  return total / static_cast<double>(positions);
}

StationarityReport stationarity_report(std::span<const RequestTensor> videos, std::size_t window) {
  StationarityReport r;
  std::vector<double> series, diff;
  for (const auto& x : videos) {
    for (std::size_t u = 0; u < x.users(); ++u) {
      series.clear();
      for (std::size_t d = 0; d < x.days(); ++d) {
        const auto s = x.series(u, d);
        series.insert(series.end(), s.begin(), s.end());
      }
      if (std::all_of(series.begin(), series.end(), [](double v) { return v == 0.0; })) continue;
      if (series.size() < 2 * window + 1) throw ShapeError("stationarity_report: series too short for the window");
      diff.resize(series.size() - 1);
      for (std::size_t i = 0; i + 1 < series.size(); ++i) diff[i] = series[i + 1] - series[i];
      r.raw += difference_of_means(series, window);
      r.differenced += difference_of_means(diff, window);
      ++r.series;
    }
  }
  if (r.series == 0) throw ShapeError("stationarity_report: no nonzero series");
  r.raw /= static_cast<double>(r.series);
  r.differenced /= static_cast<double>(r.series);
  return r;
}

namespace {

// Running mean and coefficient of variation (population standard deviation over mean).
struct Moments {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  DensityStats stats() const {
    if (n == 0) return {};
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
    return {mean, mean != 0.0 ? std::sqrt(var) / std::abs(mean) : 0.0};
  }
};

}  // namespace

ClusterQualityReport cluster_quality_report(std::span<const std::vector<double>> vectors,
                                            std::span<const std::size_t> clusters,
                                            std::span<const std::array<double, 2>> codes,
                                            const BlockPartition& partition) {
  if (vectors.size() != clusters.size() || codes.size() != clusters.size()) {
    throw ShapeError("cluster_quality_report: inputs differ in length");
  }
  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (clusters[i] >= partition.cluster_count()) throw ShapeError("cluster index outside the partition");
    members[clusters[i]].push_back(i);
  }
  if (members.size() < 2) throw ShapeError("cluster_quality_report: fewer than two populated clusters");

  ClusterQualityReport r;
  Moments intra, inter;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = i + 1; j < vectors.size(); ++j) {
      const auto& a = vectors[i];
      const auto& b = vectors[j];
      if (a.size() != b.size()) throw ShapeError("request vectors differ in length");
      double dot = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
      (clusters[i] == clusters[j] ? intra : inter).add(dot);
    }
  }
  const auto is = intra.stats();
  const auto xs = inter.stats();
  r.intra_mean = is.mean;
  r.intra_cv = is.cv;
  r.inter_mean = xs.mean;
  r.inter_cv = xs.cv;
  r.intra_pairs = intra.n;
  r.inter_pairs = inter.n;

  std::vector<double> nv, area, ad;
  for (const auto& [c, idx] : members) {
    ClusterDensity cd;
    cd.cluster = c;
    cd.members = idx.size();
    cd.area = partition.area(c);
    const auto center = partition.center(c);
    Moments ns, l1, l2;
    double dist = 0.0;
    for (auto i : idx) {
      const auto& v = vectors[i];
      const double len = static_cast<double>(v.size());
      double nz = 0.0, s1 = 0.0, s2 = 0.0;
      for (double x : v) {
        if (x != 0.0) nz += 1.0;
        s1 += std::abs(x);
        s2 += x * x;
      }
      ns.add(nz / len);
      l1.add(s1 / len);
      l2.add(std::sqrt(s2) / len);
      dist += std::hypot(codes[i][0] - center[0], codes[i][1] - center[1]);
    }
    cd.ns = ns.stats();
    cd.l1 = l1.stats();
    cd.l2 = l2.stats();
    cd.average_distance = dist / static_cast<double>(idx.size());
    nv.push_back(static_cast<double>(cd.members));
    area.push_back(cd.area);
    ad.push_back(cd.average_distance);
    r.clusters.push_back(cd);
  }
  // Undefined correlations (e.g. every populated block the same size) are reported as NaN.
  const auto corr = [](std::span<const double> a, std::span<const double> b) {
    try {
      return pearson(a, b);
    } catch (const NumericError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  r.corr_nv_area = corr(nv, area);
  r.corr_nv_ad = corr(nv, ad);
  return r;
}

std::vector<RankFrequency> rank_frequency(std::span<const RequestTensor> videos) {
  std::vector<RankFrequency> out(videos.size());
  for (std::size_t v = 0; v < videos.size(); ++v) out[v] = {0, v, videos[v].total()};
  std::stable_sort(out.begin(), out.end(),
                   [](const RankFrequency& a, const RankFrequency& b) { return a.requests > b.requests; });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

}  // namespace vod
