// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "vod/policy.hpp"
#include "vod/tensor.hpp"

namespace vod {

/// Users, CDNs, which CDNs serve each user, and per-CDN dispatch budgets.
struct Topology {
  std::size_t users = 0;
  std::size_t cdns = 0;
  std::vector<std::vector<std::size_t>> serving;  // per user, sorted CDN ids
  std::vector<std::size_t> budget;                // videos dispatched per CDN per day
  std::vector<double> capacity;                   // soft bound on summed CP per CDN

  void validate() const;
  std::vector<std::size_t> users_of(std::size_t cdn) const;
  bool serves(std::size_t cdn, std::size_t user) const;
  /// users x cdns; column i is uniform over the users CDN i serves.
  Tensor mix_matrix() const;
};

/// CP = UP * UC (clusters x users times users x cdns).
Tensor compute_cp(const Tensor& up, const Tensor& uc);

struct Candidate {
  VideoId video = 0;
  std::size_t cluster = 0;
  double upload_time = 0.0;
};

inline constexpr std::int64_t kBeforeDay = -1;

struct PlanEntry {
  VideoId video = 0;
  std::size_t cluster = 0;
  double cp = 0.0;
  // Absolute interval (day * T + t) after which the copy serves requests;
  // kBeforeDay for dispatches made ahead of the evaluated days.
  std::int64_t dispatched_at = kBeforeDay;
};

struct DispatchPlan {
  std::vector<std::vector<PlanEntry>> per_cdn;
  Tensor cp;  // clusters x cdns; empty for threshold dispatch
  std::size_t total() const;
};

/// Per CDN: order candidates by CP of their cluster (descending), then upload
/// time (newest first), then video id; keep the first budget[i].
DispatchPlan build_dispatch_plan(const Tensor& cp, std::span<const Candidate> candidates, const Topology& topology);

struct RequestRecord {
  VideoId video = 0;
  std::size_t user = 0;
  std::size_t day = 0;
  std::size_t interval = 0;
  double count = 0.0;
};

/// Threshold dispatch: (v, i) is dispatched once the requests for v from the
/// users served by i exceed `threshold` in `period` consecutive intervals.
/// Each pair fires at most once; each CDN stops after budget[i] dispatches.
/// The stream must be ordered by (day, interval).
DispatchPlan baseline_dispatch(std::span<const RequestRecord> stream, std::size_t intervals_per_day,
                               double threshold, std::size_t period, const Topology& topology);

/// Peak requests of the target day per user: video -> count.
using PeakRequests = std::vector<std::map<VideoId, double>>;

/// sum_u sum_r count_u(r) * prod_{i in I_u} (1 - CP[C(r), i]).
double evaluate_objective(const Assignment& assignment, const Tensor& cp, const PeakRequests& requests,
                          const Topology& topology);

/// The same sum with CP[C(r), i] applied only where the plan places r on i.
double plan_objective(const DispatchPlan& plan, const Assignment& assignment, const Tensor& cp,
                      const PeakRequests& requests, const Topology& topology);

struct EvalReport {
  double r_whole = 0.0;
  double r_peak = 0.0;
  double accuracy = 0.0;
  std::size_t dispatched = 0;
  std::size_t whole_hits = 0;
  std::size_t peak_hits = 0;
  std::vector<double> cp_load;  // summed CP of dispatched videos per CDN
  bool capacity_exceeded = false;
};

/// Scores a plan against one day of requests (records with other days are
/// ignored). A dispatched (v, i) counts as a hit when a user served by i
/// requests v strictly after the dispatch; for r_peak and accuracy the request
/// must also fall inside `peak_window`.
EvalReport evaluate_metrics(const DispatchPlan& plan, std::span<const RequestRecord> day_requests, std::size_t day,
                            std::size_t intervals_per_day, std::span<const std::size_t> peak_window,
                            const Topology& topology);

/// CSV with header cdn_id,rank,video_id,cluster,cp.
void write_plan_csv(std::ostream& out, const DispatchPlan& plan);

}  // namespace vod
