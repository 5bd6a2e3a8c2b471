// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vod/dispatcher.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "vod/errors.hpp"

namespace vod {

void Topology::validate() const {
  if (users == 0 || cdns == 0) throw ConfigError("topology needs at least one user and one CDN");
  if (serving.size() != users) throw ConfigError("serving map must list every user");
  if (budget.size() != cdns) throw ConfigError("budget must list every CDN");
  if (!capacity.empty() && capacity.size() != cdns) throw ConfigError("capacity must list every CDN");
  for (std::size_t u = 0; u < users; ++u) {
    if (serving[u].empty()) throw ConfigError("user " + std::to_string(u) + " is not served by any CDN");
    for (auto i : serving[u]) {
      if (i >= cdns) throw ConfigError("serving map references unknown CDN " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < cdns; ++i) {
    if (users_of(i).empty()) throw ConfigError("CDN " + std::to_string(i) + " serves no users");
  }
}

std::vector<std::size_t> Topology::users_of(std::size_t cdn) const {
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < serving.size(); ++u) {
    if (serves(cdn, u)) out.push_back(u);
  }
  return out;
}

bool Topology::serves(std::size_t cdn, std::size_t user) const {
  const auto& s = serving.at(user);
  return std::find(s.begin(), s.end(), cdn) != s.end();
}

Tensor Topology::mix_matrix() const {
  Tensor uc = Tensor::matrix(users, cdns);
  for (std::size_t i = 0; i < cdns; ++i) {
    const auto members = users_of(i);
    for (auto u : members) uc.at(u, i) = 1.0 / static_cast<double>(members.size());
  }
  return uc;
}

Tensor compute_cp(const Tensor& up, const Tensor& uc) {
  if (up.rank() != 2 || uc.rank() != 2 || up.dim(1) != uc.dim(0)) {
    throw ShapeError("compute_cp: cannot multiply " + up.shape_string() + " by " + uc.shape_string());
  }
  const std::size_t clusters = up.dim(0);
  const std::size_t users = up.dim(1);
  const std::size_t cdns = uc.dim(1);
  Tensor cp = Tensor::matrix(clusters, cdns);
  for (std::size_t c = 0; c < clusters; ++c) {
    for (std::size_t i = 0; i < cdns; ++i) {
      double s = 0.0;
      for (std::size_t u = 0; u < users; ++u) s += up.at(c, u) * uc.at(u, i);
      cp.at(c, i) = s;
    }
  }
  return cp;
}

std::size_t DispatchPlan::total() const {
  std::size_t n = 0;
  for (const auto& l : per_cdn) n += l.size();
  return n;
}

DispatchPlan build_dispatch_plan(const Tensor& cp, std::span<const Candidate> candidates, const Topology& topology) {
  if (cp.rank() != 2 || cp.dim(1) != topology.cdns) throw ShapeError("CP must be clusters x CDNs");
  DispatchPlan plan;
  plan.cp = cp;
  plan.per_cdn.resize(topology.cdns);
  for (const auto& c : candidates) {
    if (c.cluster >= cp.dim(0)) throw ShapeError("candidate cluster outside CP rows");
  }
  std::vector<const Candidate*> order(candidates.size());
  for (std::size_t i = 0; i < topology.cdns; ++i) {
    const std::size_t n = topology.budget.at(i);
    if (n == 0) throw ConfigError("dispatch budget must be positive for CDN " + std::to_string(i));
    for (std::size_t k = 0; k < candidates.size(); ++k) order[k] = &candidates[k];
    std::sort(order.begin(), order.end(), [&](const Candidate* a, const Candidate* b) {
      const double pa = cp.at(a->cluster, i);
      const double pb = cp.at(b->cluster, i);
      if (pa != pb) return pa > pb;
      if (a->upload_time != b->upload_time) return a->upload_time > b->upload_time;
      return a->video < b->video;
    });
    const std::size_t keep = std::min(n, order.size());
    auto& list = plan.per_cdn[i];
    list.reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) {
      list.push_back({order[k]->video, order[k]->cluster, cp.at(order[k]->cluster, i), kBeforeDay});
    }
  }
  return plan;
}

DispatchPlan baseline_dispatch(std::span<const RequestRecord> stream, std::size_t intervals_per_day,
                               double threshold, std::size_t period, const Topology& topology) {
  if (threshold < 0.0 || std::isnan(threshold)) throw ConfigError("threshold h must be nonnegative");
  if (period < 1) throw ConfigError("period p must be at least 1");
  topology.validate();

  DispatchPlan plan;
  plan.per_cdn.resize(topology.cdns);
  std::set<std::pair<VideoId, std::size_t>> fired;
  std::map<std::pair<VideoId, std::size_t>, std::size_t> runs;  // pairs that exceeded h last interval

  std::size_t pos = 0;
  while (pos < stream.size()) {
    const std::size_t day = stream[pos].day;
    const std::size_t t = stream[pos].interval;
    std::map<std::pair<VideoId, std::size_t>, double> sums;
    for (; pos < stream.size() && stream[pos].day == day && stream[pos].interval == t; ++pos) {
      const auto& rec = stream[pos];
      for (auto i : topology.serving.at(rec.user)) sums[{rec.video, i}] += rec.count;
    }
    if (pos < stream.size()) {
      const auto& next = stream[pos];
      if (next.day < day || (next.day == day && next.interval < t)) {
        throw ConfigError("request stream is not ordered by interval");
      }
    }
    const std::int64_t now = static_cast<std::int64_t>(day * intervals_per_day + t);
    // Runs survive only through consecutive intervals.
    std::map<std::pair<VideoId, std::size_t>, std::size_t> next_runs;
    for (const auto& [key, total] : sums) {
      if (!(total > threshold)) continue;
      std::size_t run = 1;
      auto it = runs.find(key);
      if (it != runs.end()) run = it->second + 1;
      next_runs[key] = run;
      if (run >= period && !fired.contains(key)) {
        auto& list = plan.per_cdn[key.second];
        if (list.size() < topology.budget.at(key.second)) {
          list.push_back({key.first, 0, 0.0, now});
          fired.insert(key);
        }
      }
    }
    // Drop runs that were not continued in the very next interval.
    std::map<std::pair<VideoId, std::size_t>, std::size_t> kept;
    for (auto& [key, run] : next_runs) kept.emplace(key, run);
    runs.swap(kept);
    if (pos < stream.size()) {
      const auto& next = stream[pos];
      const std::int64_t next_now = static_cast<std::int64_t>(next.day * intervals_per_day + next.interval);
      if (next_now != now + 1) runs.clear();
    }
  }
  return plan;
}

namespace {

std::size_t cluster_of(const Assignment& assignment, VideoId v, std::vector<VideoId>& missing) {
  auto it = assignment.find(v);
  if (it == assignment.end()) {
    missing.push_back(v);
    return 0;
  }
  return it->second;
}

void throw_missing(const std::vector<VideoId>& missing) {
  if (missing.empty()) return;
  std::ostringstream os;
  os << "requested videos without cluster assignment:";
  for (auto v : missing) os << ' ' << v;
  throw MissingArtifact(os.str());
}

}  // namespace

double evaluate_objective(const Assignment& assignment, const Tensor& cp, const PeakRequests& requests,
                          const Topology& topology) {
  if (requests.size() != topology.users) throw ShapeError("peak requests must list every user");
  std::vector<VideoId> missing;
  double total = 0.0;
  for (std::size_t u = 0; u < requests.size(); ++u) {
    for (const auto& [video, count] : requests[u]) {
      const std::size_t c = cluster_of(assignment, video, missing);
      if (c >= cp.dim(0)) throw ShapeError("CP has no row for cluster " + std::to_string(c));
      double miss = 1.0;
      for (auto i : topology.serving[u]) miss *= 1.0 - cp.at(c, i);
      total += count * miss;
    }
  }
  throw_missing(missing);
  return total;
}

double plan_objective(const DispatchPlan& plan, const Assignment& assignment, const Tensor& cp,
                      const PeakRequests& requests, const Topology& topology) {
  if (requests.size() != topology.users) throw ShapeError("peak requests must list every user");
  std::vector<std::set<VideoId>> placed(topology.cdns);
  for (std::size_t i = 0; i < plan.per_cdn.size(); ++i) {
    for (const auto& e : plan.per_cdn[i]) placed[i].insert(e.video);
  }
  std::vector<VideoId> missing;
  double total = 0.0;
  for (std::size_t u = 0; u < requests.size(); ++u) {
    for (const auto& [video, count] : requests[u]) {
      const std::size_t c = cluster_of(assignment, video, missing);
      double miss = 1.0;
      for (auto i : topology.serving[u]) {
        if (placed[i].contains(video)) miss *= 1.0 - cp.at(c, i);
      }
      total += count * miss;
    }
  }
  throw_missing(missing);
  return total;
}

EvalReport evaluate_metrics(const DispatchPlan& plan, std::span<const RequestRecord> day_requests, std::size_t day,
                            std::size_t intervals_per_day, std::span<const std::size_t> peak_window,
                            const Topology& topology) {
  EvalReport r;
  r.dispatched = plan.total();
  if (r.dispatched == 0) throw ConfigError("cannot evaluate an empty dispatch plan");

  const std::set<std::size_t> peak(peak_window.begin(), peak_window.end());
  // Latest request interval per (video, cdn), overall and inside the peak window.
  std::map<std::pair<VideoId, std::size_t>, std::int64_t> last_any, last_peak;
  for (const auto& rec : day_requests) {
    if (rec.day != day || rec.count <= 0.0) continue;
    const std::int64_t when = static_cast<std::int64_t>(rec.day * intervals_per_day + rec.interval);
    for (auto i : topology.serving.at(rec.user)) {
      auto& a = last_any.try_emplace({rec.video, i}, when).first->second;
      a = std::max(a, when);
      if (peak.contains(rec.interval)) {
        auto& p = last_peak.try_emplace({rec.video, i}, when).first->second;
        p = std::max(p, when);
      }
    }
  }

  r.cp_load.assign(topology.cdns, 0.0);
  for (std::size_t i = 0; i < plan.per_cdn.size(); ++i) {
    for (const auto& e : plan.per_cdn[i]) {
      r.cp_load[i] += e.cp;
      auto a = last_any.find({e.video, i});
      if (a != last_any.end() && a->second > e.dispatched_at) ++r.whole_hits;
      auto p = last_peak.find({e.video, i});
      if (p != last_peak.end() && p->second > e.dispatched_at) ++r.peak_hits;
    }
    if (!topology.capacity.empty() && r.cp_load[i] > topology.capacity[i]) r.capacity_exceeded = true;
  }
  const double n = static_cast<double>(r.dispatched);
  r.r_whole = static_cast<double>(r.whole_hits) / n;
  r.r_peak = static_cast<double>(r.peak_hits) / n;
  r.accuracy = r.r_peak;
  return r;
}

void write_plan_csv(std::ostream& out, const DispatchPlan& plan) {
  out << "cdn_id,rank,video_id,cluster,cp\n";
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < plan.per_cdn.size(); ++i) {
    for (std::size_t k = 0; k < plan.per_cdn[i].size(); ++k) {
      const auto& e = plan.per_cdn[i][k];
      os.str("");
      os << e.cp;
      out << i << ',' << k << ',' << e.video << ',' << e.cluster << ',' << os.str() << '\n';
    }
  }
}

}  // namespace vod
