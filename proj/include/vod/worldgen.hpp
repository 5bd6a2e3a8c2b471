// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vod/config.hpp"
#include "vod/dispatcher.hpp"
#include "vod/request_tensor.hpp"

namespace vod {

/// Parameters of the synthetic request workload.
///
/// Expected requests of video v from user u in interval t of day d:
///   peak_rate * pop(v) * life(v, d) * activity(u, d) * affinity(v, u) * diurnal(v, t) * noise(v, d)
/// plus short off-peak bursts on random videos, drawn as Poisson counts.
struct WorldConfig {
  std::size_t users = 8;
  std::size_t cdns = 3;
  std::size_t videos = 500;
  std::size_t days = 21;  // the last day is held out for evaluation
  std::size_t intervals = 24;
  std::size_t peak_start = 16;
  std::size_t peak_length = 6;
  std::size_t daily_uploads = 16;  // videos uploaded on each day after day 0
  double zipf = 1.0;
  std::size_t profiles = 4;         // latent regional preference profiles
  double regional_affinity = 6.0;   // extra weight a profile puts on its own region
  double affinity_jitter = 8.0;     // gamma shape of per-(video, user) affinity noise
  double peak_ratio = 7.0;          // peak : off-peak mean intensity
  double peak_rate = 3.0;           // top fresh video, one user, one peak interval
  double lifecycle_days = 1.0;
  double lifecycle_floor = 0.05;
  double type_shift = 0.5;          // daytime/primetime reshaping of the diurnal curve
  double daily_noise_shape = 4.0;   // gamma shape of the per-(video, day) multiplier
  double activity_drift = 1.5;      // max |log| change of a user's activity over the run
  std::size_t bursts_per_day = 40;
  std::size_t burst_length = 3;
  double burst_rate = 2.5;
  std::size_t dispatch_budget = 20;
  double capacity_fraction = 1.0;  // CDN capacity as a fraction of its budget
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t initial_videos() const;
  std::vector<std::size_t> peak_window() const;
  std::size_t region_of(std::size_t user) const;
};

/// Contiguous user blocks per CDN; the first user of every block after the
/// first is also served by the previous CDN.
Topology make_topology(const WorldConfig& cfg);

struct VideoTruth {
  std::size_t popularity_rank = 0;  // 0 is most popular
  std::size_t profile = 0;
  bool primetime = false;
};

struct World {
  WorldConfig config;
  Topology topology;
  std::vector<std::size_t> upload_day;   // per video id
  std::vector<RequestTensor> requests;   // per video id, [users][days][intervals]
  std::vector<VideoTruth> truth;         // empty when loaded from disk

  std::size_t video_count() const { return requests.size(); }
  std::size_t eval_day() const { return config.days - 1; }
  // Every positive count in (day, interval, video, user) order.
  std::vector<RequestRecord> records() const;
  std::vector<RequestRecord> day_records(std::size_t day) const;
  // Requests per user inside the peak window of `day`.
  PeakRequests peak_requests(std::size_t day) const;
};

World generate_world(const WorldConfig& cfg);

/// requests.csv, uploads.csv, topology.csv and world.cfg under `dir`.
void write_world(const World& world, const std::filesystem::path& dir);
World read_world(const std::filesystem::path& dir);

void bind_world_config(ConfigBinder& binder, WorldConfig& cfg);

}  // namespace vod
