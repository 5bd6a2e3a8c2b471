// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vod/worldgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "vod/errors.hpp"
#include "vod/rng.hpp"

namespace vod {

void WorldConfig::validate() const {
  if (users == 0 || cdns == 0 || videos == 0 || intervals == 0) throw ConfigError("world dimensions must be positive");
  if (cdns > users) throw ConfigError("more CDNs than users");
  if (days < 2) throw ConfigError("world needs at least two days");
  if (peak_length == 0) throw ConfigError("peak window is empty");
  if (peak_start + peak_length > intervals) throw ConfigError("peak window extends past the end of the day");
  if (!(zipf >= 0.0)) throw ConfigError("zipf exponent must be nonnegative");
  if (profiles == 0) throw ConfigError("need at least one latent profile");
  if (!(peak_ratio > 0.0) || !(peak_rate >= 0.0)) throw ConfigError("peak ratio and rate must be positive");
  if (!(lifecycle_days > 0.0) || lifecycle_floor < 0.0 || lifecycle_floor > 1.0) {
    throw ConfigError("lifecycle must have positive length and floor in [0, 1]");
  }
  if (type_shift < 0.0 || type_shift >= 1.0) throw ConfigError("type_shift must lie in [0, 1)");
  if (!(daily_noise_shape > 0.0) || !(affinity_jitter > 0.0)) throw ConfigError("gamma shapes must be positive");
  if (burst_length == 0 || burst_length > intervals) throw ConfigError("burst_length must be in [1, intervals]");
  if (dispatch_budget == 0) throw ConfigError("dispatch budget must be positive");
  if (daily_uploads * (days - 1) >= videos) throw ConfigError("daily uploads leave no initial catalogue");
}

std::size_t WorldConfig::initial_videos() const { return videos - daily_uploads * (days - 1); }

std::vector<std::size_t> WorldConfig::peak_window() const {
  std::vector<std::size_t> w(peak_length);
  for (std::size_t k = 0; k < peak_length; ++k) w[k] = peak_start + k;
  return w;
}

std::size_t WorldConfig::region_of(std::size_t user) const { return user * profiles / users; }

Topology make_topology(const WorldConfig& cfg) {
  Topology t;
  t.users = cfg.users;
  t.cdns = cfg.cdns;
  t.serving.resize(cfg.users);
  for (std::size_t u = 0; u < cfg.users; ++u) t.serving[u].push_back(u * cfg.cdns / cfg.users);
  for (std::size_t i = 1; i < cfg.cdns; ++i) {
    const std::size_t first = (i * cfg.users + cfg.cdns - 1) / cfg.cdns;
    auto& s = t.serving[first];
    if (std::find(s.begin(), s.end(), i - 1) == s.end()) s.insert(s.begin(), i - 1);
  }
  t.budget.assign(cfg.cdns, cfg.dispatch_budget);
  t.capacity.assign(cfg.cdns, cfg.capacity_fraction * static_cast<double>(cfg.dispatch_budget));
  t.validate();
  return t;
}

namespace {

// Off-peak intensity follows a daily cosine with its trough at night, scaled to mean 1.
std::vector<double> offpeak_shape(const WorldConfig& cfg) {
  std::vector<double> s(cfg.intervals, 0.0);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < cfg.intervals; ++t) {
    if (t >= cfg.peak_start && t < cfg.peak_start + cfg.peak_length) continue;
    const double phase = 2.0 * std::numbers::pi * (static_cast<double>(t) + 0.5) / static_cast<double>(cfg.intervals);
    s[t] = 1.0 - 0.6 * std::cos(phase);
    sum += s[t];
    ++n;
  }
  if (n > 0) {
    for (auto& v : s) v *= static_cast<double>(n) / sum;
  }
  return s;
}

double gamma_unit_mean(double shape, Rng& rng) {
  std::gamma_distribution<double> g(shape, 1.0 / shape);
  return g(rng);
}

double poisson(double lambda, Rng& rng) {
  if (lambda <= 0.0) return 0.0;
  std::poisson_distribution<long> p(lambda);
  return static_cast<double>(p(rng));
}

}  // namespace

World generate_world(const WorldConfig& cfg) {
  cfg.validate();
  World w;
  w.config = cfg;
  w.topology = make_topology(cfg);
  const Rng root(cfg.seed);

  const std::size_t n = cfg.videos;
  w.upload_day.resize(n);
  const std::size_t initial = cfg.initial_videos();
  for (std::size_t v = 0; v < n; ++v) w.upload_day[v] = v < initial ? 0 : 1 + (v - initial) / cfg.daily_uploads;

  std::vector<std::size_t> rank(n);
  for (std::size_t v = 0; v < n; ++v) rank[v] = v;
  Rng rank_rng = root.split("rank");
  shuffle_in_place(rank, rank_rng);

  std::vector<double> drift(cfg.users);
  Rng drift_rng = root.split("activity");
  for (auto& d : drift) d = drift_rng.uniform(-cfg.activity_drift, cfg.activity_drift);
  auto activity = [&](std::size_t u, std::size_t d) {
    const double x = static_cast<double>(d) / static_cast<double>(cfg.days - 1) - 0.5;
    return std::exp(drift[u] * x);
  };

  const auto shape = offpeak_shape(cfg);
  const auto in_peak = [&](std::size_t t) { return t >= cfg.peak_start && t < cfg.peak_start + cfg.peak_length; };

  w.truth.resize(n);
  w.requests.assign(n, RequestTensor(cfg.users, cfg.days, cfg.intervals));
  const Rng video_root = root.split("video");
  for (std::size_t v = 0; v < n; ++v) {
    Rng rng = video_root.split(static_cast<std::uint64_t>(v));
    VideoTruth& truth = w.truth[v];
    truth.popularity_rank = rank[v];
    truth.profile = static_cast<std::size_t>(rng.below(cfg.profiles));
    // Alternate types down the popularity order so both carry similar mass.
    truth.primetime = rank[v] % 2 == 1;

    const double pop = std::pow(static_cast<double>(rank[v] + 1), -cfg.zipf);
    std::vector<double> affinity(cfg.users);
    double aff_sum = 0.0;
    for (std::size_t u = 0; u < cfg.users; ++u) {
      const bool home = cfg.region_of(u) == truth.profile;
      affinity[u] = (1.0 + (home ? cfg.regional_affinity : 0.0)) * gamma_unit_mean(cfg.affinity_jitter, rng);
      aff_sum += affinity[u];
    }
    for (auto& a : affinity) a *= static_cast<double>(cfg.users) / aff_sum;

    const double off_mul = truth.primetime ? 1.0 - cfg.type_shift : 1.0 + cfg.type_shift;
    const double peak_mul = truth.primetime ? 1.0 + cfg.type_shift : 1.0 - cfg.type_shift;
    std::vector<double> diurnal(cfg.intervals);
    for (std::size_t t = 0; t < cfg.intervals; ++t) {
      diurnal[t] = in_peak(t) ? cfg.peak_ratio * peak_mul : shape[t] * off_mul;
    }
    // Rates are quoted per peak interval; rescale so the top video peaks at peak_rate.
    const double unit = cfg.peak_rate / cfg.peak_ratio;

    RequestTensor& x = w.requests[v];
    for (std::size_t d = w.upload_day[v]; d < cfg.days; ++d) {
      const double age = static_cast<double>(d - w.upload_day[v]);
      const double life = cfg.lifecycle_floor + (1.0 - cfg.lifecycle_floor) * std::exp(-age / cfg.lifecycle_days);
      const double noise = gamma_unit_mean(cfg.daily_noise_shape, rng);
      for (std::size_t u = 0; u < cfg.users; ++u) {
        const double base = unit * pop * life * noise * activity(u, d) * affinity[u];
        auto s = x.series(u, d);
        for (std::size_t t = 0; t < cfg.intervals; ++t) s[t] = poisson(base * diurnal[t], rng);
      }
    }
  }

  // Bursts: a short off-peak spike on a random live video within one region.
  const Rng burst_root = root.split("burst");
  const std::size_t last_start = cfg.peak_start >= cfg.burst_length ? cfg.peak_start - cfg.burst_length : 0;
  for (std::size_t d = 0; d < cfg.days; ++d) {
    Rng rng = burst_root.split(static_cast<std::uint64_t>(d));
    const std::size_t live = std::min(n, initial + d * cfg.daily_uploads);
    for (std::size_t b = 0; b < cfg.bursts_per_day; ++b) {
      const auto v = static_cast<std::size_t>(rng.below(live));
      const auto region = static_cast<std::size_t>(rng.below(cfg.profiles));
      const auto start = static_cast<std::size_t>(rng.below(last_start + 1));
      for (std::size_t u = 0; u < cfg.users; ++u) {
        if (cfg.region_of(u) != region) continue;
        for (std::size_t t = start; t < std::min(cfg.intervals, start + cfg.burst_length); ++t) {
          w.requests[v].at(u, d, t) += poisson(cfg.burst_rate, rng);
        }
      }
    }
  }
  return w;
}

std::vector<RequestRecord> World::records() const {
  std::vector<RequestRecord> out;
  for (std::size_t d = 0; d < config.days; ++d) {
    auto day = day_records(d);
    out.insert(out.end(), day.begin(), day.end());
  }
  return out;
}

std::vector<RequestRecord> World::day_records(std::size_t day) const {
  std::vector<RequestRecord> out;
  for (std::size_t t = 0; t < config.intervals; ++t) {
    for (std::size_t v = 0; v < requests.size(); ++v) {
      for (std::size_t u = 0; u < config.users; ++u) {
        const double c = requests[v].at(u, day, t);
        if (c > 0.0) out.push_back({static_cast<VideoId>(v), u, day, t, c});
      }
    }
  }
  return out;
}

PeakRequests World::peak_requests(std::size_t day) const {
  PeakRequests out(config.users);
  for (std::size_t v = 0; v < requests.size(); ++v) {
    for (std::size_t u = 0; u < config.users; ++u) {
      double s = 0.0;
      for (auto t : config.peak_window()) s += requests[v].at(u, day, t);
      if (s > 0.0) out[u][static_cast<VideoId>(v)] = s;
    }
  }
  return out;
}

void bind_world_config(ConfigBinder& b, WorldConfig& c) {
  b.bind("users", &c.users);
  b.bind("cdns", &c.cdns);
  b.bind("videos", &c.videos);
  b.bind("days", &c.days);
  b.bind("intervals", &c.intervals);
  b.bind("peak_start", &c.peak_start);
  b.bind("peak_length", &c.peak_length);
  b.bind("daily_uploads", &c.daily_uploads);
  b.bind("zipf", &c.zipf);
  b.bind("profiles", &c.profiles);
  b.bind("regional_affinity", &c.regional_affinity);
  b.bind("affinity_jitter", &c.affinity_jitter);
  b.bind("peak_ratio", &c.peak_ratio);
  b.bind("peak_rate", &c.peak_rate);
  b.bind("lifecycle_days", &c.lifecycle_days);
  b.bind("lifecycle_floor", &c.lifecycle_floor);
  b.bind("type_shift", &c.type_shift);
  b.bind("daily_noise_shape", &c.daily_noise_shape);
  b.bind("activity_drift", &c.activity_drift);
  b.bind("bursts_per_day", &c.bursts_per_day);
  b.bind("burst_length", &c.burst_length);
  b.bind("burst_rate", &c.burst_rate);
  b.bind("dispatch_budget", &c.dispatch_budget);
  b.bind("capacity_fraction", &c.capacity_fraction);
  b.bind("seed", &c.seed);
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw MissingArtifact("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw MissingArtifact("missing world file " + p.string());
  return in;
}

// Splits a CSV line of unsigned integers; the header line is checked separately.
std::vector<std::size_t> csv_fields(const std::string& line, std::size_t expected, const std::string& file) {
  std::vector<std::size_t> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoull(field, &pos));
      if (pos != field.size() && !(pos + 1 == field.size() && field.back() == '\r')) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw ConfigError(file + ": bad field '" + field + "'");
    }
  }
  if (out.size() != expected) throw ConfigError(file + ": expected " + std::to_string(expected) + " fields");
  return out;
}

void expect_header(std::istream& in, const std::string& header, const std::string& file) {
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw ConfigError(file + ": expected header '" + header + "'");
}

}  // namespace

void write_world(const World& world, const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw MissingArtifact("output directory does not exist: " + dir.string());
  {
    auto out = open_out(dir / "requests.csv");
    out << "video_id,user_id,day,interval,count\n";
    for (const auto& r : world.records()) {
      out << r.video << ',' << r.user << ',' << r.day << ',' << r.interval << ','
          << static_cast<unsigned long long>(r.count) << '\n';
    }
  }
  {
    auto out = open_out(dir / "uploads.csv");
    out << "video_id,upload_day\n";
    for (std::size_t v = 0; v < world.upload_day.size(); ++v) out << v << ',' << world.upload_day[v] << '\n';
  }
  {
    auto out = open_out(dir / "topology.csv");
    out << "user_id,cdn_id\n";
    for (std::size_t u = 0; u < world.topology.users; ++u) {
      for (auto i : world.topology.serving[u]) out << u << ',' << i << '\n';
    }
  }
  {
    auto out = open_out(dir / "world.cfg");
    WorldConfig copy = world.config;
    ConfigBinder b;
    bind_world_config(b, copy);
    write_key_values(out, b.entries());
  }
}

World read_world(const std::filesystem::path& dir) {
  World w;
  {
    ConfigBinder b;
    bind_world_config(b, w.config);
    const auto cfg_path = dir / "world.cfg";
    if (!std::filesystem::exists(cfg_path)) throw MissingArtifact("missing world file " + cfg_path.string());
    b.apply(load_key_values(cfg_path));
    w.config.validate();
  }
  const WorldConfig& cfg = w.config;
  std::string line;
  {
    auto in = open_in(dir / "uploads.csv");
    expect_header(in, "video_id,upload_day", "uploads.csv");
    w.upload_day.assign(cfg.videos, 0);
    std::size_t seen = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = csv_fields(line, 2, "uploads.csv");
      if (f[0] >= cfg.videos || f[1] >= cfg.days) throw ConfigError("uploads.csv: value out of range");
      w.upload_day[f[0]] = f[1];
      ++seen;
    }
    if (seen != cfg.videos) throw ConfigError("uploads.csv must list every video once");
  }
  {
    auto in = open_in(dir / "topology.csv");
    expect_header(in, "user_id,cdn_id", "topology.csv");
    w.topology.users = cfg.users;
    w.topology.cdns = cfg.cdns;
    w.topology.serving.assign(cfg.users, {});
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = csv_fields(line, 2, "topology.csv");
      if (f[0] >= cfg.users || f[1] >= cfg.cdns) throw ConfigError("topology.csv: value out of range");
      w.topology.serving[f[0]].push_back(f[1]);
    }
    for (auto& s : w.topology.serving) std::sort(s.begin(), s.end());
    w.topology.budget.assign(cfg.cdns, cfg.dispatch_budget);
    w.topology.capacity.assign(cfg.cdns, cfg.capacity_fraction * static_cast<double>(cfg.dispatch_budget));
    w.topology.validate();
  }
  {
    auto in = open_in(dir / "requests.csv");
    expect_header(in, "video_id,user_id,day,interval,count", "requests.csv");
    w.requests.assign(cfg.videos, RequestTensor(cfg.users, cfg.days, cfg.intervals));
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = csv_fields(line, 5, "requests.csv");
      if (f[0] >= cfg.videos || f[1] >= cfg.users || f[2] >= cfg.days || f[3] >= cfg.intervals) {
        throw ConfigError("requests.csv: value out of range");
      }
      w.requests[f[0]].at(f[1], f[2], f[3]) += static_cast<double>(f[4]);
    }
  }
  return w;
}

}  // namespace vod
