// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vod/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "vod/errors.hpp"

namespace vod {

void TrainConfig::validate() const {
  temporal.validate();
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (fetch_period == 0) throw ConfigError("fetch_period must be at least 1");
  for (double r : {temporal_rate, policy_rate, cluster_rate}) {
    if (!(r > 0.0)) throw ConfigError("learning rates must be positive");
  }
  for (double d : {temporal_decay, policy_decay, cluster_decay}) {
    if (!(d > 0.0 && d <= 1.0)) throw ConfigError("learning-rate decay must lie in (0, 1]");
  }
  if (cluster.omega < 0.0) throw ConfigError("omega must be nonnegative");
  if (cluster.divisions < 2) throw ConfigError("divisions must be at least 2");
  if (cluster.budget < 4) throw ConfigError("cluster budget must be at least 4");
  if (mode != "interleaved" && mode != "async") throw ConfigError("mode must be async or interleaved");
  if (!(timeout_seconds > 0.0)) throw ConfigError("timeout_seconds must be positive");
}

void bind_train_config(ConfigBinder& b, TrainConfig& c) {
  // A world binder already owns "intervals"; the caller copies it across.
  if (!b.knows("intervals")) b.bind("intervals", &c.temporal.intervals);
  b.bind("peak_intervals", &c.temporal.peak_intervals);
  b.bind("input_days", &c.temporal.days);
  b.bind("conv_width", &c.temporal.conv_width);
  b.bind("row_rows", &c.temporal.row_rows);
  b.bind("row_cols", &c.temporal.row_cols);
  b.bind("col_rows", &c.temporal.col_rows);
  b.bind("col_cols", &c.temporal.col_cols);
  b.bind("tile_rows_count", &c.temporal.tile_rows_count);
  b.bind("tile_rows", &c.temporal.tile_rows);
  b.bind("tile_cols_count", &c.temporal.tile_cols_count);
  b.bind("tile_cols", &c.temporal.tile_cols);
  b.bind("hidden", &c.temporal.hidden);
  b.bind("encoder_hidden", &c.cluster.hidden);
  b.bind("omega", &c.cluster.omega);
  b.bind("divisions", &c.cluster.divisions);
  b.bind("cluster_budget", &c.cluster.budget);
  b.bind("policy_hidden", &c.policy_hidden);
  b.bind("batch_size", &c.batch_size);
  b.bind("policy_iterations", &c.policy_iterations);
  b.bind("cluster_iterations", &c.cluster_iterations);
  b.bind("fetch_period", &c.fetch_period);
  b.bind("warmup", &c.warmup);
  b.bind("temporal_rate", &c.temporal_rate);
  b.bind("temporal_decay", &c.temporal_decay);
  b.bind("policy_rate", &c.policy_rate);
  b.bind("policy_decay", &c.policy_decay);
  b.bind("cluster_rate", &c.cluster_rate);
  b.bind("cluster_decay", &c.cluster_decay);
  b.bind("train_seed", &c.seed);
  b.bind("shuffle", &c.shuffle);
  b.bind("mode", &c.mode);
  b.bind("timeout_seconds", &c.timeout_seconds);
  b.bind("divergence_limit", &c.divergence_limit);
  b.bind("corpus_peak_totals", &c.corpus_peak_totals);
  b.bind("whole_day_target", &c.whole_day_target);
}

RequestTensor ReplayDataset::window(const Sample& s) const {
  return videos[s.video].day_range(s.start_day, window_days);
}

ReplayDataset build_dataset(std::span<const RequestTensor> videos, std::span<const std::size_t> upload_day,
                            std::size_t input_days, std::size_t last_target_day) {
  if (videos.size() != upload_day.size()) throw ShapeError("upload days must cover every video");
  if (input_days == 0) throw ConfigError("input_days must be positive");
  ReplayDataset ds;
  ds.videos = videos;
  ds.window_days = input_days + 1;
  for (std::size_t start = 0; start + input_days <= last_target_day; ++start) {
    const std::size_t target = start + input_days;
    for (std::size_t v = 0; v < videos.size(); ++v) {
      if (videos[v].days() <= target) throw ShapeError("request tensor does not reach the target day");
      if (upload_day[v] >= target) continue;
      ds.samples.push_back({static_cast<VideoId>(v), start, static_cast<double>(upload_day[v])});
    }
  }
  return ds;
}

ReplayDataset shuffle_dataset(const ReplayDataset& ds, std::uint64_t seed) {
  if (ds.samples.empty()) throw ConfigError("cannot shuffle an empty dataset");
  ReplayDataset out = ds;
  Rng rng(seed);
  shuffle_in_place(out.samples, rng);
  return out;
}

BatchSampler::BatchSampler(const ReplayDataset& ds, std::size_t batch_size, bool shuffle, std::uint64_t seed,
                           std::size_t switch_after)
    : ds_(&ds), batch_(batch_size), shuffle_(shuffle), rng_(seed), switch_after_(switch_after) {
  if (ds.samples.empty()) throw ConfigError("training dataset is empty");
  if (!shuffle_ && ds.samples.size() < 2) throw ConfigError("two-half schedule needs at least two samples");
  refill();
}

void BatchSampler::refill() {
  const std::size_t n = ds_->samples.size();
  order_.clear();
  if (shuffle_) {
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    Rng epoch_rng = rng_.split(static_cast<std::uint64_t>(epoch_));
    shuffle_in_place(order_, epoch_rng);
  } else {
    const std::size_t half = n / 2;
    const std::size_t lo = second_half_ ? half : 0;
    const std::size_t hi = second_half_ ? n : half;
    for (std::size_t i = lo; i < hi; ++i) order_.push_back(i);
  }
  pos_ = 0;
  ++epoch_;
}

std::vector<Sample> BatchSampler::next() {
  if (!shuffle_ && !second_half_ && batches_ >= switch_after_) {
    second_half_ = true;
    refill();
  }
  std::vector<Sample> out;
  out.reserve(batch_);
  while (out.size() < batch_) {
    if (pos_ == order_.size()) refill();
    out.push_back(ds_->samples[order_[pos_++]]);
  }
  ++batches_;
  return out;
}

RequestTensor corpus_peak_totals(std::span<const RequestTensor> videos, std::size_t last_day_exclusive,
                                 std::size_t input_days) {
  if (videos.empty()) throw ConfigError("no videos to total");
  const auto& first = videos.front();
  RequestTensor out(first.users(), input_days, first.intervals());
  std::vector<double> acc(first.users() * first.intervals(), 0.0);
  for (const auto& x : videos) {
    if (!x.same_shape(first)) throw ShapeError("videos differ in request tensor shape");
    for (std::size_t u = 0; u < x.users(); ++u) {
      for (std::size_t d = 0; d < std::min(last_day_exclusive, x.days()); ++d) {
        const auto s = x.series(u, d);
        for (std::size_t t = 0; t < s.size(); ++t) acc[u * x.intervals() + t] += s[t];
      }
    }
  }
  for (std::size_t u = 0; u < out.users(); ++u) {
    for (std::size_t d = 0; d < input_days; ++d) {
      auto s = out.series(u, d);
      std::copy_n(acc.begin() + static_cast<std::ptrdiff_t>(u * out.intervals()), out.intervals(), s.begin());
    }
  }
  return out;
}

namespace {

constexpr const char* kPartitionName = "cluster.partition";
constexpr const char* kTotalsName = "cluster.peak_totals";

Autoencoder make_autoencoder(const TrainConfig& cfg, std::size_t users) {
  return Autoencoder::make(users * cfg.temporal.hidden, cfg.cluster.hidden);
}

void replace_temporal(ParamSet& dst, const ParamSet& temporal) {
  for (const auto& [name, t] : temporal) {
    if (name.rfind("temporal.", 0) != 0) continue;
    if (dst.contains(name)) {
      dst.mutable_at(name) = t;
    } else {
      dst.insert(name, t);
    }
  }
}

void guard(double loss, double limit, std::string_view who, std::uint64_t iteration) {
  if (!std::isfinite(loss) || loss > limit) {
    std::ostringstream os;
    os << who << " loss diverged at iteration " << iteration << ": " << loss;
    throw NumericError(os.str());
  }
}

}  // namespace

ParamSet init_clustering_params(const TrainConfig& cfg, std::size_t users, const ParamSet& temporal,
                                const RequestTensor& peak_totals, Rng& rng) {
  ParamSet p;
  init_autoencoder(p, make_autoencoder(cfg, users), rng);
  p.insert(kPartitionName, BlockPartition::build(cfg.cluster.divisions, cfg.cluster.budget).to_tensor());
  p.insert(kTotalsName, peak_totals.as_tensor());
  replace_temporal(p, temporal);
  p.set_version(1);
  return p;
}

Tensor clustering_embedding(const RequestTensor& inputs, const TemporalConfig& cfg, const ParamSet& params,
                            const RequestTensor& peak_totals) {
  const RequestTensor x = inputs.day_range(0, cfg.days);
  return temporal_forward(x, cfg, params, peak_totals, false).embedding;
}

ClusterPredictor::ClusterPredictor(const ParamSet& clustering, const TrainConfig& cfg, std::size_t users)
    : params_(&clustering),
      cfg_(&cfg),
      ae_(make_autoencoder(cfg, users)),
      partition_(BlockPartition::from_tensor(clustering.at(kPartitionName))),
      totals_(RequestTensor::from_tensor(clustering.at(kTotalsName))),
      random_(clustering.version() <= 1) {}

ClusterPredictor::Result ClusterPredictor::predict(VideoId id, const RequestTensor& inputs) const {
  Result r;
  if (random_) {
    Rng rng = Rng(cfg_->seed).split("initial-assignment").split(static_cast<std::uint64_t>(id));
    r.cluster = static_cast<std::size_t>(rng.below(std::min(cfg_->cluster.budget, partition_.cluster_count())));
    r.code = partition_.center(r.cluster);
    return r;
  }
  const Tensor emb = clustering_embedding(inputs, cfg_->temporal, *params_, totals_);
  r.code = encode(emb, *params_, ae_);
  r.cluster = partition_.assign_code(r.code);
  return r;
}

TrainState init_models(const TrainConfig& cfg, std::size_t users, const RequestTensor& corpus_totals) {
  cfg.validate();
  Rng root(cfg.seed);
  Rng trng = root.split("temporal");
  Rng prng = root.split("policy");
  Rng crng = root.split("clustering");
  TrainState s;
  s.temporal = init_temporal_params(cfg.temporal, trng);
  init_mlp(s.policy, policy_head_spec(users, cfg.temporal.hidden, cfg.policy_hidden), prng);
  s.policy.set_version(1);
  s.clustering = init_clustering_params(cfg, users, s.temporal, corpus_totals, crng);
  return s;
}

namespace {

OptimizerState policy_optimizer(const TrainConfig& cfg, std::uint64_t step) {
  OptimizerState opt(cfg.policy_rate, cfg.policy_decay);
  opt.set_layer_rate("temporal.", cfg.temporal_rate, cfg.temporal_decay);
  opt.set_layer_rate("policy.", cfg.policy_rate, cfg.policy_decay);
  opt.set_step(step);
  return opt;
}

ParamSet merged(const ParamSet& a, const ParamSet& b) {
  ParamSet out = a;
  out.merge(b);
  out.set_version(std::max(a.version(), b.version()));
  return out;
}

}  // namespace

std::vector<std::size_t> target_window(const TrainConfig& cfg, const RequestTensor& corpus_totals) {
  const std::size_t t = cfg.temporal.intervals;
  std::vector<std::size_t> w;
  if (cfg.whole_day_target) {
    w.resize(t);
    std::iota(w.begin(), w.end(), 0);
    return w;
  }
  std::vector<double> load(t, 0.0);
  for (std::size_t u = 0; u < corpus_totals.users(); ++u) {
    const auto s = corpus_totals.series(u, 0);
    for (std::size_t i = 0; i < t; ++i) load[i] += s[i];
  }
  return top_k_pool(load, load, cfg.temporal.peak_intervals).indices;
}

PolicyTrainer::PolicyTrainer(const TrainConfig& cfg, const ReplayDataset& ds, std::size_t users, ParamSet params,
                             const RequestTensor& corpus_totals)
    : cfg_(&cfg),
      ds_(&ds),
      users_(users),
      head_(policy_head_spec(users, cfg.temporal.hidden, cfg.policy_hidden)),
      params_(std::move(params)),
      opt_(policy_optimizer(cfg, params_.version() - 1)),
      sampler_(ds, cfg.batch_size, cfg.shuffle, Rng(cfg.seed).split("policy-batches").split(params_.version()).seed(),
               cfg.policy_iterations / 2),
      corpus_totals_(&corpus_totals),
      target_window_(target_window(cfg, corpus_totals)) {}

StepResult PolicyTrainer::step(const ParamSet& clustering) {
  const ClusterPredictor predictor(clustering, *cfg_, users_);
  const TemporalConfig& tc = cfg_->temporal;
  const std::size_t target_day = tc.days;

  // Redraw when every cluster of the batch lacks a target.
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto batch = sampler_.next();
    std::vector<RequestTensor> windows;
    windows.reserve(batch.size());
    for (const auto& s : batch) windows.push_back(ds_->window(s));

    Assignment assignment;
    std::vector<VideoRef> refs;
    RequestTensor totals(users_, tc.days, tc.intervals);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const RequestTensor inputs = windows[i].day_range(0, tc.days);
      assignment[i] = predictor.predict(batch[i].video, inputs).cluster;
      refs.push_back({static_cast<VideoId>(i), &windows[i]});
      totals += inputs;
    }
    const RequestTensor& peak_totals = cfg_->corpus_peak_totals ? *corpus_totals_ : totals;
    const ClusterRequests xa = accumulate_by_cluster(refs, assignment);

    std::map<std::size_t, std::vector<double>> targets;
    for (const auto& [c, x] : xa) {
      auto r = make_policy_target(x, target_day, target_window_);
      if (r) targets.emplace(c, std::move(*r));
    }
    if (targets.empty()) continue;

    std::map<std::size_t, PolicyForward> forwards;
    std::map<std::size_t, std::vector<double>> up;
    for (const auto& [c, r] : targets) {
      auto f = policy_forward(xa.at(c), tc, params_, head_, peak_totals);
      up.emplace(c, f.up());
      forwards.emplace(c, std::move(f));
    }
    const PolicyLoss loss = policy_loss(up, targets);
    const double scale = 1.0 / static_cast<double>(loss.scored);
    Gradients grads;
    for (const auto& [c, g] : loss.grads) {
      const PolicyGradients pg = policy_backward(forwards.at(c), tc, params_, head_, g);
      accumulate(grads, pg.params, scale);
    }
    const double mean_loss = loss.loss * scale;
    guard(mean_loss, cfg_->divergence_limit, "policy", opt_.step() + 1);
    params_ = mbgd_step(std::move(params_), grads, opt_);
    return {mean_loss, loss.scored};
  }
  throw std::invalid_argument("empty training signal");
}

ClusterTrainer::ClusterTrainer(const TrainConfig& cfg, const ReplayDataset& ds, std::size_t users, ParamSet params)
    : cfg_(&cfg),
      ds_(&ds),
      ae_(make_autoencoder(cfg, users)),
      partition_(BlockPartition::from_tensor(params.at(kPartitionName))),
      params_(std::move(params)),
      opt_(cfg.cluster_rate, cfg.cluster_decay),
      sampler_(ds, cfg.batch_size, true,
               Rng(cfg.seed).split("cluster-batches").split(params_.version()).seed(), 0) {
  opt_.set_step(params_.version() - 1);
}

void ClusterTrainer::fetch(const ParamSet& temporal) { replace_temporal(params_, temporal); }

StepResult ClusterTrainer::step() {
  const auto batch = sampler_.next();
  const RequestTensor totals = RequestTensor::from_tensor(params_.at(kTotalsName));
  const double scale = 1.0 / static_cast<double>(batch.size());
  Gradients grads;
  double loss = 0.0;
  for (const auto& s : batch) {
    const RequestTensor inputs = ds_->window(s).day_range(0, cfg_->temporal.days);
    const Tensor emb = clustering_embedding(inputs, cfg_->temporal, params_, totals);
    const ClusterForward f = cluster_forward(emb, params_, ae_, partition_, cfg_->cluster.omega);
    const ClusterGradients g = cluster_backward(f, params_, ae_, partition_, cfg_->cluster.omega, scale);
    accumulate(grads, g.params);
    loss += f.loss;
  }
  loss *= scale;
  guard(loss, cfg_->divergence_limit, "clustering", opt_.step() + 1);
  params_ = mbgd_step(std::move(params_), grads, opt_);
  return {loss, batch.size()};
}

namespace {

void write_trace(std::ostream& out, std::span<const TraceRow> rows, bool policy) {
  out << (policy ? "iteration,loss,temporal_version,policy_version,cluster_version\n"
                 : "iteration,loss,cluster_version,temporal_version\n");
  for (const auto& r : rows) {
    out << r.iteration << ',' << format_double(r.loss) << ',';
    if (policy) {
      out << r.temporal_version << ',' << r.policy_version << ',' << r.cluster_version << '\n';
    } else {
      out << r.cluster_version << ',' << r.temporal_version << '\n';
    }
  }
}

// Shared state of one training run: both trainers, the store and the traces.
struct Run {
  const TrainConfig& cfg;
  ModelStore store;
  PolicyTrainer policy;
  ClusterTrainer cluster;
  TrainResult result;
  std::uint64_t start_temporal = 0;
  std::uint64_t fetched_temporal = 0;

  Run(const TrainConfig& c, const ReplayDataset& ds, std::size_t users, const RequestTensor& totals,
      const TrainState& start, bool record)
      : cfg(c),
        store(record),
        policy(c, ds, users, merged(start.temporal, start.policy), totals),
        cluster(c, ds, users, start.clustering) {
    if (start.temporal.version() != start.policy.version()) {
      throw ConfigError("temporal and policy checkpoints come from different iterations");
    }
    start_temporal = start.temporal.version();
    store.publish_many({{Family::kTemporal, start.temporal}, {Family::kPolicy, start.policy}}, "init");
    store.publish(Family::kClustering, start.clustering, "init");
  }

  void policy_step(const Snapshot& clustering) {
    const StepResult r = policy.step(clustering.params);
    const ParamSet t = policy.temporal();
    ParamSet p = policy.policy();
    p.set_version(t.version());
    store.publish_many({{Family::kTemporal, t}, {Family::kPolicy, std::move(p)}}, "policy");
    result.policy_trace.push_back({t.version() - 1, r.loss, t.version(), t.version(), clustering.version});
  }

  void cluster_fetch(const Snapshot& temporal) {
    cluster.fetch(temporal.params);
    fetched_temporal = temporal.version;
  }

  void cluster_step() {
    const StepResult r = cluster.step();
    store.publish(Family::kClustering, cluster.params(), "cluster");
    const auto v = cluster.params().version();
    result.cluster_trace.push_back({v - 1, r.loss, fetched_temporal, 0, v});
  }

  TrainResult finish() {
    result.models.temporal = policy.temporal();
    result.models.policy = policy.policy();
    result.models.policy.set_version(result.models.temporal.version());
    result.models.clustering = cluster.params();
    result.events = store.events();
    return std::move(result);
  }
};

std::size_t effective_warmup(const TrainConfig& cfg) { return std::min(cfg.warmup, cfg.policy_iterations); }

TrainResult run_interleaved(Run& run) {
  const TrainConfig& cfg = run.cfg;
  const std::size_t p_total = cfg.policy_iterations;
  const std::size_t c_total = cfg.cluster_iterations;
  const std::size_t warm = effective_warmup(cfg);
  std::size_t c_done = 0;
  auto cluster_until = [&](std::size_t target) {
    for (; c_done < target; ++c_done) {
      if (c_done % cfg.fetch_period == 0) run.cluster_fetch(*run.store.latest(Family::kTemporal, "cluster"));
      run.cluster_step();
    }
  };
  for (std::size_t k = 0; k < p_total; ++k) {
    if (k >= warm) cluster_until((k - warm) * c_total / (p_total - warm));
    run.policy_step(*run.store.latest(Family::kClustering, "policy"));
  }
  cluster_until(c_total);
  return run.finish();
}

TrainResult run_async(Run& run) {
  const TrainConfig& cfg = run.cfg;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(static_cast<long long>(cfg.timeout_seconds * 1000.0));
  std::atomic<bool> abort{false};
  std::exception_ptr errors[2];
  auto fail = [&](int who) {
    errors[who] = std::current_exception();
    abort = true;
    run.store.notify_all();
  };

  std::thread policy_thread([&] {
    try {
      for (std::size_t k = 0; k < cfg.policy_iterations && !abort; ++k) {
        if (std::chrono::steady_clock::now() > deadline) throw TimeoutError("policy trainer exceeded the run timeout");
        const SnapshotPtr snap = run.store.latest(Family::kClustering, "policy");
        run.policy_step(*snap);
      }
    } catch (...) {
      fail(0);
    }
  });
  std::thread cluster_thread([&] {
    try {
      const std::uint64_t ready = run.start_temporal + effective_warmup(cfg);
      while (!abort) {
        if (std::chrono::steady_clock::now() > deadline) {
          throw TimeoutError("clustering trainer waited past the run timeout for temporal version " +
                             std::to_string(ready));
        }
        try {
          run.store.wait_for_version(Family::kTemporal, ready, std::chrono::milliseconds(100));
          break;
        } catch (const TimeoutError&) {
        }
      }
      for (std::size_t j = 0; j < cfg.cluster_iterations && !abort; ++j) {
        if (std::chrono::steady_clock::now() > deadline) {
          throw TimeoutError("clustering trainer exceeded the run timeout");
        }
        if (j % cfg.fetch_period == 0) run.cluster_fetch(*run.store.latest(Family::kTemporal, "cluster"));
        run.cluster_step();
      }
    } catch (...) {
      fail(1);
    }
  });
  policy_thread.join();
  cluster_thread.join();
  for (auto& e : errors) {
    if (!e) continue;
    try {
      std::rethrow_exception(e);
    } catch (const TimeoutError& t) {
      std::ostringstream os;
      os << t.what() << " (temporal v" << run.store.version(Family::kTemporal) << ", policy v"
         << run.store.version(Family::kPolicy) << ", clustering v" << run.store.version(Family::kClustering) << ")";
      throw TimeoutError(os.str());
    }
  }
  return run.finish();
}

}  // namespace

void write_policy_trace(std::ostream& out, std::span<const TraceRow> rows) { write_trace(out, rows, true); }
void write_cluster_trace(std::ostream& out, std::span<const TraceRow> rows) { write_trace(out, rows, false); }

TrainResult run_training(const TrainConfig& cfg, const ReplayDataset& ds, std::size_t users,
                         const RequestTensor& corpus_totals, const TrainState& start) {
  cfg.validate();
  const bool async = cfg.mode == "async";
  Run run(cfg, ds, users, corpus_totals, start, async);
  return async ? run_async(run) : run_interleaved(run);
}

TrainResult replay_training(const TrainConfig& cfg, const ReplayDataset& ds, std::size_t users,
                            const RequestTensor& corpus_totals, const TrainState& start,
                            std::span<const StoreEvent> events) {
  cfg.validate();
  Run run(cfg, ds, users, corpus_totals, start, true);
  SnapshotPtr pending;
  auto check = [](std::uint64_t got, const StoreEvent& e) {
    if (got != e.version) {
      throw std::logic_error("replay diverged: " + std::string(family_name(e.family)) + " version " +
                             std::to_string(got) + ", log says " + std::to_string(e.version));
    }
  };
  for (const auto& e : events) {
    using Kind = StoreEvent::Kind;
    if (e.actor == "init") continue;
    if (e.actor == "policy" && e.kind == Kind::kRead && e.family == Family::kClustering) {
      pending = run.store.latest(Family::kClustering, "policy");
      check(pending->version, e);
    } else if (e.actor == "policy" && e.kind == Kind::kPublish && e.family == Family::kTemporal) {
      if (!pending) throw std::logic_error("replay: policy publish without a preceding read");
      run.policy_step(*pending);
      pending.reset();
      check(run.store.version(Family::kTemporal), e);
    } else if (e.actor == "cluster" && e.kind == Kind::kRead && e.family == Family::kTemporal) {
      const SnapshotPtr t = run.store.latest(Family::kTemporal, "cluster");
      check(t->version, e);
      run.cluster_fetch(*t);
    } else if (e.actor == "cluster" && e.kind == Kind::kPublish && e.family == Family::kClustering) {
      run.cluster_step();
      check(run.store.version(Family::kClustering), e);
    }
  }
  return run.finish();
}

}  // namespace vod
