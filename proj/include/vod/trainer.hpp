// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vod/cluster.hpp"
#include "vod/config.hpp"
#include "vod/numerics.hpp"
#include "vod/policy.hpp"
#include "vod/store.hpp"
#include "vod/temporal.hpp"

namespace vod {

struct TrainConfig {
  TemporalConfig temporal;
  ClusterConfig cluster;
  std::vector<std::size_t> policy_hidden;  // empty: one sigmoid layer
  std::size_t batch_size = 128;
  std::size_t policy_iterations = 5000;
  std::size_t cluster_iterations = 10000;
  std::size_t fetch_period = 200;
  std::size_t warmup = 200;  // policy iterations before the clustering side starts
  double temporal_rate = 0.05;
  double temporal_decay = 0.9999;
  double policy_rate = 0.5;
  double policy_decay = 0.9999;
  double cluster_rate = 0.05;
  double cluster_decay = 0.99995;
  std::size_t seed = 1;
  bool shuffle = true;  // false: chronological order, first half then second half
  std::string mode = "interleaved";
  double timeout_seconds = 1800.0;
  double divergence_limit = 1e6;
  bool corpus_peak_totals = false;  // policy side picks peaks from corpus totals instead of the batch
  bool whole_day_target = false;

  void validate() const;
};

void bind_train_config(ConfigBinder& binder, TrainConfig& cfg);

/// One training window: days [start_day, start_day + D] of a video.
struct Sample {
  VideoId video = 0;
  std::size_t start_day = 0;
  double upload_time = 0.0;
};

/// Samples in chronological order plus the per-video tensors they index.
struct ReplayDataset {
  std::vector<Sample> samples;
  std::span<const RequestTensor> videos;
  std::size_t window_days = 0;  // D + 1

  RequestTensor window(const Sample& s) const;
  std::size_t size() const { return samples.size(); }
};

/// Every (video, start) whose target day start + D is at most `last_target_day`
/// and whose video was uploaded before the target day.
ReplayDataset build_dataset(std::span<const RequestTensor> videos, std::span<const std::size_t> upload_day,
                            std::size_t input_days, std::size_t last_target_day);

/// Seeded Fisher-Yates permutation of the samples; throws ConfigError when empty.
ReplayDataset shuffle_dataset(const ReplayDataset& ds, std::uint64_t seed);

/// Batches drawn cyclically from a dataset. With shuffling every epoch is a
/// fresh seeded permutation; without it the chronological first half is
/// cycled for `switch_after` batches and the second half afterwards.
class BatchSampler {
 public:
  BatchSampler(const ReplayDataset& ds, std::size_t batch_size, bool shuffle, std::uint64_t seed,
               std::size_t switch_after);
  std::vector<Sample> next();

 private:
  void refill();

  const ReplayDataset* ds_;
  std::size_t batch_;
  bool shuffle_;
  Rng rng_;
  std::size_t switch_after_;
  std::size_t batches_ = 0;
  std::size_t epoch_ = 0;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  bool second_half_ = false;
};

/// Per (user, interval) request totals over a set of videos and days, laid out
/// as a [users][days][intervals] tensor with every day equal.
RequestTensor corpus_peak_totals(std::span<const RequestTensor> videos, std::size_t last_day_exclusive,
                                 std::size_t input_days);

/// Builds the initial clustering parameter set: autoencoder, partition,
/// frozen peak totals and a copy of the temporal parameters.
ParamSet init_clustering_params(const TrainConfig& cfg, std::size_t users, const ParamSet& temporal,
                                const RequestTensor& peak_totals, Rng& rng);

/// Clustering predictor: assigns videos from a clustering snapshot alone.
/// Until the clustering side has trained (version 1) assignments are random,
/// seeded per video id and uniform over the cluster budget.
class ClusterPredictor {
 public:
  ClusterPredictor(const ParamSet& clustering, const TrainConfig& cfg, std::size_t users);

  struct Result {
    std::size_t cluster = 0;
    std::array<double, 2> code{};
  };
  // `inputs` holds D days of requests.
  Result predict(VideoId id, const RequestTensor& inputs) const;
  const BlockPartition& partition() const { return partition_; }
  bool random() const { return random_; }

 private:
  const ParamSet* params_;
  const TrainConfig* cfg_;
  Autoencoder ae_;
  BlockPartition partition_;
  RequestTensor totals_;
  bool random_;
};

/// Normalized D-day input for the clustering path.
Tensor clustering_embedding(const RequestTensor& inputs, const TemporalConfig& cfg, const ParamSet& params,
                            const RequestTensor& peak_totals);

struct StepResult {
  double loss = 0.0;
  std::size_t scored = 0;
};

/// Intervals scored by the policy target: the K busiest intervals of the
/// corpus load summed over users, or the whole day when configured.
std::vector<std::size_t> target_window(const TrainConfig& cfg, const RequestTensor& corpus_totals);

/// Owns the temporal and policy parameters.
class PolicyTrainer {
 public:
  PolicyTrainer(const TrainConfig& cfg, const ReplayDataset& ds, std::size_t users, ParamSet params,
                const RequestTensor& corpus_totals);

  StepResult step(const ParamSet& clustering);
  const ParamSet& params() const { return params_; }
  ParamSet temporal() const { return params_.subset("temporal."); }
  ParamSet policy() const { return params_.subset("policy."); }
  const MlpSpec& head() const { return head_; }

 private:
  const TrainConfig* cfg_;
  const ReplayDataset* ds_;
  std::size_t users_;
  MlpSpec head_;
  ParamSet params_;
  OptimizerState opt_;
  BatchSampler sampler_;
  const RequestTensor* corpus_totals_;
  std::vector<std::size_t> target_window_;
};

/// Owns the autoencoder; reads temporal parameters only through fetch().
class ClusterTrainer {
 public:
  ClusterTrainer(const TrainConfig& cfg, const ReplayDataset& ds, std::size_t users, ParamSet params);

  void fetch(const ParamSet& temporal);
  StepResult step();
  const ParamSet& params() const { return params_; }

 private:
  const TrainConfig* cfg_;
  const ReplayDataset* ds_;
  Autoencoder ae_;
  BlockPartition partition_;
  ParamSet params_;
  OptimizerState opt_;
  BatchSampler sampler_;
};

struct TraceRow {
  std::uint64_t iteration = 0;
  double loss = 0.0;
  std::uint64_t temporal_version = 0;
  std::uint64_t policy_version = 0;
  std::uint64_t cluster_version = 0;
};

void write_policy_trace(std::ostream& out, std::span<const TraceRow> rows);
void write_cluster_trace(std::ostream& out, std::span<const TraceRow> rows);

struct TrainState {
  ParamSet temporal;
  ParamSet policy;
  ParamSet clustering;
};

struct TrainResult {
  TrainState models;
  std::vector<TraceRow> policy_trace;
  std::vector<TraceRow> cluster_trace;
  std::vector<StoreEvent> events;  // filled in async mode
};

/// Fresh parameters for all three families.
TrainState init_models(const TrainConfig& cfg, std::size_t users, const RequestTensor& corpus_totals);

/// Runs both trainers. "interleaved" follows a fixed single-threaded schedule;
/// "async" runs them on two threads and records the store's event log, which
/// replay_training() can re-execute single-threaded.
TrainResult run_training(const TrainConfig& cfg, const ReplayDataset& ds, std::size_t users,
                         const RequestTensor& corpus_totals, const TrainState& start);

TrainResult replay_training(const TrainConfig& cfg, const ReplayDataset& ds, std::size_t users,
                            const RequestTensor& corpus_totals, const TrainState& start,
                            std::span<const StoreEvent> events);

}  // namespace vod
