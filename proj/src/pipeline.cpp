// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vod/pipeline.hpp"

#include <algorithm>

#include "vod/errors.hpp"

namespace vod {

void check_compatible(const World& world, const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.temporal.intervals != world.config.intervals) throw ConfigError("train intervals differ from the world");
  if (cfg.temporal.days + 1 >= world.config.days) throw ConfigError("world too short for input_days plus a target");
}

RequestTensor world_corpus_totals(const World& world, const TrainConfig& cfg) {
  check_compatible(world, cfg);
  return corpus_peak_totals(world.requests, world.eval_day(), cfg.temporal.days);
}

ReplayDataset world_dataset(const World& world, const TrainConfig& cfg) {
  check_compatible(world, cfg);
  return build_dataset(world.requests, world.upload_day, cfg.temporal.days, world.eval_day() - 1);
}

Prediction predict_day(const World& world, const TrainConfig& cfg, const TrainState& models, std::size_t day) {
  check_compatible(world, cfg);
  const TemporalConfig& tc = cfg.temporal;
  if (day < tc.days || day >= world.config.days) throw ConfigError("prediction day lacks D days of history");
  const std::size_t users = world.config.users;
  const ClusterPredictor predictor(models.clustering, cfg, users);

  Prediction out;
  out.day = day;
  std::vector<RequestTensor> inputs;
  RequestTensor totals(users, tc.days, tc.intervals);
  for (std::size_t v = 0; v < world.video_count(); ++v) {
    if (world.upload_day[v] >= day) continue;
    RequestTensor x = world.requests[v].day_range(day - tc.days, tc.days);
    const auto r = predictor.predict(static_cast<VideoId>(v), x);
    out.candidates.push_back({static_cast<VideoId>(v), r.cluster, static_cast<double>(world.upload_day[v])});
    out.codes.push_back(r.code);
    out.assignment[static_cast<VideoId>(v)] = r.cluster;
    totals += x;
    inputs.push_back(std::move(x));
  }
  if (out.candidates.empty()) throw ConfigError("no videos uploaded before the prediction day");

  std::vector<VideoRef> refs;
  for (std::size_t i = 0; i < inputs.size(); ++i) refs.push_back({out.candidates[i].video, &inputs[i]});
  const ClusterRequests xa = accumulate_by_cluster(refs, out.assignment);

  ParamSet params = models.temporal;
  params.merge(models.policy);
  const MlpSpec head = policy_head_spec(users, tc.hidden, cfg.policy_hidden);
  const RequestTensor corpus = RequestTensor::from_tensor(models.clustering.at("cluster.peak_totals"));
  const RequestTensor& peak_totals = cfg.corpus_peak_totals ? corpus : totals;

  const std::size_t clusters = predictor.partition().cluster_count();
  out.up = Tensor::matrix(clusters, users);
  for (const auto& [c, x] : xa) {
    const PolicyForward f = policy_forward(x, tc, params, head, peak_totals);
    for (std::size_t u = 0; u < users; ++u) out.up.at(c, u) = f.up()[u];
  }
  out.cp = compute_cp(out.up, world.topology.mix_matrix());
  return out;
}

DispatchOutcome learned_dispatch(const World& world, const Prediction& prediction) {
  DispatchOutcome out;
  out.plan = build_dispatch_plan(prediction.cp, prediction.candidates, world.topology);
  const auto records = world.day_records(prediction.day);
  const auto window = world.config.peak_window();
  out.report = evaluate_metrics(out.plan, records, prediction.day, world.config.intervals, window, world.topology);
  return out;
}

DispatchOutcome threshold_dispatch(const World& world, std::size_t day, double threshold, std::size_t period) {
  if (day >= world.config.days) throw ConfigError("dispatch day outside the world");
  DispatchOutcome out;
  const auto records = world.day_records(day);
  out.plan = baseline_dispatch(records, world.config.intervals, threshold, period, world.topology);
  const auto window = world.config.peak_window();
  out.report = evaluate_metrics(out.plan, records, day, world.config.intervals, window, world.topology);
  return out;
}

std::vector<std::vector<double>> candidate_vectors(const World& world, const Prediction& prediction,
                                                   std::size_t input_days) {
  std::vector<std::vector<double>> out;
  out.reserve(prediction.candidates.size());
  for (const auto& c : prediction.candidates) {
    const RequestTensor x = world.requests[c.video].day_range(prediction.day - input_days, input_days);
    out.emplace_back(x.values().begin(), x.values().end());
  }
  return out;
}

ClusterQualityReport prediction_quality(const World& world, const TrainConfig& cfg, const TrainState& models,
                                        const Prediction& prediction) {
  const ClusterPredictor predictor(models.clustering, cfg, world.config.users);
  const auto vectors = candidate_vectors(world, prediction, cfg.temporal.days);
  std::vector<std::size_t> clusters;
  for (const auto& c : prediction.candidates) clusters.push_back(c.cluster);
  return cluster_quality_report(vectors, clusters, prediction.codes, predictor.partition());
}

}  // namespace vod
