// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "vod/analysis.hpp"
#include "vod/dispatcher.hpp"
#include "vod/trainer.hpp"
#include "vod/worldgen.hpp"

namespace vod {

/// Peak totals for the clustering side: every day before the held-out day.
RequestTensor world_corpus_totals(const World& world, const TrainConfig& cfg);

/// Training windows whose target day precedes the held-out day.
ReplayDataset world_dataset(const World& world, const TrainConfig& cfg);

/// Checks that a training config fits the world it is applied to.
void check_compatible(const World& world, const TrainConfig& cfg);

struct Prediction {
  std::size_t day = 0;
  std::vector<Candidate> candidates;            // videos uploaded before `day`
  std::vector<std::array<double, 2>> codes;     // per candidate
  Assignment assignment;
  Tensor up;  // clusters x users; zero rows for empty clusters
  Tensor cp;  // clusters x cdns
};

/// Clustering predictor, then the policy network on every populated
/// cluster's last D days before `day`, then CP = UP * UC.
Prediction predict_day(const World& world, const TrainConfig& cfg, const TrainState& models, std::size_t day);

struct DispatchOutcome {
  DispatchPlan plan;
  EvalReport report;
};

DispatchOutcome learned_dispatch(const World& world, const Prediction& prediction);

/// Threshold dispatch driven by the requests of `day` itself.
DispatchOutcome threshold_dispatch(const World& world, std::size_t day, double threshold, std::size_t period);

/// Raw request counts of each candidate over the D days before the prediction day.
std::vector<std::vector<double>> candidate_vectors(const World& world, const Prediction& prediction,
                                                   std::size_t input_days);

ClusterQualityReport prediction_quality(const World& world, const TrainConfig& cfg, const TrainState& models,
                                        const Prediction& prediction);

}  // namespace vod
