// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "vod/mlp.hpp"
#include "vod/request_tensor.hpp"
#include "vod/temporal.hpp"

namespace vod {

using VideoId = std::uint64_t;
using Assignment = std::map<VideoId, std::size_t>;
using ClusterRequests = std::map<std::size_t, RequestTensor>;

struct VideoRef {
  VideoId id;
  const RequestTensor* requests;
};

/// Sums member videos' request tensors per cluster. Empty clusters are absent.
ClusterRequests accumulate_by_cluster(std::span<const VideoRef> videos, const Assignment& assignment);

/// "policy.head": users*hidden -> extra hidden layers... -> users, sigmoid output.
MlpSpec policy_head_spec(std::size_t users, std::size_t temporal_hidden, const std::vector<std::size_t>& hidden = {});

struct PolicyForward {
  RequestTensor input;  // first D days of the cluster tensor
  Tensor normalized;    // input scaled to unit L2 norm, same layout
  TemporalOutput temporal;
  MlpCache head;
  const std::vector<double>& up() const { return head.output(); }
};

/// Normalization, shared temporal layers, then the sigmoid head.
PolicyForward policy_forward(const RequestTensor& cluster_requests, const TemporalConfig& cfg, const ParamSet& params,
                             const MlpSpec& head, const RequestTensor& peak_totals);

struct PolicyGradients {
  Gradients params;
  RequestTensor input;  // dL/dXA over the D input days
};

PolicyGradients policy_backward(const PolicyForward& fwd, const TemporalConfig& cfg, const ParamSet& params,
                                const MlpSpec& head, std::span<const double> d_up);

/// Per-user share of the cluster's requests on `day` within `window`
/// intervals. Returns nullopt when the cluster has no such requests.
std::optional<std::vector<double>> make_policy_target(const RequestTensor& cluster_requests, std::size_t day,
                                                      std::span<const std::size_t> window);

struct PolicyLoss {
  double loss = 0.0;
  std::size_t scored = 0;
  std::map<std::size_t, std::vector<double>> grads;  // dL/dUP per scored cluster
};

/// 1/2 * sum over clusters present in both maps of ||UP - R||^2.
PolicyLoss policy_loss(const std::map<std::size_t, std::vector<double>>& up,
                       const std::map<std::size_t, std::vector<double>>& targets);

}  // namespace vod
