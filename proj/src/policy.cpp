// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vod/policy.hpp"

#include <stdexcept>
#include <string>

#include "vod/errors.hpp"

namespace vod {

ClusterRequests accumulate_by_cluster(std::span<const VideoRef> videos, const Assignment& assignment) {
  ClusterRequests out;
  const RequestTensor* first = nullptr;
  for (const auto& v : videos) {
    auto it = assignment.find(v.id);
    if (it == assignment.end()) throw MissingArtifact("video " + std::to_string(v.id) + " has no cluster");
    if (first && !first->same_shape(*v.requests)) {
      throw ShapeError("video " + std::to_string(v.id) + " request tensor shape differs from the batch");
    }
    first = v.requests;
    auto [slot, inserted] = out.try_emplace(it->second, *v.requests);
    if (!inserted) slot->second += *v.requests;
  }
  return out;
}

MlpSpec policy_head_spec(std::size_t users, std::size_t temporal_hidden, const std::vector<std::size_t>& hidden) {
  MlpSpec s;
  s.prefix = "policy.head";
  s.sizes.push_back(users * temporal_hidden);
  s.sizes.insert(s.sizes.end(), hidden.begin(), hidden.end());
  s.sizes.push_back(users);
  s.hidden = Activation::kTanh;
  s.output = Activation::kSigmoid;
  return s;
}

PolicyForward policy_forward(const RequestTensor& cluster_requests, const TemporalConfig& cfg, const ParamSet& params,
                             const MlpSpec& head, const RequestTensor& peak_totals) {
  PolicyForward f;
  f.input = cluster_requests.day_range(0, cfg.days);
  f.normalized = l2_normalize(f.input.as_tensor());
  f.temporal = temporal_forward(RequestTensor::from_tensor(f.normalized), cfg, params, peak_totals);
  f.head = mlp_forward(params, head, f.temporal.embedding.values());
  return f;
}

PolicyGradients policy_backward(const PolicyForward& fwd, const TemporalConfig& cfg, const ParamSet& params,
                                const MlpSpec& head, std::span<const double> d_up) {
  MlpGradients h = mlp_backward(params, head, fwd.head, d_up);
  Tensor d_embedding(fwd.temporal.embedding.shape(), std::move(h.input));
  TemporalGradients t = temporal_backward(fwd.temporal.cache, cfg, params, d_embedding);

  PolicyGradients out;
  out.params = std::move(t.params);
  for (auto& [name, g] : h.params) out.params.emplace(name, std::move(g));
  out.input = RequestTensor::from_tensor(l2_normalize_backward(fwd.input.as_tensor(), t.input.as_tensor()));
  return out;
}

std::optional<std::vector<double>> make_policy_target(const RequestTensor& cluster_requests, std::size_t day,
                                                      std::span<const std::size_t> window) {
  if (day >= cluster_requests.days()) throw ShapeError("target day outside the cluster tensor");
  std::vector<double> share(cluster_requests.users(), 0.0);
  double total = 0.0;
  for (std::size_t u = 0; u < share.size(); ++u) {
    const auto s = cluster_requests.series(u, day);
    for (auto t : window) {
      if (t >= s.size()) throw ShapeError("peak window interval out of range");
      share[u] += s[t];
    }
    total += share[u];
  }
  if (total <= 0.0) return std::nullopt;
  for (double& v : share) v /= total;
  return share;
}

PolicyLoss policy_loss(const std::map<std::size_t, std::vector<double>>& up,
                       const std::map<std::size_t, std::vector<double>>& targets) {
  PolicyLoss out;
  for (const auto& [cluster, pred] : up) {
    auto it = targets.find(cluster);
    if (it == targets.end()) continue;
    const auto& target = it->second;
    if (target.size() != pred.size()) throw ShapeError("policy target size differs from prediction");
    std::vector<double> g(pred.size());
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      g[i] = pred[i] - target[i];
      s += g[i] * g[i];
    }
    out.loss += 0.5 * s;
    out.grads.emplace(cluster, std::move(g));
    ++out.scored;
  }
  if (out.scored == 0) throw std::invalid_argument("empty training signal");
  return out;
}

}  // namespace vod
