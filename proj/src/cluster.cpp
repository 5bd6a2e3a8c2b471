// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vod/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vod/errors.hpp"

namespace vod {

BlockPartition::BlockPartition(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {}

BlockPartition BlockPartition::build(std::size_t divisions, std::size_t budget) {
  if (divisions < 2) throw ConfigError("block partition needs at least 2 divisions per hierarchy");
  if (budget < 4) throw ConfigError("cluster budget must be at least 4");

  const double target = 0.5 * std::sqrt(static_cast<double>(budget));
  Interval inner{0.0, 1.0};
  std::vector<Interval> retained;
  while (static_cast<double>(retained.size()) < target) {
    const double span = inner.width();
    const double n = static_cast<double>(divisions);
    for (std::size_t k = 1; k < divisions; ++k) {
      const double left = inner.left + span * static_cast<double>(k) / n;
      const double right = (k + 1 == divisions) ? inner.right : inner.left + span * static_cast<double>(k + 1) / n;
      retained.push_back({left, right});
    }
    inner = {inner.left, inner.left + span / n};
  }

  std::vector<Interval> all;
  all.reserve(2 * (retained.size() + 1));
  all.push_back(inner);
  all.insert(all.end(), retained.begin(), retained.end());
  const std::size_t positive = all.size();
  for (std::size_t i = 0; i < positive; ++i) all.push_back({-all[i].right, -all[i].left});
  std::sort(all.begin(), all.end(), [](const Interval& a, const Interval& b) { return a.left < b.left; });
  return BlockPartition(std::move(all));
}

BlockPartition BlockPartition::from_tensor(const Tensor& endpoints) {
  if (endpoints.rank() != 2 || endpoints.dim(1) != 2) throw ShapeError("partition tensor must be [n, 2]");
  std::vector<Interval> v(endpoints.dim(0));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = {endpoints.at(i, 0), endpoints.at(i, 1)};
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i].left != v[i - 1].right) throw ShapeError("partition intervals are not contiguous");
  }
  return BlockPartition(std::move(v));
}

std::size_t BlockPartition::locate(double x) const {
  if (!(x > -1.0 && x < 1.0)) throw ShapeError("encoder coordinate outside (-1, 1)");
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                             [](double value, const Interval& iv) { return value < iv.left; });
  return static_cast<std::size_t>(std::distance(intervals_.begin(), it)) - 1;
}

std::size_t BlockPartition::assign(double x, double y) const { return locate(x) * intervals_.size() + locate(y); }

std::size_t BlockPartition::assign_code(const std::array<double, 2>& code) const {
  const double lo = std::nextafter(-1.0, 0.0);
  const double hi = std::nextafter(1.0, 0.0);
  return assign(std::clamp(code[0], lo, hi), std::clamp(code[1], lo, hi));
}

std::array<double, 2> BlockPartition::center(std::size_t block) const {
  const std::size_t n = intervals_.size();
  return {intervals_.at(block / n).center(), intervals_.at(block % n).center()};
}

double BlockPartition::area(std::size_t block) const {
  const std::size_t n = intervals_.size();
  return intervals_.at(block / n).width() * intervals_.at(block % n).width();
}

Tensor BlockPartition::to_tensor() const {
  Tensor t = Tensor::matrix(intervals_.size(), 2);
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    t.at(i, 0) = intervals_[i].left;
    t.at(i, 1) = intervals_[i].right;
  }
  return t;
}

Autoencoder Autoencoder::make(std::size_t input_dim, const std::vector<std::size_t>& hidden) {
  Autoencoder ae;
  ae.encoder.prefix = "cluster.enc";
  ae.encoder.sizes.push_back(input_dim);
  ae.encoder.sizes.insert(ae.encoder.sizes.end(), hidden.begin(), hidden.end());
  ae.encoder.sizes.push_back(2);
  ae.encoder.hidden = Activation::kTanh;
  ae.encoder.output = Activation::kTanh;

  ae.decoder.prefix = "cluster.dec";
  ae.decoder.sizes.assign(ae.encoder.sizes.rbegin(), ae.encoder.sizes.rend());
  ae.decoder.hidden = Activation::kTanh;
  ae.decoder.output = Activation::kIdentity;
  return ae;
}

void init_autoencoder(ParamSet& params, const Autoencoder& ae, Rng& rng) {
  Rng enc = rng.split("encoder");
  Rng dec = rng.split("decoder");
  init_mlp(params, ae.encoder, enc);
  init_mlp(params, ae.decoder, dec);
}

namespace {

std::size_t nearest_center(const BlockPartition& partition, const std::array<double, 2>& e, double* dist2) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t b = 0; b < partition.cluster_count(); ++b) {
    const auto c = partition.center(b);
    const double dx = e[0] - c[0];
    const double dy = e[1] - c[1];
    const double d = dx * dx + dy * dy;
    if (d < best) {
      best = d;
      arg = b;
    }
  }
  *dist2 = best;
  return arg;
}

}  // namespace

std::array<double, 2> encode(const Tensor& embedding, const ParamSet& params, const Autoencoder& ae) {
  const Tensor nt = l2_normalize(embedding);
  const MlpCache c = mlp_forward(params, ae.encoder, nt.values());
  return {c.output()[0], c.output()[1]};
}

ClusterForward cluster_forward(const Tensor& embedding, const ParamSet& params, const Autoencoder& ae,
                               const BlockPartition& partition, double omega) {
  if (omega < 0.0) throw ConfigError("omega must be nonnegative");
  ClusterForward f;
  f.embedding = embedding;
  const Tensor nt = l2_normalize(embedding);
  f.normalized.assign(nt.values().begin(), nt.values().end());
  f.encoder = mlp_forward(params, ae.encoder, f.normalized);
  f.code = {f.encoder.output()[0], f.encoder.output()[1]};
  f.decoder = mlp_forward(params, ae.decoder, f.encoder.output());

  const auto& rec = f.decoder.output();
  double r = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const double diff = f.normalized[i] - rec[i];
    r += diff * diff;
  }
  f.reconstruction = 0.5 * r;
  f.nearest = nearest_center(partition, f.code, &f.quantization);
  f.cluster = partition.assign_code(f.code);
  f.loss = f.reconstruction + omega * f.quantization;
  return f;
}

ClusterGradients cluster_backward(const ClusterForward& fwd, const ParamSet& params, const Autoencoder& ae,
                                  const BlockPartition& partition, double omega, double scale) {
  if (fwd.encoder.activations.empty() || fwd.decoder.activations.empty()) {
    throw MissingArtifact("cluster_backward: forward cache missing");
  }
  const auto& rec = fwd.decoder.output();
  std::vector<double> d_rec(rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) d_rec[i] = scale * (rec[i] - fwd.normalized[i]);

  MlpGradients dec = mlp_backward(params, ae.decoder, fwd.decoder, d_rec);
  const auto center = partition.center(fwd.nearest);
  std::vector<double> d_code = dec.input;
  d_code[0] += scale * 2.0 * omega * (fwd.code[0] - center[0]);
  d_code[1] += scale * 2.0 * omega * (fwd.code[1] - center[1]);

  MlpGradients enc = mlp_backward(params, ae.encoder, fwd.encoder, d_code);
  Tensor d_nt(fwd.embedding.shape());
  for (std::size_t i = 0; i < d_nt.size(); ++i) d_nt[i] = enc.input[i] - d_rec[i];

  ClusterGradients out;
  out.params = std::move(dec.params);
  for (auto& [name, g] : enc.params) out.params.emplace(name, std::move(g));
  out.embedding = l2_normalize_backward(fwd.embedding, d_nt);
  return out;
}

}  // namespace vod
