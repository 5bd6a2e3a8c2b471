// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vod/tensor.hpp"

#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "vod/errors.hpp"

namespace vod {
namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void fnv_u64(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffU;
    h *= kFnvPrime;
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive");
  }
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != product(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_string());
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, double fill) {
  return Tensor({rows, cols}, fill);
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor& Tensor::operator+=(const Tensor& other) {
  if (!same_shape(other)) {
    throw ShapeError("cannot add " + other.shape_string() + " to " + shape_string());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double scale) {
  for (double& v : data_) v *= scale;
  return *this;
}

void accumulate(Gradients& dst, const Gradients& src, double scale) {
  for (const auto& [name, g] : src) {
    auto it = dst.find(name);
    if (it == dst.end()) {
      Tensor copy = g;
      copy *= scale;
      dst.emplace(name, std::move(copy));
      continue;
    }
    if (!it->second.same_shape(g)) throw ShapeError("gradient shape mismatch for " + name);
    auto out = it->second.values();
    auto in = g.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * in[i];
  }
}

void ParamSet::insert(std::string name, Tensor value) {
  auto [it, inserted] = tensors_.emplace(std::move(name), std::move(value));
  if (!inserted) throw ConfigError("duplicate parameter name: " + it->first);
}

bool ParamSet::contains(std::string_view name) const { return tensors_.find(name) != tensors_.end(); }

const Tensor& ParamSet::at(std::string_view name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw MissingArtifact("unknown parameter: " + std::string(name));
  return it->second;
}

Tensor& ParamSet::mutable_at(std::string_view name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw MissingArtifact("unknown parameter: " + std::string(name));
  return it->second;
}

void ParamSet::erase(std::string_view name) {
  auto it = tensors_.find(name);
  if (it != tensors_.end()) tensors_.erase(it);
}

ParamSet ParamSet::subset(std::string_view prefix) const {
  ParamSet out;
  for (const auto& [name, t] : tensors_) {
    if (std::string_view(name).starts_with(prefix)) out.tensors_.emplace(name, t);
  }
  out.version_ = version_;
  return out;
}

void ParamSet::merge(const ParamSet& other) {
  for (const auto& [name, t] : other.tensors_) tensors_.insert_or_assign(name, t);
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : tensors_) n += t.size();
  return n;
}

std::uint64_t ParamSet::checksum() const {
  std::uint64_t h = kFnvOffset;
  fnv_u64(h, version_);
  for (const auto& [name, t] : tensors_) {
    fnv_bytes(h, name.data(), name.size());
    for (auto d : t.shape()) fnv_u64(h, d);
    for (double v : t.values()) fnv_u64(h, std::bit_cast<std::uint64_t>(v));
  }
  return h;
}

Activation parse_activation(std::string_view name) {
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation: " + std::string(name));
}

std::string_view activation_name(Activation kind) {
  switch (kind) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
  }
  return "identity";
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double activate(double x, Activation kind) {
  switch (kind) {
    case Activation::kIdentity: return x;
    case Activation::kRelu: return x > 0 ? x : 0.0;
    case Activation::kSigmoid: return sigmoid(x);
    case Activation::kTanh: return std::tanh(x);
  }
  return x;
}

double activation_grad_from_output(double y, Activation kind) {
  switch (kind) {
    case Activation::kIdentity: return 1.0;
    case Activation::kRelu: return y > 0 ? 1.0 : 0.0;
    case Activation::kSigmoid: return y * (1.0 - y);
    case Activation::kTanh: return 1.0 - y * y;
  }
  return 1.0;
}

Tensor apply_activation(const Tensor& x, Activation kind) {
  Tensor out = x;
  for (double& v : out.values()) v = activate(v, kind);
  return out;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Tensor l2_normalize(const Tensor& v) {
  const double n = l2_norm(v.values());
  if (n <= kNormEpsilon) return v;
  Tensor out = v;
  out *= 1.0 / n;
  return out;
}

Tensor l2_normalize_backward(const Tensor& input, const Tensor& grad_output) {
  if (!input.same_shape(grad_output)) throw ShapeError("l2_normalize_backward shape mismatch");
  const double n = l2_norm(input.values());
  if (n <= kNormEpsilon) return grad_output;
  double dot = 0.0;
  for (std::size_t i = 0; i < input.size(); ++i) dot += input[i] * grad_output[i];
  Tensor out = grad_output;
  const double inv = 1.0 / n;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double unit = input[i] * inv;
    out[i] = (grad_output[i] - unit * dot * inv) * inv;
  }
  return out;
}

void matvec(const Tensor& w, std::span<const double> x, std::span<double> y, bool accumulate) {
  const std::size_t rows = w.dim(0);
  const std::size_t cols = w.dim(1);
  const double* p = w.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    const double* row = p + r * cols;
    for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
    y[r] = accumulate ? y[r] + s : s;
  }
}

void matvec_transposed_add(const Tensor& w, std::span<const double> x, std::span<double> y) {
  const std::size_t rows = w.dim(0);
  const std::size_t cols = w.dim(1);
  const double* p = w.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    const double* row = p + r * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
  }
}

void outer_add(Tensor& w, std::span<const double> a, std::span<const double> b) {
  const std::size_t rows = w.dim(0);
  const std::size_t cols = w.dim(1);
  double* p = w.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double ar = a[r];
    if (ar == 0.0) continue;
    double* row = p + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += ar * b[c];
  }
}

}  // namespace vod
