// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vod {

/// Dense row-major tensor of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Rank-2 access.
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_string() const;

  void fill(double value);
  Tensor& operator+=(const Tensor& other);
  Tensor& operator*=(double scale);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

using Gradients = std::map<std::string, Tensor, std::less<>>;

// Adds every gradient in `src` into `dst`, creating entries as needed.
void accumulate(Gradients& dst, const Gradients& src, double scale = 1.0);

/// Named collection of learnable tensors with a commit counter.
class ParamSet {
 public:
  using Map = std::map<std::string, Tensor, std::less<>>;

  void insert(std::string name, Tensor value);
  bool contains(std::string_view name) const;
  const Tensor& at(std::string_view name) const;
  Tensor& mutable_at(std::string_view name);
  void erase(std::string_view name);

  std::size_t size() const { return tensors_.size(); }
  Map::const_iterator begin() const { return tensors_.begin(); }
  Map::const_iterator end() const { return tensors_.end(); }

  std::uint64_t version() const { return version_; }
  void set_version(std::uint64_t v) { version_ = v; }
  void bump_version() { ++version_; }

  // Entries whose name starts with `prefix`.
  ParamSet subset(std::string_view prefix) const;
  // Copies all entries of `other`, replacing any existing ones.
  void merge(const ParamSet& other);

  std::size_t scalar_count() const;
  // FNV-1a over names, shapes and raw data; used to detect torn snapshots.
  std::uint64_t checksum() const;

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  Map tensors_;
  std::uint64_t version_ = 0;
};

enum class Activation { kIdentity, kRelu, kSigmoid, kTanh };

Activation parse_activation(std::string_view name);
std::string_view activation_name(Activation kind);

double activate(double x, Activation kind);
// Derivative expressed through the activation output y = f(x).
double activation_grad_from_output(double y, Activation kind);
Tensor apply_activation(const Tensor& x, Activation kind);

double sigmoid(double x);

inline constexpr double kNormEpsilon = 1e-12;

double l2_norm(std::span<const double> v);
// v / ||v||; the zero vector (norm <= 1e-12) is returned unchanged.
Tensor l2_normalize(const Tensor& v);
// Gradient w.r.t. the input of l2_normalize given the gradient w.r.t. its output.
Tensor l2_normalize_backward(const Tensor& input, const Tensor& grad_output);

// y = W x (+ y), W is rows x cols row-major.
void matvec(const Tensor& w, std::span<const double> x, std::span<double> y, bool accumulate = false);
// y += W^T x
void matvec_transposed_add(const Tensor& w, std::span<const double> x, std::span<double> y);
// W += a b^T
void outer_add(Tensor& w, std::span<const double> a, std::span<const double> b);

}  // namespace vod
