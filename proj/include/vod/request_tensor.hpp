// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vod/tensor.hpp"

namespace vod {

/// Nonnegative request counts indexed [user][day][interval] for one video or cluster.
class RequestTensor {
 public:
  RequestTensor() = default;
  RequestTensor(std::size_t users, std::size_t days, std::size_t intervals, double fill = 0.0)
      : users_(users), days_(days), intervals_(intervals), data_(users * days * intervals, fill) {}

  std::size_t users() const { return users_; }
  std::size_t days() const { return days_; }
  std::size_t intervals() const { return intervals_; }
  std::size_t size() const { return data_.size(); }

  double& at(std::size_t u, std::size_t d, std::size_t t) { return data_[(u * days_ + d) * intervals_ + t]; }
  double at(std::size_t u, std::size_t d, std::size_t t) const { return data_[(u * days_ + d) * intervals_ + t]; }

  std::span<double> series(std::size_t u, std::size_t d) {
    return {data_.data() + (u * days_ + d) * intervals_, intervals_};
  }
  std::span<const double> series(std::size_t u, std::size_t d) const {
    return {data_.data() + (u * days_ + d) * intervals_, intervals_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const RequestTensor& o) const {
    return users_ == o.users_ && days_ == o.days_ && intervals_ == o.intervals_;
  }

  RequestTensor& operator+=(const RequestTensor& other);
  // Copy of days [first, first + count).
  RequestTensor day_range(std::size_t first, std::size_t count) const;
  double total() const;

  Tensor as_tensor() const { return Tensor({users_, days_, intervals_}, data_); }
  static RequestTensor from_tensor(const Tensor& t);

  friend bool operator==(const RequestTensor&, const RequestTensor&) = default;

 private:
  std::size_t users_ = 0;
  std::size_t days_ = 0;
  std::size_t intervals_ = 0;
  std::vector<double> data_;
};

}  // namespace vod
