// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vod/tensor.hpp"

namespace vod {

enum class Family { kTemporal = 0, kClustering = 1, kPolicy = 2 };
inline constexpr std::size_t kFamilyCount = 3;
std::string_view family_name(Family f);

struct Snapshot {
  Family family;
  std::uint64_t version;
  ParamSet params;
  std::uint64_t checksum;
  std::chrono::system_clock::time_point published_at;
};
using SnapshotPtr = std::shared_ptr<const Snapshot>;

class TimeoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StoreEvent {
  enum class Kind { kRead, kPublish };
  Kind kind;
  Family family;
  std::uint64_t version;
  std::string actor;
  friend bool operator==(const StoreEvent&, const StoreEvent&) = default;
};

/// Latest immutable snapshot per model family. Readers get a shared pointer
/// to a complete snapshot; the lock covers only the pointer swap. When
/// recording is on, every read and publish is appended to an event log in
/// the order the store observed them.
class ModelStore {
 public:
  explicit ModelStore(bool record = false) : record_(record) {}

  // The new version must exceed the family's current one.
  void publish(Family family, ParamSet params, std::string_view actor = {});
  // Publishes several families under one lock so readers never see a mix.
  void publish_many(std::vector<std::pair<Family, ParamSet>> entries, std::string_view actor = {});

  // Throws MissingArtifact when nothing was published; verifies the checksum.
  SnapshotPtr latest(Family family, std::string_view actor = {}) const;
  std::uint64_t version(Family family) const;  // 0 when empty
  // Blocks until the family reaches `min_version`; throws TimeoutError.
  void wait_for_version(Family family, std::uint64_t min_version, std::chrono::milliseconds timeout) const;
  // Wakes waiters so they can observe an abort flag.
  void notify_all() const { cv_.notify_all(); }

  std::vector<StoreEvent> events() const;

 private:
  static SnapshotPtr make(Family family, ParamSet params);
  void check_monotone(const Snapshot& s) const;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  SnapshotPtr slots_[kFamilyCount];
  bool record_;
  mutable std::vector<StoreEvent> events_;
};

}  // namespace vod
