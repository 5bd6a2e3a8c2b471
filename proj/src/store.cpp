// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vod/store.hpp"

#include "vod/errors.hpp"

namespace vod {

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kTemporal:
      return "temporal";
    case Family::kClustering:
      return "clustering";
    case Family::kPolicy:
      return "policy";
  }
  return "unknown";
}

SnapshotPtr ModelStore::make(Family family, ParamSet params) {
  const std::uint64_t version = params.version();
  const std::uint64_t sum = params.checksum();
  return std::make_shared<const Snapshot>(
      Snapshot{family, version, std::move(params), sum, std::chrono::system_clock::now()});
}

void ModelStore::check_monotone(const Snapshot& s) const {
  const auto& cur = slots_[static_cast<std::size_t>(s.family)];
  if (cur && s.version <= cur->version) {
    throw std::logic_error(std::string(family_name(s.family)) + " version " + std::to_string(s.version) +
                           " does not advance past " + std::to_string(cur->version));
  }
}

void ModelStore::publish(Family family, ParamSet params, std::string_view actor) {
  std::vector<std::pair<Family, ParamSet>> one;
  one.emplace_back(family, std::move(params));
  publish_many(std::move(one), actor);
}

void ModelStore::publish_many(std::vector<std::pair<Family, ParamSet>> entries, std::string_view actor) {
  // Checksums are computed outside the lock.
  std::vector<SnapshotPtr> snaps;
  snaps.reserve(entries.size());
  for (auto& [f, p] : entries) snaps.push_back(make(f, std::move(p)));
  {
    std::lock_guard lock(mu_);
    for (const auto& s : snaps) check_monotone(*s);
    for (auto& s : snaps) {
      if (record_) events_.push_back({StoreEvent::Kind::kPublish, s->family, s->version, std::string(actor)});
      slots_[static_cast<std::size_t>(s->family)] = std::move(s);
    }
  }
  cv_.notify_all();
}

SnapshotPtr ModelStore::latest(Family family, std::string_view actor) const {
  SnapshotPtr snap;
  {
    std::lock_guard lock(mu_);
    snap = slots_[static_cast<std::size_t>(family)];
    if (snap && record_) events_.push_back({StoreEvent::Kind::kRead, family, snap->version, std::string(actor)});
  }
  if (!snap) throw MissingArtifact(std::string("no ") + std::string(family_name(family)) + " snapshot published");
  if (snap->params.checksum() != snap->checksum) {
    throw NumericError(std::string(family_name(family)) + " snapshot failed its checksum");
  }
  return snap;
}

std::uint64_t ModelStore::version(Family family) const {
  std::lock_guard lock(mu_);
  const auto& s = slots_[static_cast<std::size_t>(family)];
  return s ? s->version : 0;
}

void ModelStore::wait_for_version(Family family, std::uint64_t min_version, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  const bool ok = cv_.wait_for(lock, timeout, [&] {
    const auto& s = slots_[static_cast<std::size_t>(family)];
    return s && s->version >= min_version;
  });
  if (!ok) {
    throw TimeoutError("timed out waiting for " + std::string(family_name(family)) + " version " +
                       std::to_string(min_version));
  }
}

std::vector<StoreEvent> ModelStore::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

}  // namespace vod
