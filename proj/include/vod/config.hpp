// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vod {

using KeyValues = std::map<std::string, std::string, std::less<>>;

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// skipped; malformed lines and repeated keys throw ConfigError.
KeyValues parse_key_values(std::string_view text);
KeyValues load_key_values(const std::filesystem::path& path);
void write_key_values(std::ostream& out, const KeyValues& entries);

/// Maps flat config keys onto typed fields.
class ConfigBinder {
 public:
  void bind(std::string key, std::size_t* field);
  void bind(std::string key, double* field);
  void bind(std::string key, bool* field);
  void bind(std::string key, std::string* field);
  void bind(std::string key, std::vector<std::size_t>* field);

  bool knows(std::string_view key) const { return fields_.contains(key); }
  // Every key must be bound; values that fail to parse name their key.
  void apply(const KeyValues& entries) const;
  // Current value of every bound field, formatted so apply() round-trips it.
  KeyValues entries() const;

 private:
  struct Field {
    std::function<void(std::string_view)> set;
    std::function<std::string()> get;
  };
  void add(std::string key, Field field);
  std::map<std::string, Field, std::less<>> fields_;
};

std::string format_double(double v);

}  // namespace vod
