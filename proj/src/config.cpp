// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vod/config.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <type_traits>

#include "vod/errors.hpp"

namespace vod {

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "seeds are bound through std::size_t fields");

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::size_t parse_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("config key '" + std::string(key) + "' expects a nonnegative integer, got '" + std::string(v) +
                      "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("config key '" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw ConfigError("cannot format number");
  return std::string(buf, ptr);
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
      throw ConfigError("config key '" + key + "' given twice");
    }
  }
  return out;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

void write_key_values(std::ostream& out, const KeyValues& entries) {
  for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
}

void ConfigBinder::add(std::string key, Field field) {
  if (!fields_.emplace(std::move(key), std::move(field)).second) throw ConfigError("config key bound twice");
}

void ConfigBinder::bind(std::string key, std::size_t* field) {
  std::string k = key;
  add(std::move(key), {[field, k](std::string_view v) { *field = parse_size(k, v); },
                       [field] { return std::to_string(*field); }});
}

void ConfigBinder::bind(std::string key, double* field) {
  std::string k = key;
  add(std::move(key), {[field, k](std::string_view v) { *field = parse_double(k, v); },
                       [field] { return format_double(*field); }});
}

void ConfigBinder::bind(std::string key, bool* field) {
  std::string k = key;
  add(std::move(key), {[field, k](std::string_view v) {
                         if (v == "true" || v == "1") {
                           *field = true;
                         } else if (v == "false" || v == "0") {
                           *field = false;
                         } else {
                           throw ConfigError("config key '" + k + "' expects true or false");
                         }
                       },
                       [field] { return std::string(*field ? "true" : "false"); }});
}

void ConfigBinder::bind(std::string key, std::string* field) {
  add(std::move(key), {[field](std::string_view v) { *field = std::string(v); }, [field] { return *field; }});
}

void ConfigBinder::bind(std::string key, std::vector<std::size_t>* field) {
  std::string k = key;
  add(std::move(key), {[field, k](std::string_view v) {
                         std::vector<std::size_t> out;
                         while (!v.empty()) {
                           const auto comma = v.find(',');
                           out.push_back(parse_size(k, trim(v.substr(0, comma))));
                           v = comma == std::string_view::npos ? std::string_view{} : v.substr(comma + 1);
                         }
                         *field = std::move(out);
                       },
                       [field] {
                         std::string s;
                         for (std::size_t i = 0; i < field->size(); ++i) {
                           if (i) s += ',';
                           s += std::to_string((*field)[i]);
                         }
                         return s;
                       }});
}

void ConfigBinder::apply(const KeyValues& entries) const {
  for (const auto& [k, v] : entries) {
    auto it = fields_.find(k);
    if (it == fields_.end()) throw ConfigError("unknown config key '" + k + "'");
    it->second.set(v);
  }
}

KeyValues ConfigBinder::entries() const {
  KeyValues out;
  for (const auto& [k, f] : fields_) out.emplace(k, f.get());
  return out;
}

}  // namespace vod
