// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "vod/tensor.hpp"

namespace vod {

inline constexpr std::uint64_t kCheckpointFormatVersion = 1;

// Layout, all integers little-endian u64, all values little-endian IEEE-754 doubles:
//   format_version, param_version, param_count,
//   then per parameter: name_length, name bytes, rank, dims[rank], data[prod(dims)].
// Parameters are written in lexicographic name order.
std::string encode_checkpoint(const ParamSet& params);
ParamSet decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params);
ParamSet load_checkpoint(const std::filesystem::path& path);

}  // namespace vod
