// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vod/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "vod/errors.hpp"

namespace vod {
namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  std::string str(std::size_t n) {
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw MissingArtifact("truncated checkpoint");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const ParamSet& params) {
  std::string out;
  out.reserve(24 + params.scalar_count() * 8 + params.size() * 64);
  put_u64(out, kCheckpointFormatVersion);
  put_u64(out, params.version());
  put_u64(out, params.size());
  for (const auto& [name, t] : params) {
    put_u64(out, name.size());
    out.append(name);
    put_u64(out, t.rank());
    for (auto d : t.shape()) put_u64(out, d);
    for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

ParamSet decode_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  const std::uint64_t format = in.u64();
  if (format != kCheckpointFormatVersion) {
    throw MissingArtifact("unsupported checkpoint format version " + std::to_string(format));
  }
  ParamSet params;
  params.set_version(in.u64());
  const std::uint64_t count = in.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = in.str(in.u64());
    const std::uint64_t rank = in.u64();
    std::vector<std::size_t> shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
      d = in.u64();
      n *= d;
    }
    std::vector<double> data(n);
    for (auto& v : data) v = std::bit_cast<double>(in.u64());
    params.insert(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (!in.done()) throw MissingArtifact("trailing bytes after checkpoint payload");
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MissingArtifact("cannot open checkpoint for writing: " + path.string());
  const std::string bytes = encode_checkpoint(params);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw MissingArtifact("failed writing checkpoint: " + path.string());
}

ParamSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("checkpoint not found: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace vod
