// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vod/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vod/errors.hpp"
#include "vod/numerics.hpp"

namespace vod {
namespace {

std::string gru_name(const char* leaf) { return std::string("temporal.gru.") + leaf; }

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("temporal config: " + what);
}

// Gradient of a same-length zero-padded correlation w.r.t. kernel, bias and input.
void conv_backward(std::span<const double> x, std::span<const double> kernel, std::span<const double> d_pre,
                   Tensor& d_kernel, Tensor& d_bias, std::span<double> d_x) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(kernel.size());
  const std::ptrdiff_t half = w / 2;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double g = d_pre[i];
    if (g == 0.0) continue;
    d_bias[0] += g;
    for (std::ptrdiff_t j = 0; j < w; ++j) {
      const std::ptrdiff_t src = i + j - half;
      if (src < 0 || src >= n) continue;
      d_kernel[j] += g * x[src];
      d_x[src] += g * kernel[j];
    }
  }
}

}  // namespace

void TemporalConfig::validate() const {
  require(intervals > 0 && peak_intervals > 0 && days > 0 && hidden > 0, "dimensions must be positive");
  require(peak_intervals <= intervals, "K must not exceed T");
  require(conv_width % 2 == 1, "conv width must be odd");
  require(row_rows * row_cols == intervals, "T != R_row * R_column");
  require(col_rows * col_cols == intervals, "T != C_row * C_column");
  require(tile_rows_count * tile_rows * tile_cols_count * tile_cols == intervals,
          "T != (B_row1 * B_row2) * (B_column1 * B_column2)");
  require(row_rows == peak_intervals, "K != R_row");
  require(col_cols == peak_intervals, "K != C_column");
  require(tile_rows_count * tile_cols_count == peak_intervals, "K != B_row1 * B_column1");
}

TemporalConfig TemporalConfig::desk() { return TemporalConfig{}; }

TemporalConfig TemporalConfig::full_scale() {
  TemporalConfig c;
  c.intervals = 288;
  c.peak_intervals = 24;
  c.days = 15;
  c.row_rows = 24;
  c.row_cols = 12;
  c.col_rows = 12;
  c.col_cols = 24;
  c.tile_rows_count = 6;
  c.tile_rows = 4;
  c.tile_cols_count = 4;
  c.tile_cols = 3;
  return c;
}

ParamSet init_temporal_params(const TemporalConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t w = cfg.conv_width;
  const std::size_t h = cfg.hidden;
  const std::size_t in = cfg.gru_input();
  ParamSet p;
  p.insert("temporal.W_peak", xavier_init({w}, w, w, rng));
  p.insert("temporal.b_peak", Tensor({1}));
  p.insert("temporal.W_mean", xavier_init({w}, w, w, rng));
  p.insert("temporal.b_mean", Tensor({1}));
  // The three pooled views are mixed as a 3 -> 1 linear map.
  p.insert("temporal.w_row", xavier_init({1}, 3, 1, rng));
  p.insert("temporal.w_column", xavier_init({1}, 3, 1, rng));
  p.insert("temporal.w_block", xavier_init({1}, 3, 1, rng));
  for (const char* gate : {"z", "r", "h"}) {
    p.insert(gru_name((std::string("W_") + gate).c_str()), xavier_init({h, in}, in, h, rng));
    p.insert(gru_name((std::string("U_") + gate).c_str()), xavier_init({h, h}, h, h, rng));
    p.insert(gru_name((std::string("b_") + gate).c_str()), Tensor({h}));
  }
  p.set_version(1);
  return p;
}

PeakSelection top_k_pool(std::span<const double> totals, std::span<const double> series, std::size_t k) {
  if (k > totals.size()) throw ConfigError("top-K pool: K exceeds the number of intervals");
  if (totals.size() != series.size()) throw ShapeError("top-K pool: totals and series lengths differ");
  std::vector<std::size_t> order(totals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return totals[a] > totals[b]; });
  PeakSelection sel;
  sel.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(sel.indices.begin(), sel.indices.end());
  sel.values.reserve(k);
  for (auto i : sel.indices) sel.values.push_back(series[i]);
  return sel;
}

std::vector<double> conv_relu(std::span<const double> x, std::span<const double> kernel, double bias,
                              std::vector<double>* pre) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(kernel.size());
  const std::ptrdiff_t half = w / 2;
  std::vector<double> out(x.size());
  if (pre) pre->resize(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = bias;
    for (std::ptrdiff_t j = 0; j < w; ++j) {
      const std::ptrdiff_t src = i + j - half;
      if (src >= 0 && src < n) s += kernel[j] * x[src];
    }
    if (pre) (*pre)[i] = s;
    out[i] = s > 0.0 ? s : 0.0;
  }
  return out;
}

PoolMix pool_mix(std::span<const double> ymc, const TemporalConfig& cfg, double w_row, double w_column,
                 double w_block) {
  if (ymc.size() != cfg.intervals) throw ShapeError("pool_mix: input length differs from T");
  const std::size_t k = cfg.peak_intervals;
  PoolMix out;
  out.row.assign(k, 0.0);
  out.column.assign(k, 0.0);
  out.block.assign(k, 0.0);
  out.row_arg.assign(k, 0);
  out.column_arg.assign(k, 0);
  out.block_arg.assign(k, 0);

  // Strict '>' keeps the first maximum on ties.
  for (std::size_t r = 0; r < cfg.row_rows; ++r) {
    std::size_t best = r * cfg.row_cols;
    for (std::size_t c = 1; c < cfg.row_cols; ++c) {
      const std::size_t pos = r * cfg.row_cols + c;
      if (ymc[pos] > ymc[best]) best = pos;
    }
    out.row[r] = ymc[best];
    out.row_arg[r] = best;
  }
  for (std::size_t c = 0; c < cfg.col_cols; ++c) {
    std::size_t best = c;
    for (std::size_t r = 1; r < cfg.col_rows; ++r) {
      const std::size_t pos = r * cfg.col_cols + c;
      if (ymc[pos] > ymc[best]) best = pos;
    }
    out.column[c] = ymc[best];
    out.column_arg[c] = best;
  }
  const std::size_t width = cfg.block_cols();
  for (std::size_t ti = 0; ti < cfg.tile_rows_count; ++ti) {
    for (std::size_t tj = 0; tj < cfg.tile_cols_count; ++tj) {
      const std::size_t slot = ti * cfg.tile_cols_count + tj;
      std::size_t best = (ti * cfg.tile_rows) * width + tj * cfg.tile_cols;
      for (std::size_t r = 0; r < cfg.tile_rows; ++r) {
        for (std::size_t c = 0; c < cfg.tile_cols; ++c) {
          const std::size_t pos = (ti * cfg.tile_rows + r) * width + tj * cfg.tile_cols + c;
          if (ymc[pos] > ymc[best]) best = pos;
        }
      }
      out.block[slot] = ymc[best];
      out.block_arg[slot] = best;
    }
  }
  out.mixed.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.mixed[i] = w_row * out.row[i] + w_column * out.column[i] + w_block * out.block[i];
  }
  return out;
}

GruWeights GruWeights::bind(const ParamSet& p) {
  return {&p.at("temporal.gru.W_z"), &p.at("temporal.gru.U_z"), &p.at("temporal.gru.b_z"),
          &p.at("temporal.gru.W_r"), &p.at("temporal.gru.U_r"), &p.at("temporal.gru.b_r"),
          &p.at("temporal.gru.W_h"), &p.at("temporal.gru.U_h"), &p.at("temporal.gru.b_h")};
}

GruStep gru_step(std::span<const double> input, std::span<const double> h_prev, const GruWeights& w) {
  const std::size_t h = w.b_z->size();
  if (h_prev.size() != h || input.size() != w.w_z->dim(1)) throw ShapeError("gru_step: dimension mismatch");
  GruStep s;
  s.z.resize(h);
  s.r.resize(h);
  s.candidate.resize(h);
  s.h.resize(h);

  matvec(*w.w_z, input, s.z);
  matvec(*w.u_z, h_prev, s.z, true);
  matvec(*w.w_r, input, s.r);
  matvec(*w.u_r, h_prev, s.r, true);
  for (std::size_t i = 0; i < h; ++i) {
    s.z[i] = sigmoid(s.z[i] + (*w.b_z)[i]);
    s.r[i] = sigmoid(s.r[i] + (*w.b_r)[i]);
  }
  std::vector<double> gated(h);
  for (std::size_t i = 0; i < h; ++i) gated[i] = s.r[i] * h_prev[i];
  matvec(*w.w_h, input, s.candidate);
  matvec(*w.u_h, gated, s.candidate, true);
  for (std::size_t i = 0; i < h; ++i) {
    s.candidate[i] = std::tanh(s.candidate[i] + (*w.b_h)[i]);
    s.h[i] = (1.0 - s.z[i]) * h_prev[i] + s.z[i] * s.candidate[i];
  }
  return s;
}

TemporalOutput temporal_forward(const RequestTensor& x, const TemporalConfig& cfg, const ParamSet& params,
                                const RequestTensor& peak_totals, bool keep_cache) {
  if (x.intervals() != cfg.intervals || x.days() < cfg.days) {
    throw ShapeError("temporal_forward: request tensor does not cover T intervals x D days");
  }
  if (peak_totals.users() != x.users() || peak_totals.days() < cfg.days ||
      peak_totals.intervals() != cfg.intervals) {
    throw ShapeError("temporal_forward: peak totals shape mismatch");
  }
  const Tensor& w_peak = params.at("temporal.W_peak");
  const double b_peak = params.at("temporal.b_peak")[0];
  const Tensor& w_mean = params.at("temporal.W_mean");
  const double b_mean = params.at("temporal.b_mean")[0];
  const double w_row = params.at("temporal.w_row")[0];
  const double w_column = params.at("temporal.w_column")[0];
  const double w_block = params.at("temporal.w_block")[0];
  const GruWeights gru = GruWeights::bind(params);

  const std::size_t users = x.users();
  const std::size_t k = cfg.peak_intervals;
  TemporalOutput out;
  out.embedding = Tensor::matrix(users, cfg.hidden);
  if (keep_cache) {
    out.cache.users = users;
    out.cache.days.resize(users);
    out.cache.x = x.day_range(0, cfg.days);
  }

  for (std::size_t u = 0; u < users; ++u) {
    std::vector<double> h(cfg.hidden, 0.0);
    if (keep_cache) out.cache.days[u].resize(cfg.days);
    for (std::size_t d = 0; d < cfg.days; ++d) {
      const auto series = x.series(u, d);
      PeakSelection peak = top_k_pool(peak_totals.series(u, d), series, k);
      std::vector<double> yp_pre, ymc_pre;
      std::vector<double> yp = conv_relu(peak.values, w_peak.values(), b_peak, &yp_pre);
      std::vector<double> ymc = conv_relu(series, w_mean.values(), b_mean, &ymc_pre);
      PoolMix pools = pool_mix(ymc, cfg, w_row, w_column, w_block);

      std::vector<double> input(2 * k);
      std::copy(yp.begin(), yp.end(), input.begin());
      std::copy(pools.mixed.begin(), pools.mixed.end(), input.begin() + static_cast<std::ptrdiff_t>(k));
      GruStep step = gru_step(input, h, gru);

      if (keep_cache) {
        TemporalDay& day = out.cache.days[u][d];
        day.peak_idx = std::move(peak.indices);
        day.yp_pre = std::move(yp_pre);
        day.ymc_pre = std::move(ymc_pre);
        day.ymc = std::move(ymc);
        day.pools = std::move(pools);
        day.input = std::move(input);
        day.h_prev = h;
        h = step.h;
        day.gru = std::move(step);
      } else {
        h = std::move(step.h);
      }
    }
    std::copy(h.begin(), h.end(), out.embedding.data() + u * cfg.hidden);
  }
  if (!out.embedding.all_finite()) throw NumericError("temporal_forward produced non-finite values");
  return out;
}

TemporalGradients temporal_backward(const TemporalCache& cache, const TemporalConfig& cfg, const ParamSet& params,
                                    const Tensor& d_embedding) {
  if (!cache.valid()) throw MissingArtifact("temporal_backward: forward cache missing");
  if (d_embedding.rank() != 2 || d_embedding.dim(0) != cache.users || d_embedding.dim(1) != cfg.hidden) {
    throw ShapeError("temporal_backward: upstream gradient shape " + d_embedding.shape_string());
  }
  const Tensor& w_peak = params.at("temporal.W_peak");
  const Tensor& w_mean = params.at("temporal.W_mean");
  const double w_row = params.at("temporal.w_row")[0];
  const double w_column = params.at("temporal.w_column")[0];
  const double w_block = params.at("temporal.w_block")[0];
  const GruWeights gru = GruWeights::bind(params);

  TemporalGradients out;
  Gradients& g = out.params;
  for (const auto& [name, t] : params) {
    if (std::string_view(name).starts_with("temporal.")) g.emplace(name, Tensor(t.shape()));
  }
  Tensor& d_w_peak = g.at("temporal.W_peak");
  Tensor& d_b_peak = g.at("temporal.b_peak");
  Tensor& d_w_mean = g.at("temporal.W_mean");
  Tensor& d_b_mean = g.at("temporal.b_mean");
  Tensor& d_w_row = g.at("temporal.w_row");
  Tensor& d_w_column = g.at("temporal.w_column");
  Tensor& d_w_block = g.at("temporal.w_block");
  Tensor& d_wz = g.at("temporal.gru.W_z");
  Tensor& d_uz = g.at("temporal.gru.U_z");
  Tensor& d_bz = g.at("temporal.gru.b_z");
  Tensor& d_wr = g.at("temporal.gru.W_r");
  Tensor& d_ur = g.at("temporal.gru.U_r");
  Tensor& d_br = g.at("temporal.gru.b_r");
  Tensor& d_wh = g.at("temporal.gru.W_h");
  Tensor& d_uh = g.at("temporal.gru.U_h");
  Tensor& d_bh = g.at("temporal.gru.b_h");

  const std::size_t hid = cfg.hidden;
  const std::size_t k = cfg.peak_intervals;
  out.input = RequestTensor(cache.users, cfg.days, cfg.intervals);

  std::vector<double> dh(hid), dh_prev(hid), dz(hid), da_h(hid), da_z(hid), da_r(hid), d_gated(hid), gated(hid);
  std::vector<double> d_input(2 * k), d_ymc(cfg.intervals), d_pre_mean(cfg.intervals), d_pre_peak(k), d_xk(k);

  for (std::size_t u = 0; u < cache.users; ++u) {
    std::copy_n(d_embedding.data() + u * hid, hid, dh.begin());
    for (std::size_t dd = cfg.days; dd-- > 0;) {
      const TemporalDay& day = cache.days[u][dd];
      const GruStep& s = day.gru;
      const auto& hp = day.h_prev;

      std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
      std::fill(d_input.begin(), d_input.end(), 0.0);
      std::fill(d_gated.begin(), d_gated.end(), 0.0);
      for (std::size_t i = 0; i < hid; ++i) {
        dz[i] = dh[i] * (s.candidate[i] - hp[i]);
        da_h[i] = dh[i] * s.z[i] * (1.0 - s.candidate[i] * s.candidate[i]);
        dh_prev[i] = dh[i] * (1.0 - s.z[i]);
        gated[i] = s.r[i] * hp[i];
      }
      outer_add(d_wh, da_h, day.input);
      outer_add(d_uh, da_h, gated);
      for (std::size_t i = 0; i < hid; ++i) d_bh[i] += da_h[i];
      matvec_transposed_add(*gru.w_h, da_h, d_input);
      matvec_transposed_add(*gru.u_h, da_h, d_gated);

      for (std::size_t i = 0; i < hid; ++i) {
        dh_prev[i] += d_gated[i] * s.r[i];
        da_r[i] = d_gated[i] * hp[i] * s.r[i] * (1.0 - s.r[i]);
        da_z[i] = dz[i] * s.z[i] * (1.0 - s.z[i]);
      }
      outer_add(d_wz, da_z, day.input);
      outer_add(d_uz, da_z, hp);
      outer_add(d_wr, da_r, day.input);
      outer_add(d_ur, da_r, hp);
      for (std::size_t i = 0; i < hid; ++i) {
        d_bz[i] += da_z[i];
        d_br[i] += da_r[i];
      }
      matvec_transposed_add(*gru.w_z, da_z, d_input);
      matvec_transposed_add(*gru.w_r, da_r, d_input);
      matvec_transposed_add(*gru.u_z, da_z, dh_prev);
      matvec_transposed_add(*gru.u_r, da_r, dh_prev);

      // Mean branch: mixing weights, pooled argmax routing, ReLU, convolution.
      std::fill(d_ymc.begin(), d_ymc.end(), 0.0);
      const PoolMix& pm = day.pools;
      for (std::size_t i = 0; i < k; ++i) {
        const double gm = d_input[k + i];
        d_w_row[0] += gm * pm.row[i];
        d_w_column[0] += gm * pm.column[i];
        d_w_block[0] += gm * pm.block[i];
        d_ymc[pm.row_arg[i]] += gm * w_row;
        d_ymc[pm.column_arg[i]] += gm * w_column;
        d_ymc[pm.block_arg[i]] += gm * w_block;
      }
      for (std::size_t t = 0; t < cfg.intervals; ++t) d_pre_mean[t] = day.ymc_pre[t] > 0.0 ? d_ymc[t] : 0.0;
      auto series = cache.x.series(u, dd);
      auto d_series = out.input.series(u, dd);
      conv_backward(series, w_mean.values(), d_pre_mean, d_w_mean, d_b_mean, d_series);

      // Peak branch, scattered back through the fixed peak indices.
      std::vector<double> xk(k);
      for (std::size_t i = 0; i < k; ++i) {
        xk[i] = series[day.peak_idx[i]];
        d_pre_peak[i] = day.yp_pre[i] > 0.0 ? d_input[i] : 0.0;
      }
      std::fill(d_xk.begin(), d_xk.end(), 0.0);
      conv_backward(xk, w_peak.values(), d_pre_peak, d_w_peak, d_b_peak, d_xk);
      for (std::size_t i = 0; i < k; ++i) d_series[day.peak_idx[i]] += d_xk[i];

      dh.swap(dh_prev);
    }
  }
  return out;
}

RequestTensor& RequestTensor::operator+=(const RequestTensor& other) {
  if (!same_shape(other)) throw ShapeError("request tensors differ in shape");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

RequestTensor RequestTensor::day_range(std::size_t first, std::size_t count) const {
  if (first + count > days_) throw ShapeError("day range exceeds request tensor");
  RequestTensor out(users_, count, intervals_);
  for (std::size_t u = 0; u < users_; ++u) {
    for (std::size_t d = 0; d < count; ++d) {
      auto src = series(u, first + d);
      std::copy(src.begin(), src.end(), out.series(u, d).begin());
    }
  }
  return out;
}

double RequestTensor::total() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

RequestTensor RequestTensor::from_tensor(const Tensor& t) {
  if (t.rank() != 3) throw ShapeError("request tensor must be rank 3");
  RequestTensor out(t.dim(0), t.dim(1), t.dim(2));
  std::copy(t.values().begin(), t.values().end(), out.data_.begin());
  return out;
}

}  // namespace vod
