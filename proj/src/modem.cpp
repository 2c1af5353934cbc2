#include "fdsim/modem.hpp"

#include <cmath>
#include <stdexcept>

namespace fdsim {

namespace {

// Binary-reflected Gray sequence of length 2^b, value at rank r is the label
// whose PAM level is (2r - (2^b - 1)).
std::vector<int> gray_sequence(int b) {
  int n = 1 << b;
  std::vector<int> g(n);
  for (int r = 0; r < n; ++r) g[r] = r ^ (r >> 1);
  return g;
}

}  // namespace

QamMapper::QamMapper(int order) : order_(order) {
  if (order != 4 && order != 16 && order != 64)
    throw std::invalid_argument("QamMapper: order must be 4, 16 or 64");
  bits_per_symbol_ = static_cast<int>(std::lround(std::log2(order)));
  axis_bits_ = bits_per_symbol_ / 2;
  int levels_per_axis = 1 << axis_bits_;
  // Unit average energy: E|s|^2 = 2 * mean(level^2) * scale^2 = 1.
  double mean_sq = 0.0;
  for (int r = 0; r < levels_per_axis; ++r) {
    double level = 2.0 * r - (levels_per_axis - 1);
    mean_sq += level * level;
  }
  mean_sq /= levels_per_axis;
  scale_ = 1.0 / std::sqrt(2.0 * mean_sq);

  levels_.assign(levels_per_axis, 0.0);
  auto gray = gray_sequence(axis_bits_);
  for (int r = 0; r < levels_per_axis; ++r)
    levels_[gray[r]] = (2.0 * r - (levels_per_axis - 1)) * scale_;

  points_ = CVec(order_);
  for (int s = 0; s < order_; ++s) {
    int i_bits = 0, q_bits = 0;
    for (int b = 0; b < axis_bits_; ++b) {
      i_bits |= ((s >> b) & 1) << b;
      q_bits |= ((s >> (axis_bits_ + b)) & 1) << b;
    }
    points_[s] = cplx(levels_[i_bits], levels_[q_bits]);
  }
}

CVec QamMapper::map(const std::vector<std::uint8_t>& bits) const {
  if (bits.size() % bits_per_symbol_ != 0)
    throw std::invalid_argument("qam_map: bit count not divisible by bits/symbol");
  Eigen::Index n_sym = static_cast<Eigen::Index>(bits.size()) / bits_per_symbol_;
  CVec out(n_sym);
  for (Eigen::Index s = 0; s < n_sym; ++s) {
    int idx = 0;
    for (int b = 0; b < bits_per_symbol_; ++b)
      idx |= (bits[s * bits_per_symbol_ + b] & 1) << b;
    out[s] = points_[idx];
  }
  return out;
}

std::vector<std::uint8_t> QamMapper::demap_hard(const CVec& symbols) const {
  std::vector<std::uint8_t> bits(symbols.size() * bits_per_symbol_);
  int levels_per_axis = 1 << axis_bits_;
  auto gray = gray_sequence(axis_bits_);
  auto axis_decide = [&](double v) {
    // Nearest PAM level; per-axis decision equals full nearest-point search
    // on a square grid.
    int r = static_cast<int>(std::lround((v / scale_ + (levels_per_axis - 1)) / 2.0));
    r = std::max(0, std::min(levels_per_axis - 1, r));
    return gray[r];
  };
  for (Eigen::Index s = 0; s < symbols.size(); ++s) {
    if (!std::isfinite(symbols[s].real()) || !std::isfinite(symbols[s].imag()))
      throw std::invalid_argument("qam_demap: non-finite symbol");
    int i_bits = axis_decide(symbols[s].real());
    int q_bits = axis_decide(symbols[s].imag());
    for (int b = 0; b < axis_bits_; ++b) {
      bits[s * bits_per_symbol_ + b] = static_cast<std::uint8_t>((i_bits >> b) & 1);
      bits[s * bits_per_symbol_ + axis_bits_ + b] =
          static_cast<std::uint8_t>((q_bits >> b) & 1);
    }
  }
  return bits;
}

cplx QamMapper::slice(cplx y) const {
  CVec one(1);
  one[0] = y;
  auto bits = demap_hard(one);
  int idx = 0;
  for (int b = 0; b < bits_per_symbol_; ++b) idx |= (bits[b] & 1) << b;
  return points_[idx];
}

void AllocationMap::validate() const {
  if (static_cast<Eigen::Index>(tone_index.size()) != n_data)
    throw std::invalid_argument("allocation: index list size != M");
  std::vector<bool> used(n_grid, false);
  for (auto t : tone_index) {
    if (t < 0 || t >= n_grid) throw std::out_of_range("allocation: tone index out of range");
    if (used[t]) throw std::invalid_argument("allocation: duplicate tone index");
    used[t] = true;
  }
}

AllocationMap AllocationMap::localized(Eigen::Index n_grid, Eigen::Index n_data) {
  if (n_data > n_grid) throw std::invalid_argument("allocation: M > N");
  AllocationMap a;
  a.n_grid = n_grid;
  a.n_data = n_data;
  Eigen::Index start = (n_grid - n_data) / 2;
  for (Eigen::Index m = 0; m < n_data; ++m) a.tone_index.push_back(start + m);
  return a;
}

AllocationMap AllocationMap::interleaved(Eigen::Index n_grid, Eigen::Index n_data) {
  if (n_data > n_grid) throw std::invalid_argument("allocation: M > N");
  AllocationMap a;
  a.n_grid = n_grid;
  a.n_data = n_data;
  for (Eigen::Index m = 0; m < n_data; ++m)
    a.tone_index.push_back((m * n_grid) / n_data);
  a.validate();
  return a;
}

CVec AllocationMap::map(const CVec& x) const {
  if (x.size() != n_data) throw std::invalid_argument("allocation map: length != M");
  CVec y = CVec::Zero(n_grid);
  for (Eigen::Index m = 0; m < n_data; ++m) y[tone_index[m]] = x[m];
  return y;
}

CVec AllocationMap::demap(const CVec& y) const {
  if (y.size() != n_grid) throw std::invalid_argument("allocation demap: length != N");
  CVec x(n_data);
  for (Eigen::Index m = 0; m < n_data; ++m) x[m] = y[tone_index[m]];
  return x;
}

CVec dft_spread(const CVec& x) { return dft(x, x.size()); }
CVec dft_despread(const CVec& x) { return idft(x, x.size()); }

CVec to_time_with_cp(const CVec& d, Eigen::Index cp_len, Eigen::Index channel_taps) {
  if (cp_len < 0 || cp_len > d.size())
    throw std::invalid_argument("to_time_with_cp: bad cp length");
  if (channel_taps > 0 && cp_len < channel_taps - 1)
    throw std::invalid_argument("to_time_with_cp: cp shorter than channel memory");
  CVec body = idft(d, d.size());
  CVec out(d.size() + cp_len);
  out.head(cp_len) = body.tail(cp_len);
  out.tail(d.size()) = body;
  return out;
}

CVec strip_cp_and_dft(const CVec& y, Eigen::Index n, Eigen::Index cp_len) {
  if (y.size() != n + cp_len)
    throw std::invalid_argument("strip_cp_and_dft: length != N + cp");
  CVec body = y.segment(cp_len, n);
  return dft(body, n);
}

}  // namespace fdsim
