#pragma once

#include <cstdint>
#include <vector>

#include "fdsim/numerics.hpp"

namespace fdsim {

/// Gray-mapped square QAM with unit average symbol energy.
///
/// Per-axis Gray table (binary-reflected, LSB-first within the axis group):
///   4-QAM : 0 -> -1, 1 -> +1                          scale 1/sqrt(2)
///   16-QAM: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3    scale 1/sqrt(10)
///   64-QAM: 000 -3 ... Gray order ... 100 -> +7       scale 1/sqrt(42)
/// A symbol consumes 2*b bits [i0..i_{b-1}, q0..q_{b-1}]: first group -> I,
/// second -> Q. So 16-QAM bits 0000 map to (-3-3j)/sqrt(10).
class QamMapper {
 public:
  explicit QamMapper(int order);

  int order() const { return order_; }
  int bits_per_symbol() const { return bits_per_symbol_; }

  CVec map(const std::vector<std::uint8_t>& bits) const;
  std::vector<std::uint8_t> demap_hard(const CVec& symbols) const;

  /// Nearest constellation point (used for SIC re-modulation).
  cplx slice(cplx y) const;
  const CVec& constellation() const { return points_; }

 private:
  int order_;
  int bits_per_symbol_;
  int axis_bits_;
  double scale_;
  std::vector<double> levels_;  // Gray-ordered PAM levels, index = axis bits
  CVec points_;                 // all `order` points, index = symbol bits
};

/// N x M subcarrier selection stored as the grid index of each data tone.
/// Application is gather/scatter; the deallocation map is the transpose.
struct AllocationMap {
  Eigen::Index n_grid = 0;  // N
  Eigen::Index n_data = 0;  // M
  std::vector<Eigen::Index> tone_index;  // size M, strictly one grid slot each

  static AllocationMap localized(Eigen::Index n_grid, Eigen::Index n_data);
  static AllocationMap interleaved(Eigen::Index n_grid, Eigen::Index n_data);

  CVec map(const CVec& x) const;    // M -> N, unselected tones exactly zero
  CVec demap(const CVec& y) const;  // N -> M
  void validate() const;
};

/// M-point DFT spreading, x_bar = F_M x (unitary).
CVec dft_spread(const CVec& x);
/// Inverse of dft_spread.
CVec dft_despread(const CVec& x);

/// N-point IDFT plus cyclic prefix. If channel_taps > 0 the CP is checked
/// against the channel memory (cp_len >= taps-1), since a shorter CP breaks
/// the circular-convolution model.
CVec to_time_with_cp(const CVec& d, Eigen::Index cp_len, Eigen::Index channel_taps = 0);

/// Drop the cyclic prefix and return the N-point DFT of the body.
CVec strip_cp_and_dft(const CVec& y, Eigen::Index n, Eigen::Index cp_len);

}  // namespace fdsim
