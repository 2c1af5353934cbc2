#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>

namespace fdsim {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

/// Counter-keyed random stream. Same (seed, stream) always produces the same
/// draws, independent of what other streams were consumed, so Monte Carlo
/// trials can be dispatched to worker threads in any order.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform();   // [0, 1)
  double gaussian();  // N(0, 1), Box-Muller on top of the u64 stream

  /// One CN(0, variance) draw: real and imaginary parts N(0, variance/2).
  cplx complex_gaussian(double variance);
  CVec complex_gaussian_vector(Eigen::Index n, double variance);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Unitary DFT: X[k] = (1/sqrt(n)) * sum_t x[t] e^{-j2pi kt/n}.
CVec dft(const CVec& x, Eigen::Index size);
/// Unitary inverse DFT; idft(dft(x)) == x.
CVec idft(const CVec& x, Eigen::Index size);

/// Plain (non-unitary) transforms used for channel frequency responses,
/// where H(m) = sum_b h[b] e^{-j2pi bm/n} must match the convolution theorem.
CVec dft_plain(const CVec& x, Eigen::Index size);
CVec idft_plain(const CVec& x, Eigen::Index size);

struct SvdResult {
  CMat u;  // m x r, orthonormal columns
  RVec s;  // r, nonnegative, descending
  CMat v;  // n x r, orthonormal columns
};

/// Thin SVD, H = U diag(S) V^H. 1xN rows take the closed rank-1 form.
SvdResult svd(const CMat& h);

/// Moore-Penrose pseudo-inverse via SVD thresholding.
CMat pinv(const CMat& a);

}  // namespace fdsim
