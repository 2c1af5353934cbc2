#include "fdsim/numerics.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace fdsim {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed;
  std::uint64_t a = splitmix64(x);
  x ^= stream * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL;
  std::uint64_t b = splitmix64(x);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  gen_ = std::mt19937_64(seq);
}

std::uint64_t RngStream::next_u64() { return gen_(); }

double RngStream::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double RngStream::gaussian() {
  // Box-Muller, hand-rolled so draws are bit-identical across toolchains.
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  double r = std::sqrt(-2.0 * std::log(u1));
  double th = 2.0 * M_PI * u2;
  spare_ = r * std::sin(th);
  have_spare_ = true;
  return r * std::cos(th);
}

cplx RngStream::complex_gaussian(double variance) {
  if (variance < 0.0) throw std::invalid_argument("complex_gaussian: negative variance");
  if (variance == 0.0) return {0.0, 0.0};
  double s = std::sqrt(variance / 2.0);
  double re = gaussian();
  double im = gaussian();
  return {s * re, s * im};
}

CVec RngStream::complex_gaussian_vector(Eigen::Index n, double variance) {
  if (variance < 0.0) throw std::invalid_argument("complex_gaussian: negative variance");
  CVec out = CVec::Zero(n);
  if (variance == 0.0) return out;
  for (Eigen::Index i = 0; i < n; ++i) out[i] = complex_gaussian(variance);
  return out;
}

namespace {

// kissfft plans are cached per size inside the Eigen FFT object; keep one per
// thread so concurrent trials never share plan state.
Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> fft(Eigen::default_fft_impl<double>(),
                                      Eigen::FFT<double>::Unscaled);
  return fft;
}

void check_size(const CVec& x, Eigen::Index size, const char* op) {
  if (size <= 0 || x.size() != size)
    throw std::invalid_argument(std::string(op) + ": size mismatch");
}

}  // namespace

CVec dft_plain(const CVec& x, Eigen::Index size) {
  check_size(x, size, "dft");
  if (size == 1) return x;  // the backend cannot plan a length-1 transform
  std::vector<cplx> in(x.data(), x.data() + x.size());
  std::vector<cplx> out;
  fft_engine().fwd(out, in);
  return Eigen::Map<const CVec>(out.data(), size);
}

CVec idft_plain(const CVec& x, Eigen::Index size) {
  check_size(x, size, "idft");
  if (size == 1) return x;
  std::vector<cplx> in(x.data(), x.data() + x.size());
  std::vector<cplx> out;
  fft_engine().inv(out, in);
  return Eigen::Map<const CVec>(out.data(), size);
}

CVec dft(const CVec& x, Eigen::Index size) {
  return dft_plain(x, size) / std::sqrt(static_cast<double>(size));
}

CVec idft(const CVec& x, Eigen::Index size) {
  return idft_plain(x, size) / std::sqrt(static_cast<double>(size));
}

SvdResult svd(const CMat& h) {
  if (!h.allFinite()) throw std::invalid_argument("svd: non-finite input");
  SvdResult r;
  if (h.rows() == 1) {
    // Closed form for a row vector: h = 1 * ||h|| * (h^H/||h||)^H.
    double nrm = h.norm();
    r.s = RVec::Constant(1, nrm);
    r.u = CMat::Identity(1, 1);
    if (nrm > 0.0)
      r.v = h.adjoint() / nrm;
    else
      r.v = CMat::Identity(h.cols(), 1).leftCols(1);
    return r;
  }
  Eigen::JacobiSVD<CMat> solver(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  r.u = solver.matrixU();
  r.s = solver.singularValues();
  r.v = solver.matrixV();
  return r;
}

CMat pinv(const CMat& a) {
  if (!a.allFinite()) throw std::invalid_argument("pinv: non-finite input");
  SvdResult d = svd(a);
  double tol = std::numeric_limits<double>::epsilon() *
               static_cast<double>(std::max(a.rows(), a.cols())) *
               (d.s.size() > 0 ? d.s[0] : 0.0);
  CMat inv_s = CMat::Zero(d.s.size(), d.s.size());
  for (Eigen::Index i = 0; i < d.s.size(); ++i)
    if (d.s[i] > tol) inv_s(i, i) = 1.0 / d.s[i];
  return d.v * inv_s * d.u.adjoint();
}

}  // namespace fdsim
