#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "fdsim/numerics.hpp"

using namespace fdsim;

namespace {

// Brute-force DFT matrix, the independent oracle for the transform path.
CMat dft_matrix(Eigen::Index n) {
  CMat f(n, n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index t = 0; t < n; ++t)
      f(k, t) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                           -2.0 * M_PI * static_cast<double>(k * t) / static_cast<double>(n));
  return f;
}

CVec random_cvec(RngStream& rng, Eigen::Index n) {
  return rng.complex_gaussian_vector(n, 1.0);
}

}  // namespace

TEST_CASE("dft trivial cases") {
  CVec one(1);
  one[0] = cplx(0.7, -0.3);
  CHECK((dft(one, 1) - one).norm() == doctest::Approx(0.0));

  CVec imp = CVec::Zero(4);
  imp[0] = 1.0;
  CVec spec = dft(imp, 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(spec[k].real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(spec[k].imag() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("dft matches the DFT-matrix oracle at size 256") {
  RngStream rng(11, 0);
  CVec x = random_cvec(rng, 256);
  CVec got = dft(x, 256);
  CVec want = dft_matrix(256) * x;
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("idft round trip and matrix oracle") {
  RngStream rng(12, 0);
  CVec x = random_cvec(rng, 256);
  CHECK((idft(dft(x, 256), 256) - x).cwiseAbs().maxCoeff() < 1e-12);

  CVec c = CVec::Constant(8, cplx(1.0, 0.0));
  CVec t = idft(c, 8);
  CHECK(std::abs(t[0] - std::sqrt(8.0)) < 1e-12);
  for (int i = 1; i < 8; ++i) CHECK(std::abs(t[i]) < 1e-12);

  CVec y = random_cvec(rng, 180);
  CVec want = dft_matrix(180).adjoint() * y;
  CHECK((idft(y, 180) - want).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("transforms are unitary and validate sizes") {
  RngStream rng(13, 0);
  for (Eigen::Index n : {2, 7, 90, 180, 256}) {
    CVec x = random_cvec(rng, n);
    CHECK(dft(x, n).norm() == doctest::Approx(x.norm()).epsilon(1e-12));
  }
  CVec x = random_cvec(rng, 5);
  CHECK_THROWS_AS((void)dft(x, 4), std::invalid_argument);
  CHECK_THROWS_AS((void)idft(x, 6), std::invalid_argument);
}

TEST_CASE("svd trivial and analytic rank-1 cases") {
  SvdResult id = svd(CMat::Identity(2, 2));
  CHECK(id.s[0] == doctest::Approx(1.0));
  CHECK(id.s[1] == doctest::Approx(1.0));

  RngStream rng(14, 0);
  CMat h(1, 4);
  for (int j = 0; j < 4; ++j) h(0, j) = rng.complex_gaussian(1.0);
  SvdResult r = svd(h);
  CHECK(r.s.size() == 1);
  CHECK(r.s[0] == doctest::Approx(h.norm()).epsilon(1e-12));
  CMat recon = r.u * r.s[0] * r.v.adjoint();
  CHECK((recon - h).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(r.u(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("svd reconstruction with an independent eigensolver oracle") {
  RngStream rng(15, 0);
  CMat h(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) h(i, j) = rng.complex_gaussian(1.0);
  SvdResult r = svd(h);
  CMat recon = r.u * r.s.cast<cplx>().asDiagonal() * r.v.adjoint();
  CHECK((recon - h).cwiseAbs().maxCoeff() < 1e-10);
  // Singular values squared against the eigenvalues of H H^H.
  Eigen::SelfAdjointEigenSolver<CMat> eig(h * h.adjoint());
  RVec ev = eig.eigenvalues().reverse();
  for (int i = 0; i < 4; ++i)
    CHECK(r.s[i] * r.s[i] == doctest::Approx(ev[i]).epsilon(1e-9));
}

TEST_CASE("svd orthonormality and ordering over random shapes") {
  RngStream rng(16, 0);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.next_u64() % 8);
    Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next_u64() % 8);
    CMat h(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) h(i, j) = rng.complex_gaussian(1.0);
    SvdResult r = svd(h);
    CMat recon = r.u * r.s.cast<cplx>().asDiagonal() * r.v.adjoint();
    CHECK((recon - h).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((r.u.adjoint() * r.u - CMat::Identity(r.u.cols(), r.u.cols()))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    CHECK((r.v.adjoint() * r.v - CMat::Identity(r.v.cols(), r.v.cols()))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    for (Eigen::Index i = 0; i + 1 < r.s.size(); ++i) CHECK(r.s[i] >= r.s[i + 1]);
    CHECK(r.s.minCoeff() >= 0.0);
  }
  CMat bad(1, 1);
  bad(0, 0) = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_THROWS_AS((void)svd(bad), std::invalid_argument);
}

TEST_CASE("pinv closed forms") {
  RngStream rng(17, 0);
  CMat a(3, 3);
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = rng.complex_gaussian(1.0);
  CHECK((pinv(a) - a.inverse()).cwiseAbs().maxCoeff() < 1e-9);

  CMat z = CMat::Zero(2, 5);
  CMat zp = pinv(z);
  CHECK(zp.rows() == 5);
  CHECK(zp.cols() == 2);
  CHECK(zp.cwiseAbs().maxCoeff() == 0.0);

  CMat w(2, 4);
  for (int i = 0; i < 8; ++i) w(i / 4, i % 4) = rng.complex_gaussian(1.0);
  CMat right = w.adjoint() * (w * w.adjoint()).inverse();
  CHECK((pinv(w) - right).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("pinv satisfies Moore-Penrose on rank-deficient matrices") {
  RngStream rng(18, 0);
  for (int rep = 0; rep < 10; ++rep) {
    CMat u(4, 2), v(3, 2);
    for (int i = 0; i < 8; ++i) u(i / 2, i % 2) = rng.complex_gaussian(1.0);
    for (int i = 0; i < 6; ++i) v(i / 2, i % 2) = rng.complex_gaussian(1.0);
    CMat a = u * v.adjoint();  // 4x3, rank <= 2
    CMat ap = pinv(a);
    CHECK((a * ap * a - a).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((ap * a * ap - ap).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(((a * ap) - (a * ap).adjoint()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(((ap * a) - (ap * a).adjoint()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("complex gaussian statistics and determinism") {
  RngStream rng(19, 0);
  CHECK(rng.complex_gaussian_vector(16, 0.0).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS((void)rng.complex_gaussian(-1.0), std::invalid_argument);

  RngStream big(19, 1);
  const Eigen::Index n = 1000000;
  cplx mean(0, 0);
  double pow_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cplx z = big.complex_gaussian(1.0);
    mean += z;
    pow_sum += std::norm(z);
  }
  mean /= static_cast<double>(n);
  CHECK(std::abs(mean) < 5e-3);
  CHECK(pow_sum / static_cast<double>(n) > 0.995);
  CHECK(pow_sum / static_cast<double>(n) < 1.005);

  RngStream a(42, 9), b(42, 9);
  for (int i = 0; i < 100; ++i) CHECK(a.complex_gaussian(2.0) == b.complex_gaussian(2.0));
  // A different stream id must decouple.
  RngStream a2(42, 9), c(42, 10);
  bool all_equal = true;
  for (int i = 0; i < 100; ++i)
    if (a2.complex_gaussian(2.0) != c.complex_gaussian(2.0)) all_equal = false;
  CHECK_FALSE(all_equal);
}
