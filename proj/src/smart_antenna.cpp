#include "fdsim/smart_antenna.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fdsim {

CVec steering_vector(double psi_rad, Eigen::Index n_r, double spacing_wl) {
  if (n_r < 1) throw std::invalid_argument("steering_vector: n_r must be >= 1");
  CVec a(n_r);
  double phase_step = -2.0 * M_PI * spacing_wl * std::sin(psi_rad);
  for (Eigen::Index x = 0; x < n_r; ++x)
    a[x] = std::polar(1.0, phase_step * static_cast<double>(x));
  return a;
}

SteeringMatrix make_steering(const std::vector<double>& angles_rad, Eigen::Index n_r,
                             double spacing_wl) {
  if (angles_rad.empty()) throw std::invalid_argument("make_steering: no angles");
  if (static_cast<Eigen::Index>(angles_rad.size()) > n_r)
    throw std::invalid_argument("make_steering: more constraints than elements");
  SteeringMatrix s;
  s.spacing_wl = spacing_wl;
  s.angles = angles_rad;
  s.columns = CMat(n_r, static_cast<Eigen::Index>(angles_rad.size()));
  for (std::size_t j = 0; j < angles_rad.size(); ++j)
    s.columns.col(static_cast<Eigen::Index>(j)) =
        steering_vector(angles_rad[j], n_r, spacing_wl).conjugate();
  return s;
}

cplx BeamformerState::gain(double psi_rad) const {
  CVec a = steering_vector(psi_rad, weights.size(), spacing_wl);
  return (a.transpose() * weights)(0);
}

namespace {

struct ConstraintOps {
  CMat c;
  CMat gram_inv_ct;  // (C^H C)^-1 C^H
  CVec quiescent;    // C (C^H C)^-1 f
};

ConstraintOps build_constraint_ops(const SteeringMatrix& steering) {
  ConstraintOps ops;
  ops.c = steering.columns;
  CMat gram = ops.c.adjoint() * ops.c;
  Eigen::LDLT<CMat> ldlt(gram);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12)
    throw std::invalid_argument("beamformer: constraint directions are not independent");
  ops.gram_inv_ct = ldlt.solve(ops.c.adjoint());
  CVec f = CVec::Zero(ops.c.cols());
  f[0] = cplx(1.0, 0.0);
  ops.quiescent = ops.c * ldlt.solve(f);
  return ops;
}

}  // namespace

BeamformerState quiescent_beamformer(const SteeringMatrix& steering) {
  auto ops = build_constraint_ops(steering);
  BeamformerState st;
  st.weights = ops.quiescent;
  st.constraints = steering.columns;
  st.response = CVec::Zero(steering.columns.cols());
  st.response[0] = cplx(1.0, 0.0);
  st.spacing_wl = steering.spacing_wl;
  st.final_residual = (st.constraints.adjoint() * st.weights - st.response)
                          .cwiseAbs()
                          .maxCoeff();
  return st;
}

BeamformerState clms_train(const SteeringMatrix& steering, const CMat& snapshots,
                           double mu, Eigen::Index iters) {
  if (snapshots.rows() != steering.columns.rows())
    throw std::invalid_argument("clms_train: snapshot rows != array size");
  if (snapshots.cols() < 1) throw std::invalid_argument("clms_train: no snapshots");
  auto ops = build_constraint_ops(steering);

  BeamformerState st = quiescent_beamformer(steering);
  st.mu = mu;
  st.iterations = iters;

  // Stability bound mu < 1 / (3 tr(R)) on the sample covariance.
  double trace_r = snapshots.squaredNorm() / static_cast<double>(snapshots.cols());
  st.mu_stable = (mu >= 0.0) && (trace_r <= 0.0 || mu < 1.0 / (3.0 * trace_r));

  CVec w = st.weights;
  for (Eigen::Index p = 0; p < iters; ++p) {
    CVec x = snapshots.col(p % snapshots.cols());
    cplx out = (x.transpose() * w)(0);  // plain combine, matches rx_combine
    CVec stepped = w - mu * out * x.conjugate();
    // Exact affine projection back onto C^H w = f.
    w = stepped - ops.c * (ops.gram_inv_ct * stepped) + ops.quiescent;
  }
  st.weights = w;
  st.final_residual =
      (st.constraints.adjoint() * w - st.response).cwiseAbs().maxCoeff();
  st.converged = w.allFinite() && st.final_residual < 1e-6;
  if (!w.allFinite())
    throw std::runtime_error("clms_train: diverged (mu too large), residual " +
                             std::to_string(st.final_residual));
  return st;
}

RVec beam_pattern(const CVec& weights, double spacing_wl, const RVec& grid_rad) {
  RVec out(grid_rad.size());
  for (Eigen::Index i = 0; i < grid_rad.size(); ++i) {
    CVec a = steering_vector(grid_rad[i], weights.size(), spacing_wl);
    out[i] = std::norm((a.transpose() * weights)(0));
  }
  return out;
}

CVec rx_combine(const CMat& y_per_antenna, const CVec& weights) {
  if (y_per_antenna.rows() != weights.size())
    throw std::invalid_argument("rx_combine: antenna count mismatch");
  return (weights.transpose() * y_per_antenna).transpose();
}

CMat tx_steer(const CVec& s, const CVec& weights, const CVec& alpha_look) {
  if (weights.size() != alpha_look.size())
    throw std::invalid_argument("tx_steer: weight/steering size mismatch");
  CMat out(weights.size(), s.size());
  for (Eigen::Index k = 0; k < weights.size(); ++k)
    out.row(k) = (alpha_look[k] * weights[k]) * s.transpose();
  return out;
}

DoaResult root_music_doa(const CMat& snapshots, int n_sources, double spacing_wl) {
  DoaResult res;
  Eigen::Index n_r = snapshots.rows();
  Eigen::Index t = snapshots.cols();
  if (t < n_r) throw std::invalid_argument("root_music: need T >= Nr snapshots");
  if (n_sources < 1 || n_sources >= n_r)
    throw std::invalid_argument("root_music: need 1 <= n_sources < Nr");

  CMat r = (snapshots * snapshots.adjoint()) / static_cast<double>(t);
  Eigen::SelfAdjointEigenSolver<CMat> eig(r);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("root_music: eigendecomposition failed");
  // Ascending eigenvalues: the first Nr - n_sources span the noise subspace.
  CMat en = eig.eigenvectors().leftCols(n_r - n_sources);
  CMat q = en * en.adjoint();

  // q(psi) = a(psi)^H Q a(psi) = sum_d c_d z^d with z = e^{-j2pi d sin(psi)};
  // c_d is the sum of the d-th superdiagonal of Q. Roots of z^{Nr-1} q(z).
  Eigen::Index deg = 2 * (n_r - 1);
  CVec coeffs = CVec::Zero(deg + 1);  // coeffs[i] multiplies z^i
  for (Eigen::Index d = -(n_r - 1); d <= n_r - 1; ++d) {
    cplx sum(0.0, 0.0);
    for (Eigen::Index x = 0; x < n_r; ++x) {
      Eigen::Index y = x + d;
      if (y >= 0 && y < n_r) sum += q(x, y);
    }
    coeffs[d + (n_r - 1)] = sum;
  }

  // Trim negligible leading/trailing coefficients before the companion solve.
  double cmax = coeffs.cwiseAbs().maxCoeff();
  if (cmax <= 0.0) throw std::runtime_error("root_music: degenerate polynomial");
  Eigen::Index lo = 0, hi = deg;
  while (hi > lo && std::abs(coeffs[hi]) < 1e-14 * cmax) --hi;
  while (lo < hi && std::abs(coeffs[lo]) < 1e-14 * cmax) ++lo;
  Eigen::Index n_roots = hi - lo;
  if (n_roots < n_sources) throw std::runtime_error("root_music: polynomial degenerated");

  CMat companion = CMat::Zero(n_roots, n_roots);
  for (Eigen::Index i = 0; i + 1 < n_roots; ++i) companion(i + 1, i) = 1.0;
  for (Eigen::Index i = 0; i < n_roots; ++i)
    companion(i, n_roots - 1) = -coeffs[lo + i] / coeffs[hi];
  Eigen::ComplexEigenSolver<CMat> roots(companion, false);
  if (roots.info() != Eigen::Success)
    throw std::runtime_error("root_music: root finding failed");

  // Rank roots by distance to the unit circle; conjugate-reciprocal pairs
  // share an angle, so skip near-duplicate angles while collecting.
  std::vector<cplx> all(roots.eigenvalues().data(),
                        roots.eigenvalues().data() + n_roots);
  std::sort(all.begin(), all.end(), [](cplx a, cplx b) {
    return std::abs(1.0 - std::abs(a)) < std::abs(1.0 - std::abs(b));
  });
  std::vector<double> angles;
  for (const auto& z : all) {
    if (static_cast<int>(angles.size()) == n_sources) break;
    double sine = -std::arg(z) / (2.0 * M_PI * spacing_wl);
    bool dup = false;
    for (double prev : angles)
      if (std::abs(std::sin(prev) - sine) < 1e-9) dup = true;
    if (dup) continue;
    if (std::abs(sine) > 1.0) {
      ++res.invalid_roots;
      continue;
    }
    angles.push_back(std::asin(sine));
  }
  res.ok = static_cast<int>(angles.size()) == n_sources;
  std::sort(angles.begin(), angles.end());
  res.angles_rad = std::move(angles);
  return res;
}

}  // namespace fdsim
