#pragma once

#include <vector>

#include "fdsim/numerics.hpp"

namespace fdsim {

/// Phase response of a uniform linear array to a plane wave from `psi`
/// (radians off the array normal): entries exp(-j*2*pi*x*spacing*sin(psi)),
/// x = 0..n_r-1. The same factors weight the transmitted per-element copies
/// when the array steers a beam.
CVec steering_vector(double psi_rad, Eigen::Index n_r, double spacing_wl);

/// Constraint directions for a beamformer. Columns store the conjugated
/// array responses, so that C^H w reads out the plain (unconjugated) array
/// gains sum_k w_k alpha_k(psi) used by rx_combine / tx_steer.
struct SteeringMatrix {
  CMat columns;                 // Nr x Kc
  std::vector<double> angles;   // radians, look direction first
  double spacing_wl = 0.5;
};

/// Look direction first, then the directions to null.
SteeringMatrix make_steering(const std::vector<double>& angles_rad, Eigen::Index n_r,
                             double spacing_wl);

struct BeamformerState {
  CVec weights;       // W, length Nr
  CMat constraints;   // C (conjugated responses)
  CVec response;      // f = [1, 0, ..., 0]
  double spacing_wl = 0.5;
  double mu = 0.0;
  Eigen::Index iterations = 0;
  double final_residual = 0.0;  // max |C^H W - f| after the last iteration
  bool mu_stable = true;        // mu below 1/(3 trace(R)) check
  bool converged = true;

  /// Plain array gain toward psi: sum_k w_k alpha_k(psi).
  cplx gain(double psi_rad) const;
};

/// Quiescent constrained solution C (C^H C)^-1 f; also the initial state and
/// the fixed point of the constrained LMS when only constrained directions
/// carry structure.
BeamformerState quiescent_beamformer(const SteeringMatrix& steering);

/// Frost-style constrained LMS: gradient step on the combined output power
/// followed by exact projection back onto {W : C^H W = f}. Snapshots are
/// consumed column by column, cycling when iters exceeds their count.
BeamformerState clms_train(const SteeringMatrix& steering, const CMat& snapshots,
                           double mu, Eigen::Index iters);

/// |gain(psi)|^2 over a grid of angles.
RVec beam_pattern(const CVec& weights, double spacing_wl, const RVec& grid_rad);

/// Weighted sum of the per-antenna streams: y = sum_k w_k Y.row(k).
CVec rx_combine(const CMat& y_per_antenna, const CVec& weights);

/// Per-antenna transmit copies: row k = alpha_look[k] * w[k] * s.
CMat tx_steer(const CVec& s, const CVec& weights, const CVec& alpha_look);

struct DoaResult {
  std::vector<double> angles_rad;  // ascending, size n_sources when ok
  bool ok = false;
  int invalid_roots = 0;  // roots whose arcsine argument fell outside [-1, 1]
};

/// Root-form subspace DoA estimation from an Nr x T snapshot block.
DoaResult root_music_doa(const CMat& snapshots, int n_sources, double spacing_wl);

}  // namespace fdsim
