#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fdsim/numerics.hpp"

namespace fdsim {

/// Staged self-interference cancellation, matching the four simulated
/// receiver conditions: cancel nothing; cancel only the linear self/cross
/// components; cancel linear+nonlinear self-talk but no cross-talk; cancel
/// every modeled component down to the configured depth.
enum class SicMode { None, LinearOnly, NlNoCtc, Full };

SicMode sic_mode_from_string(const std::string& s);
std::string to_string(SicMode m);

/// Four-parameter AM/AM + AM/PM power-amplifier model on baseband samples:
///   A(r)   = x1 r^x2 / (1 + x3 r^x2) + x4 r
///   Phi(r) = y1 r^y2 / (1 + y3 r^y2) + y4 r   (radians)
/// Input back-off scales the drive: the PA sees s * 10^(-ibo/20) and the
/// output is rescaled so a perfectly linear PA would be the identity.
///
/// Default AM/AM is a monotone cubic compression with unit small-signal
/// gain; the default AM/PM is the classic solid-state fit with its
/// degree-based coefficients converted to radians.
struct PaModel {
  double x1 = -0.27, x2 = 3.0, x3 = 1.0, x4 = 1.0;
  double y1 = 4.6645 * M_PI / 180.0, y2 = 2.0965, y3 = 10.88,
         y4 = -0.003 * M_PI / 180.0;
  double input_backoff_db = 8.0;

  /// Checks AM/AM monotonicity over the operating range (throws otherwise).
  void validate(double peak_amplitude = 1.0) const;

  double am_am(double r) const;
  double am_pm(double r) const;
};

CVec pa_apply(const CVec& s, const PaModel& pa);

/// Direct coupling gains between the transmit and receive chains of one
/// transceiver: one short tap vector per (rx chain, tx chain) pair. The
/// shared-antenna (diagonal) pairs carry the self-talk power, the rest the
/// cross-talk power.
struct SiChannel {
  Eigen::Index n_chains = 0;
  Eigen::Index n_taps = 1;
  std::vector<CVec> taps;  // [rx * n_chains + tx]

  const CVec& pair(Eigen::Index rx, Eigen::Index tx) const {
    return taps[rx * n_chains + tx];
  }
};

/// Draw a coupling realization with the given self/cross powers (dB relative
/// to a unit-power transmit signal).
SiChannel draw_si_channel(RngStream& rng, Eigen::Index n_chains, double self_db,
                          double cross_db, Eigen::Index n_taps = 1);

/// Transmit-chain output split into what the canceller can address.
struct TxChainSignal {
  CVec pre_pa;    // digital baseband (known to the canceller)
  CVec post_pa;   // what actually reaches the antenna (sans tx noise)
  CVec linear;    // LS projection of post_pa onto pre_pa
  CVec nonlinear; // post_pa - linear
  CVec tx_noise;  // white noise at the configured EVM, also transmitted
};

/// Applies the PA (if any) and the EVM noise and precomputes the component
/// split used by add_self_interference.
TxChainSignal make_tx_chain(const CVec& baseband, const PaModel* pa,
                            double tx_evm_db, RngStream& rng);

/// Air signal for a chain: post_pa + tx_noise.
CVec tx_air_signal(const TxChainSignal& t);

/// Adds the residual self-interference seen by receive chain `rx` to `rx_sig`.
/// Components the mode cancels are attenuated by cancel_depth_db; everything
/// else leaks in at full strength.
CVec add_self_interference(const CVec& rx_sig, const std::vector<TxChainSignal>& own_tx,
                           const SiChannel& si, Eigen::Index rx, SicMode mode,
                           double cancel_depth_db);

/// k_B * T * B in watts.
double thermal_noise_power(double bandwidth_hz, double temp_k);

}  // namespace fdsim
