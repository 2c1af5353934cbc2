#pragma once

#include <vector>

#include "fdsim/channel.hpp"
#include "fdsim/impairments.hpp"
#include "fdsim/modem.hpp"
#include "fdsim/numerics.hpp"
#include "fdsim/scenario.hpp"
#include "fdsim/smart_antenna.hpp"

namespace fdsim {

/// One received subcarrier at the eNB: the Ne-vector sample, the channel
/// columns of the UEs still in play, and the noise level. Symbol power is
/// normalized to 1.
struct UplinkTone {
  CVec y;    // Ne
  CMat h;    // Ne x K_active
  double n0 = 0.0;
};

UplinkTone assemble_tone(const FreqChannelSet& hf, Eigen::Index tone,
                         const CVec& tx_tones, const CVec& noise);

struct MmseEstimate {
  cplx value;          // MMSE estimate (with its bias)
  double gain = 1.0;   // real signal coefficient; value/gain is unbiased
  bool regularized = false;
};

/// Linear MMSE for column l against the interference-plus-noise covariance
/// R = sum_{i != l} h_i h_i^H + n0 I (unit symbol power). A singular R at
/// n0 = 0 is ridge-regularized and flagged.
MmseEstimate mmse_detect_tone(const UplinkTone& t, Eigen::Index l);

/// The unscaled variant h_l^H R^-1 y used inside the cancellation loop.
cplx mmse_detect_tone_unscaled(const UplinkTone& t, Eigen::Index l);

struct SsicToneResult {
  std::vector<cplx> estimates;  // per UE, unbiased
  std::vector<cplx> decisions;  // per UE, sliced constellation points
  std::vector<Eigen::Index> detection_order;
  int regularized = 0;
};

/// Successive cancellation with optimal ordering on one tone: strongest
/// remaining column (largest norm) is detected, its hard re-modulated
/// decision is subtracted, and the last UE is resolved by matched-filter
/// combining. With `true_symbols` set, cancellation uses them instead
/// (genie mode).
SsicToneResult ssic_oo_detect(const UplinkTone& t, const QamMapper& mapper,
                              const CVec* true_symbols = nullptr);

/// UE uplink transmit state for one slot.
struct UeTx {
  std::vector<CVec> spread_per_ue;                 // x_bar_i, length M
  std::vector<CVec> base_time;                     // s_i before steering, Ncp
  std::vector<std::vector<TxChainSignal>> chains;  // [ue][antenna]
};

/// Full UE transmit chain: QAM, DFT spreading, allocation, N-point IDFT, CP,
/// beam steering across the Nr elements, PA and transmit noise per chain.
UeTx build_ue_uplink_tx(const ScenarioConfig& cfg, const AllocationMap& alloc,
                        const QamMapper& mapper,
                        const std::vector<BeamformerState>& beams,
                        const std::vector<std::vector<std::uint8_t>>& bits_per_ue,
                        RngStream& tx_rng);

}  // namespace fdsim
