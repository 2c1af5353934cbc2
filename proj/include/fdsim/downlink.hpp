#pragma once

#include <vector>

#include "fdsim/channel.hpp"
#include "fdsim/impairments.hpp"
#include "fdsim/modem.hpp"
#include "fdsim/numerics.hpp"
#include "fdsim/scenario.hpp"

namespace fdsim {

/// Per-tone SVD precoding state for the occupied tones. Data index m runs
/// over the allocation (0..M-1); the grid tone is alloc.tone_index[m].
struct PrecoderSet {
  Eigen::Index n_ue = 0;
  Eigen::Index n_enb = 0;
  Eigen::Index n_tones = 0;          // M
  std::vector<CMat> p;               // per data tone: Ne x K, power-scaled columns
  CMat u;                            // K x M unit-modulus left factors
  Eigen::MatrixXd e;                 // K x M singular values
  Eigen::MatrixXd beta;              // K x M power weights
  Eigen::MatrixXd e_eff;             // K x M effective diagonal gains E * beta
  int regularized_tones = 0;         // tones where the V-stack needed regularizing

  CVec ue_column(Eigen::Index ue, Eigen::Index m) const { return p[m].col(ue); }
};

/// Rank-1 SVD per UE row, stacked right-singular vectors, pseudo-inverse
/// precoding with the selected power policy. Every UE is assumed active on
/// every listed tone. n0 is only used by the water-filling policy.
PrecoderSet build_precoders(const FreqChannelSet& hf, const AllocationMap& alloc,
                            PowerPolicy policy, double n0);

/// e_j = sum_i A^i z_{i,j} with z_i(m) = P_i(m) x_i(m): per-antenna N-grids
/// (rows) from the per-UE spread symbol vectors.
CMat precode_and_superpose(const std::vector<CVec>& spread_per_ue,
                           const PrecoderSet& prec,
                           const std::vector<AllocationMap>& allocs);

/// Multiply the received per-tone scalars by the conjugated left factors.
CVec ue_post_process(const CVec& y_tones, const CVec& u_tones);

/// Scalar frequency-domain MMSE: x(m) = conj(g) y(m) / (|g|^2 + n0).
/// n0 = 0 degenerates to zero-forcing.
CVec mmse_equalize_diag(const CVec& y_tones, const CVec& gains, double n0);

/// eNB downlink transmit state for one slot.
struct EnbTx {
  std::vector<CVec> spread_per_ue;      // x_bar_i, length M each
  std::vector<TxChainSignal> chains;    // per antenna, CP-extended time signals
};

/// Full eNB transmit chain: QAM, DFT spreading, per-tone precoding,
/// superposition, N-point IDFT, CP, PA and transmit-noise bookkeeping.
EnbTx build_enb_downlink_tx(const ScenarioConfig& cfg, const PrecoderSet& prec,
                            const AllocationMap& alloc, const QamMapper& mapper,
                            const std::vector<std::vector<std::uint8_t>>& bits_per_ue,
                            RngStream& tx_rng);

}  // namespace fdsim
