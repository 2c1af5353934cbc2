#pragma once

#include <vector>

#include "fdsim/numerics.hpp"

namespace fdsim {

struct ScenarioConfig;

/// One quasi-static realization of every link in the cell. A single tap
/// vector is stored per link, so uplink and downlink responses are identical
/// by construction. Under full UE-array correlation (rho = 1) all antennas of
/// a UE share the link taps; for rho < 1 per-antenna deviations are mixed in.
struct ChannelRealization {
  Eigen::Index n_enb = 0;    // eNB antennas
  Eigen::Index n_ue = 0;     // UEs
  Eigen::Index n_ue_ant = 0; // antennas per UE
  Eigen::Index n_taps = 0;   // L
  double rho = 1.0;
  double xlink_gain = 1.0;   // linear amplitude scale on UE-UE links

  std::vector<CVec> enb_ue;      // [j * n_ue + i], base taps, length L
  std::vector<CVec> enb_ue_dev;  // rho < 1 only: [(j * n_ue + i) * n_ue_ant + k]
  std::vector<CVec> ue_ue;       // [q * n_ue + l], q != l, scaled by xlink_gain
  std::vector<CVec> ue_ue_dev;   // rho < 1 only, same layout as enb_ue_dev

  const CVec& enb_taps(Eigen::Index j, Eigen::Index i) const {
    return enb_ue[j * n_ue + i];
  }
  const CVec& ue_taps(Eigen::Index q, Eigen::Index l) const {
    return ue_ue[q * n_ue + l];
  }
  /// Taps seen by antenna k of UE i on the eNB link; equals enb_taps at rho=1.
  CVec enb_taps_ant(Eigen::Index j, Eigen::Index i, Eigen::Index k) const;
  CVec ue_taps_ant(Eigen::Index q, Eigen::Index l, Eigen::Index k) const;
};

/// Per-subcarrier frequency responses derived from the base taps (the CSI
/// view). Column m of enb_ue[l] is the Ne-vector uplink channel of UE l on
/// tone m; the downlink row is its plain transpose.
struct FreqChannelSet {
  Eigen::Index n_fft = 0;
  std::vector<CMat> enb_ue;  // per UE: Ne x N
  std::vector<CVec> ue_ue;   // [q * n_ue + l]: N
  Eigen::Index n_ue = 0;

  /// Uplink column H_l(m) (Ne x 1).
  CVec uplink_col(Eigen::Index l, Eigen::Index m) const { return enb_ue[l].col(m); }
  /// Downlink row H_l(m) (1 x Ne) = transpose of the uplink column.
  Eigen::RowVectorXcd downlink_row(Eigen::Index l, Eigen::Index m) const {
    return enb_ue[l].col(m).transpose();
  }
};

/// Draw i.i.d. CN(0, 1/L) taps per link (uniform power delay profile, unit
/// average link power). UE-UE links are scaled by the configured cross gain.
ChannelRealization draw_channels(RngStream& rng, const ScenarioConfig& cfg);

/// y = h * s + n over the CP-extended signal (linear convolution truncated to
/// the signal length; equals circular convolution on the body when
/// cp_len >= L-1). Pass n0 = 0 or rng = nullptr for a noiseless pass.
CVec apply_channel(const CVec& sig, const CVec& taps, RngStream* rng, double n0);

/// Plain zero-padded N-point DFT of each link's taps.
FreqChannelSet freq_response(const ChannelRealization& ch, Eigen::Index n_fft);

}  // namespace fdsim
