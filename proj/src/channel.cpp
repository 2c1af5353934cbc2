#include "fdsim/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "fdsim/scenario.hpp"

namespace fdsim {

namespace {

CVec draw_taps(RngStream& rng, Eigen::Index n_taps) {
  // UPDP: each tap CN(0, 1/L), unit average total power.
  return rng.complex_gaussian_vector(n_taps, 1.0 / static_cast<double>(n_taps));
}

}  // namespace

CVec ChannelRealization::enb_taps_ant(Eigen::Index j, Eigen::Index i, Eigen::Index k) const {
  const CVec& base = enb_ue[j * n_ue + i];
  if (rho >= 1.0) return base;
  const CVec& dev = enb_ue_dev[(j * n_ue + i) * n_ue_ant + k];
  return rho * base + std::sqrt(1.0 - rho * rho) * dev;
}

CVec ChannelRealization::ue_taps_ant(Eigen::Index q, Eigen::Index l, Eigen::Index k) const {
  const CVec& base = ue_ue[q * n_ue + l];
  if (rho >= 1.0) return base;
  const CVec& dev = ue_ue_dev[(q * n_ue + l) * n_ue_ant + k];
  return rho * base + std::sqrt(1.0 - rho * rho) * dev;
}

ChannelRealization draw_channels(RngStream& rng, const ScenarioConfig& cfg) {
  if (cfg.n_taps < 1 || cfg.n_subcarriers < cfg.n_taps)
    throw std::invalid_argument("draw_channels: need 1 <= L <= N");
  ChannelRealization ch;
  ch.n_enb = cfg.n_enb_antennas;
  ch.n_ue = cfg.n_ue;
  ch.n_ue_ant = cfg.n_ue_antennas;
  ch.n_taps = cfg.n_taps;
  ch.rho = cfg.ue_corr_rho;
  ch.xlink_gain = std::pow(10.0, cfg.ue_xlink_gain_db / 20.0);

  for (Eigen::Index j = 0; j < ch.n_enb; ++j)
    for (Eigen::Index i = 0; i < ch.n_ue; ++i) ch.enb_ue.push_back(draw_taps(rng, ch.n_taps));

  for (Eigen::Index q = 0; q < ch.n_ue; ++q)
    for (Eigen::Index l = 0; l < ch.n_ue; ++l) {
      if (q == l) {
        ch.ue_ue.push_back(CVec::Zero(ch.n_taps));
      } else {
        ch.ue_ue.push_back(ch.xlink_gain * draw_taps(rng, ch.n_taps));
      }
    }

  if (ch.rho < 1.0) {
    for (Eigen::Index j = 0; j < ch.n_enb; ++j)
      for (Eigen::Index i = 0; i < ch.n_ue; ++i)
        for (Eigen::Index k = 0; k < ch.n_ue_ant; ++k)
          ch.enb_ue_dev.push_back(draw_taps(rng, ch.n_taps));
    for (Eigen::Index q = 0; q < ch.n_ue; ++q)
      for (Eigen::Index l = 0; l < ch.n_ue; ++l)
        for (Eigen::Index k = 0; k < ch.n_ue_ant; ++k)
          ch.ue_ue_dev.push_back(ch.xlink_gain * draw_taps(rng, ch.n_taps));
  }
  return ch;
}

CVec apply_channel(const CVec& sig, const CVec& taps, RngStream* rng, double n0) {
  CVec y = CVec::Zero(sig.size());
  for (Eigen::Index b = 0; b < taps.size(); ++b) {
    if (taps[b] == cplx(0.0, 0.0)) continue;
    y.tail(sig.size() - b) += taps[b] * sig.head(sig.size() - b);
  }
  if (rng != nullptr && n0 > 0.0) y += rng->complex_gaussian_vector(sig.size(), n0);
  return y;
}

FreqChannelSet freq_response(const ChannelRealization& ch, Eigen::Index n_fft) {
  FreqChannelSet f;
  f.n_fft = n_fft;
  f.n_ue = ch.n_ue;
  auto taps_to_freq = [&](const CVec& taps) {
    CVec padded = CVec::Zero(n_fft);
    padded.head(taps.size()) = taps;
    return dft_plain(padded, n_fft);
  };
  for (Eigen::Index l = 0; l < ch.n_ue; ++l) {
    CMat m(ch.n_enb, n_fft);
    for (Eigen::Index j = 0; j < ch.n_enb; ++j)
      m.row(j) = taps_to_freq(ch.enb_taps(j, l)).transpose();
    f.enb_ue.push_back(std::move(m));
  }
  for (Eigen::Index q = 0; q < ch.n_ue; ++q)
    for (Eigen::Index l = 0; l < ch.n_ue; ++l)
      f.ue_ue.push_back(taps_to_freq(ch.ue_taps(q, l)));
  return f;
}

}  // namespace fdsim
