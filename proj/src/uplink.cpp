#include "fdsim/uplink.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fdsim {

UplinkTone assemble_tone(const FreqChannelSet& hf, Eigen::Index tone,
                         const CVec& tx_tones, const CVec& noise) {
  if (tx_tones.size() != hf.n_ue)
    throw std::invalid_argument("assemble_tone: one symbol per UE expected");
  UplinkTone t;
  t.h = CMat(hf.enb_ue[0].rows(), hf.n_ue);
  for (Eigen::Index i = 0; i < hf.n_ue; ++i) t.h.col(i) = hf.uplink_col(i, tone);
  if (noise.size() != t.h.rows())
    throw std::invalid_argument("assemble_tone: noise length != Ne");
  t.y = t.h * tx_tones + noise;
  return t;
}

namespace {

struct MmseContext {
  CVec r_inv_h;   // R^-1 h_l
  double h_r_h;   // h_l^H R^-1 h_l (real)
  bool regularized;
};

MmseContext mmse_context(const UplinkTone& t, Eigen::Index l) {
  Eigen::Index ne = t.h.rows();
  CMat r = CMat::Zero(ne, ne);
  for (Eigen::Index i = 0; i < t.h.cols(); ++i) {
    if (i == l) continue;
    r += t.h.col(i) * t.h.col(i).adjoint();
  }
  r += t.n0 * CMat::Identity(ne, ne);
  MmseContext ctx;
  ctx.regularized = false;
  Eigen::LDLT<CMat> ldlt(r);
  if (t.n0 <= 0.0 || ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-13) {
    // Fewer interferers than antennas at n0 = 0 leaves R singular.
    double scale = std::max(r.real().trace() / static_cast<double>(ne), 1.0);
    r += (1e-12 * scale) * CMat::Identity(ne, ne);
    ldlt.compute(r);
    ctx.regularized = true;
  }
  ctx.r_inv_h = ldlt.solve(t.h.col(l));
  ctx.h_r_h = t.h.col(l).dot(ctx.r_inv_h).real();
  return ctx;
}

}  // namespace

MmseEstimate mmse_detect_tone(const UplinkTone& t, Eigen::Index l) {
  auto ctx = mmse_context(t, l);
  MmseEstimate est;
  est.regularized = ctx.regularized;
  double denom = 1.0 + ctx.h_r_h;  // unit symbol power
  est.value = ctx.r_inv_h.dot(t.y) / denom;
  // r_inv_h.dot(y) = h^H R^-1 y; the coefficient on the true symbol follows.
  est.gain = ctx.h_r_h / denom;
  return est;
}

cplx mmse_detect_tone_unscaled(const UplinkTone& t, Eigen::Index l) {
  auto ctx = mmse_context(t, l);
  return ctx.r_inv_h.dot(t.y);
}

SsicToneResult ssic_oo_detect(const UplinkTone& t, const QamMapper& mapper,
                              const CVec* true_symbols) {
  Eigen::Index k = t.h.cols();
  if (k < 1) throw std::invalid_argument("ssic_oo_detect: empty tone");
  SsicToneResult res;
  res.estimates.assign(k, cplx(0, 0));
  res.decisions.assign(k, cplx(0, 0));

  CVec y = t.y;
  std::vector<Eigen::Index> remaining(k);
  std::iota(remaining.begin(), remaining.end(), 0);

  while (remaining.size() > 1) {
    // Received power over the remaining set, recomputed each pass.
    Eigen::Index best = remaining[0];
    double best_pw = -1.0;
    for (auto i : remaining) {
      double pw = t.h.col(i).squaredNorm();
      if (pw > best_pw) {
        best_pw = pw;
        best = i;
      }
    }
    UplinkTone sub;
    sub.n0 = t.n0;
    sub.y = y;
    sub.h = CMat(t.h.rows(), static_cast<Eigen::Index>(remaining.size()));
    Eigen::Index self_col = 0;
    for (std::size_t c = 0; c < remaining.size(); ++c) {
      sub.h.col(static_cast<Eigen::Index>(c)) = t.h.col(remaining[c]);
      if (remaining[c] == best) self_col = static_cast<Eigen::Index>(c);
    }
    auto est = mmse_detect_tone(sub, self_col);
    if (est.regularized) ++res.regularized;
    cplx unbiased = est.gain > 0.0 ? est.value / est.gain : est.value;
    cplx decision = mapper.slice(unbiased);
    res.estimates[best] = unbiased;
    res.decisions[best] = decision;
    res.detection_order.push_back(best);
    cplx cancel = (true_symbols != nullptr) ? (*true_symbols)[best] : decision;
    y -= t.h.col(best) * cancel;
    remaining.erase(std::find(remaining.begin(), remaining.end(), best));
  }

  // Last UE: single-user matched-filter combining over the Ne antennas.
  Eigen::Index last = remaining[0];
  double hh = t.h.col(last).squaredNorm();
  cplx mrc = t.h.col(last).dot(y);
  cplx unbiased = hh > 0.0 ? mrc / hh : mrc;
  res.estimates[last] = unbiased;
  res.decisions[last] = mapper.slice(unbiased);
  res.detection_order.push_back(last);
  return res;
}

UeTx build_ue_uplink_tx(const ScenarioConfig& cfg, const AllocationMap& alloc,
                        const QamMapper& mapper,
                        const std::vector<BeamformerState>& beams,
                        const std::vector<std::vector<std::uint8_t>>& bits_per_ue,
                        RngStream& tx_rng) {
  UeTx tx;
  const PaModel* pa = cfg.pa_enabled ? &cfg.pa : nullptr;
  for (Eigen::Index i = 0; i < cfg.n_ue; ++i) {
    CVec spread = dft_spread(mapper.map(bits_per_ue[i]));
    CVec grid = alloc.map(spread);
    CVec s = to_time_with_cp(grid, cfg.cp_len, cfg.n_taps);
    CVec alpha =
        steering_vector(cfg.doa_enb_rad(i), cfg.n_ue_antennas, cfg.element_spacing_wl);
    CMat per_ant = tx_steer(s, beams[i].weights, alpha);
    std::vector<TxChainSignal> chains;
    for (Eigen::Index ant = 0; ant < cfg.n_ue_antennas; ++ant)
      chains.push_back(make_tx_chain(per_ant.row(ant).transpose(), pa,
                                     cfg.tx_noise_evm_db, tx_rng));
    tx.spread_per_ue.push_back(std::move(spread));
    tx.base_time.push_back(std::move(s));
    tx.chains.push_back(std::move(chains));
  }
  return tx;
}

}  // namespace fdsim
