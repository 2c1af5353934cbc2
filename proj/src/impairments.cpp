#include "fdsim/impairments.hpp"

#include <cmath>
#include <stdexcept>

namespace fdsim {

SicMode sic_mode_from_string(const std::string& s) {
  if (s == "none") return SicMode::None;
  if (s == "linear") return SicMode::LinearOnly;
  if (s == "nl-no-ctc") return SicMode::NlNoCtc;
  if (s == "full") return SicMode::Full;
  throw std::invalid_argument("unknown sic mode: " + s);
}

std::string to_string(SicMode m) {
  switch (m) {
    case SicMode::None: return "none";
    case SicMode::LinearOnly: return "linear";
    case SicMode::NlNoCtc: return "nl-no-ctc";
    case SicMode::Full: return "full";
  }
  return "?";
}

double PaModel::am_am(double r) const {
  double rp = std::pow(r, x2);
  return x1 * rp / (1.0 + x3 * rp) + x4 * r;
}

double PaModel::am_pm(double r) const {
  double rp = std::pow(r, y2);
  return y1 * rp / (1.0 + y3 * rp) + y4 * r;
}

void PaModel::validate(double peak_amplitude) const {
  if (peak_amplitude <= 0.0) throw std::invalid_argument("pa validate: bad peak");
  // The 4-parameter fit is only trusted where AM/AM increases; check a log
  // grid spanning 60 dB below the peak drive level.
  double drive = std::pow(10.0, -input_backoff_db / 20.0);
  double hi = drive * peak_amplitude;
  double lo = hi * 1e-3;
  double prev = am_am(lo);
  for (int i = 1; i <= 200; ++i) {
    double r = lo * std::pow(hi / lo, i / 200.0);
    double cur = am_am(r);
    if (cur < prev)
      throw std::invalid_argument("pa model: AM/AM not monotone over operating range");
    prev = cur;
  }
}

CVec pa_apply(const CVec& s, const PaModel& pa) {
  double drive = std::pow(10.0, -pa.input_backoff_db / 20.0);
  CVec out(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    double r = std::abs(s[i]) * drive;
    if (r == 0.0) {
      out[i] = cplx(0.0, 0.0);
      continue;
    }
    double a = pa.am_am(r) / drive;
    double phase = std::arg(s[i]) + pa.am_pm(r);
    out[i] = std::polar(a, phase);
  }
  return out;
}

SiChannel draw_si_channel(RngStream& rng, Eigen::Index n_chains, double self_db,
                          double cross_db, Eigen::Index n_taps) {
  SiChannel si;
  si.n_chains = n_chains;
  si.n_taps = n_taps;
  double self_pow = std::pow(10.0, self_db / 10.0);
  double cross_pow = std::pow(10.0, cross_db / 10.0);
  for (Eigen::Index rx = 0; rx < n_chains; ++rx)
    for (Eigen::Index tx = 0; tx < n_chains; ++tx) {
      double p = (rx == tx) ? self_pow : cross_pow;
      si.taps.push_back(rng.complex_gaussian_vector(n_taps, p / static_cast<double>(n_taps)));
    }
  return si;
}

TxChainSignal make_tx_chain(const CVec& baseband, const PaModel* pa, double tx_evm_db,
                            RngStream& rng) {
  TxChainSignal t;
  t.pre_pa = baseband;
  t.post_pa = (pa != nullptr) ? pa_apply(baseband, *pa) : baseband;
  // Linear part = least-squares projection of the PA output onto the known
  // baseband; the remainder is the nonlinear distortion.
  cplx g(1.0, 0.0);
  double denom = baseband.squaredNorm();
  if (denom > 0.0) g = baseband.dot(t.post_pa) / denom;  // dot() conjugates lhs
  t.linear = g * baseband;
  t.nonlinear = t.post_pa - t.linear;
  double sig_pow = denom / std::max<double>(1, baseband.size());
  double evm_pow = sig_pow * std::pow(10.0, tx_evm_db / 10.0);
  t.tx_noise = rng.complex_gaussian_vector(baseband.size(), evm_pow);
  return t;
}

CVec tx_air_signal(const TxChainSignal& t) { return t.post_pa + t.tx_noise; }

CVec add_self_interference(const CVec& rx_sig, const std::vector<TxChainSignal>& own_tx,
                           const SiChannel& si, Eigen::Index rx, SicMode mode,
                           double cancel_depth_db) {
  if (static_cast<Eigen::Index>(own_tx.size()) != si.n_chains)
    throw std::invalid_argument("add_self_interference: chain count mismatch");
  double resid = std::pow(10.0, -cancel_depth_db / 20.0);
  CVec out = rx_sig;
  for (Eigen::Index tx = 0; tx < si.n_chains; ++tx) {
    bool self = (tx == rx);
    // What the active mode removes from this pair.
    bool cancel_lin = false, cancel_nl = false, cancel_noise = false;
    switch (mode) {
      case SicMode::None:
        break;
      case SicMode::LinearOnly:
        cancel_lin = true;
        break;
      case SicMode::NlNoCtc:
        cancel_lin = cancel_nl = self;
        break;
      case SicMode::Full:
        cancel_lin = cancel_nl = cancel_noise = true;
        break;
    }
    const CVec& g = si.pair(rx, tx);
    auto coupled = [&](const CVec& comp, bool cancelled) {
      if (comp.size() != out.size())
        throw std::invalid_argument("add_self_interference: length mismatch");
      double scale = cancelled ? resid : 1.0;
      if (scale == 0.0) return;
      // Short coupling taps, same truncated linear convolution as the air
      // channel.
      for (Eigen::Index b = 0; b < std::min(g.size(), comp.size()); ++b)
        out.tail(comp.size() - b) += (scale * g[b]) * comp.head(comp.size() - b);
    };
    coupled(own_tx[tx].linear, cancel_lin);
    coupled(own_tx[tx].nonlinear, cancel_nl);
    coupled(own_tx[tx].tx_noise, cancel_noise);
  }
  return out;
}

double thermal_noise_power(double bandwidth_hz, double temp_k) {
  if (bandwidth_hz < 0.0 || temp_k < 0.0)
    throw std::invalid_argument("thermal_noise_power: negative argument");
  constexpr double k_b = 1.380649e-23;
  return k_b * temp_k * bandwidth_hz;
}

}  // namespace fdsim
