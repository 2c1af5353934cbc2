#include "fdsim/slots.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fdsim {

namespace {

constexpr std::uint64_t kStreamsPerTrial = 32;

double effective_evm_db(const ScenarioConfig& cfg) {
  // The PA flag gates the whole transmit front end (nonlinearity + EVM noise).
  return cfg.pa_enabled ? cfg.tx_noise_evm_db : -std::numeric_limits<double>::infinity();
}

QamMapper make_mapper(const ScenarioConfig& cfg) { return QamMapper(cfg.mod_order); }

AllocationMap make_alloc(const ScenarioConfig& cfg) {
  return cfg.allocation == AllocationKind::Localized
             ? AllocationMap::localized(cfg.n_subcarriers, cfg.n_data_tones)
             : AllocationMap::interleaved(cfg.n_subcarriers, cfg.n_data_tones);
}

// Narrowband array snapshots at UE l: every constrained direction carries a
// unit-power stream, plus white noise at the snapshot SNR.
CMat synthesize_snapshots(const ScenarioConfig& cfg, const std::vector<double>& angles,
                          RngStream& rng) {
  Eigen::Index nr = cfg.n_ue_antennas;
  Eigen::Index t = cfg.doa_snapshots;
  double noise_var = std::pow(10.0, -cfg.doa_snapshot_snr_db / 10.0);
  CMat x = CMat::Zero(nr, t);
  for (double psi : angles) {
    CVec a = steering_vector(psi, nr, cfg.element_spacing_wl);
    for (Eigen::Index s = 0; s < t; ++s) x.col(s) += a * rng.complex_gaussian(1.0);
  }
  for (Eigen::Index s = 0; s < t; ++s)
    x.col(s) += rng.complex_gaussian_vector(nr, noise_var);
  return x;
}

}  // namespace

RngStream make_stream(std::uint64_t seed, std::uint64_t trial, StreamTag tag,
                      std::uint64_t offset) {
  return RngStream(seed, trial * kStreamsPerTrial + static_cast<std::uint64_t>(tag) + offset);
}

std::vector<std::vector<std::uint8_t>> random_bits(const ScenarioConfig& cfg,
                                                   RngStream& rng) {
  std::vector<std::vector<std::uint8_t>> bits(cfg.n_ue);
  Eigen::Index n = cfg.bits_per_slot_per_ue();
  for (Eigen::Index i = 0; i < cfg.n_ue; ++i) {
    bits[i].resize(n);
    for (Eigen::Index b = 0; b < n; ++b)
      bits[i][b] = static_cast<std::uint8_t>(rng.next_u64() & 1);
  }
  return bits;
}

SlotEnv make_slot_env(const ScenarioConfig& cfg, std::uint64_t trial, double n0) {
  SlotEnv env;
  env.n0 = n0;
  env.alloc = make_alloc(cfg);

  RngStream ch_rng = make_stream(cfg.seed, trial, StreamTag::Channel);
  env.channels = draw_channels(ch_rng, cfg);
  env.freq = freq_response(env.channels, cfg.n_subcarriers);
  env.precoders = build_precoders(env.freq, env.alloc, cfg.power_policy, n0);

  RngStream doa_rng = make_stream(cfg.seed, trial, StreamTag::Doa);
  for (Eigen::Index l = 0; l < cfg.n_ue; ++l) {
    std::vector<double> true_angles{cfg.doa_enb_rad(l)};
    for (Eigen::Index q = 0; q < cfg.n_ue; ++q)
      if (q != l) true_angles.push_back(cfg.doa_ue_rad(l, q));

    std::vector<double> used = true_angles;
    CMat snapshots;
    bool need_snapshots =
        cfg.doa_mode == DoaMode::Estimated || cfg.beamformer == BeamformerKind::Clms;
    if (need_snapshots) snapshots = synthesize_snapshots(cfg, true_angles, doa_rng);

    std::vector<double> errors;
    if (cfg.doa_mode == DoaMode::Estimated) {
      auto doa = root_music_doa(snapshots, static_cast<int>(true_angles.size()),
                                cfg.element_spacing_wl);
      if (!doa.ok) {
        ++env.doa_failures;  // keep the true angles, count the failure
      } else {
        // Associate estimates with constrained directions by nearest angle.
        for (std::size_t a = 0; a < true_angles.size(); ++a) {
          double best = doa.angles_rad[0];
          for (double est : doa.angles_rad)
            if (std::abs(est - true_angles[a]) < std::abs(best - true_angles[a]))
              best = est;
          used[a] = best;
          errors.push_back((best - true_angles[a]) * 180.0 / M_PI);
        }
      }
    }
    env.doa_error_deg.push_back(std::move(errors));

    SteeringMatrix steering =
        make_steering(used, cfg.n_ue_antennas, cfg.element_spacing_wl);
    if (cfg.beamformer == BeamformerKind::Clms)
      env.beams.push_back(
          clms_train(steering, snapshots, cfg.clms_mu, cfg.clms_iterations));
    else
      env.beams.push_back(quiescent_beamformer(steering));
  }

  if (cfg.si_enabled) {
    RngStream si_rng = make_stream(cfg.seed, trial, StreamTag::EnbSi);
    env.si_enb = draw_si_channel(si_rng, cfg.n_enb_antennas, cfg.si_self_db,
                                 cfg.si_cross_db);
    for (Eigen::Index l = 0; l < cfg.n_ue; ++l) {
      RngStream ue_rng = make_stream(cfg.seed, trial, StreamTag::UeSiBase,
                                     static_cast<std::uint64_t>(l));
      env.si_ue.push_back(draw_si_channel(ue_rng, cfg.n_ue_antennas, cfg.si_self_db,
                                          cfg.si_cross_db));
    }
  }
  return env;
}

namespace {

struct TxEnvironment {
  EnbTx enb;
  UeTx ue;
};

TxEnvironment build_tx_environment(const ScenarioConfig& cfg, const SlotEnv& env,
                                   const std::vector<std::vector<std::uint8_t>>& dl_bits,
                                   const std::vector<std::vector<std::uint8_t>>& ul_bits,
                                   std::uint64_t trial) {
  ScenarioConfig tx_cfg = cfg;
  tx_cfg.tx_noise_evm_db = effective_evm_db(cfg);
  QamMapper mapper = make_mapper(cfg);
  TxEnvironment tx;
  RngStream enb_rng = make_stream(cfg.seed, trial, StreamTag::EnbTxNoise);
  tx.enb = build_enb_downlink_tx(tx_cfg, env.precoders, env.alloc, mapper, dl_bits,
                                 enb_rng);
  RngStream ue_rng = make_stream(cfg.seed, trial, StreamTag::UeTxNoiseBase);
  tx.ue = build_ue_uplink_tx(tx_cfg, env.alloc, mapper, env.beams, ul_bits, ue_rng);
  return tx;
}

// Sum of the air signals radiated by one UE's antennas (shared-tap links make
// the per-antenna split unnecessary on reception).
CVec ue_air_sum(const UeTx& ue, Eigen::Index q) {
  CVec sum = tx_air_signal(ue.chains[q][0]);
  for (std::size_t k = 1; k < ue.chains[q].size(); ++k)
    sum += tx_air_signal(ue.chains[q][k]);
  return sum;
}

}  // namespace

SlotResult downlink_slot(const ScenarioConfig& cfg, const SlotEnv& env,
                         const std::vector<std::vector<std::uint8_t>>& dl_bits,
                         const std::vector<std::vector<std::uint8_t>>& ul_bits,
                         std::uint64_t trial) {
  QamMapper mapper = make_mapper(cfg);
  TxEnvironment tx = build_tx_environment(cfg, env, dl_bits, ul_bits, trial);
  Eigen::Index n_cp = cfg.n_subcarriers + cfg.cp_len;
  bool collapsed = cfg.ue_corr_rho >= 1.0;

  SlotResult res;
  res.regularized_tones = env.precoders.regularized_tones;
  RngStream noise_rng = make_stream(cfg.seed, trial, StreamTag::DownlinkNoise);

  for (Eigen::Index l = 0; l < cfg.n_ue; ++l) {
    const CVec& w = env.beams[l].weights;
    CVec y_des = CVec::Zero(n_cp), y_noise = CVec::Zero(n_cp),
         y_intf = CVec::Zero(n_cp), y_si = CVec::Zero(n_cp);
    double n0_eff = 0.0;

    if (collapsed) {
      // All UE antennas share the link taps, so each bracket collapses to a
      // single convolution scaled by the array gain in its arrival direction.
      CVec acc = CVec::Zero(n_cp);
      for (Eigen::Index j = 0; j < cfg.n_enb_antennas; ++j)
        acc += apply_channel(tx_air_signal(tx.enb.chains[j]), env.channels.enb_taps(j, l),
                             nullptr, 0.0);
      cplx g_e = env.beams[l].gain(cfg.doa_enb_rad(l));
      y_des = g_e * acc;
      CVec n_l = noise_rng.complex_gaussian_vector(n_cp, env.n0);
      y_noise = g_e * n_l;
      n0_eff = env.n0 * std::norm(g_e);
      for (Eigen::Index q = 0; q < cfg.n_ue; ++q) {
        if (q == l) continue;
        CVec xacc = apply_channel(ue_air_sum(tx.ue, q), env.channels.ue_taps(q, l),
                                  nullptr, 0.0);
        y_intf += env.beams[l].gain(cfg.doa_ue_rad(l, q)) * xacc;
      }
    } else {
      CMat des(cfg.n_ue_antennas, n_cp), noi(cfg.n_ue_antennas, n_cp),
          intf(cfg.n_ue_antennas, n_cp);
      for (Eigen::Index k = 0; k < cfg.n_ue_antennas; ++k) {
        CVec acc = CVec::Zero(n_cp);
        for (Eigen::Index j = 0; j < cfg.n_enb_antennas; ++j)
          acc += apply_channel(tx_air_signal(tx.enb.chains[j]),
                               env.channels.enb_taps_ant(j, l, k), nullptr, 0.0);
        CVec alpha_e =
            steering_vector(cfg.doa_enb_rad(l), cfg.n_ue_antennas, cfg.element_spacing_wl);
        des.row(k) = (alpha_e[k] * acc).transpose();
        CVec n_lk = noise_rng.complex_gaussian_vector(n_cp, env.n0);
        noi.row(k) = (alpha_e[k] * n_lk).transpose();
        CVec intf_k = CVec::Zero(n_cp);
        for (Eigen::Index q = 0; q < cfg.n_ue; ++q) {
          if (q == l) continue;
          CVec xacc = CVec::Zero(n_cp);
          for (Eigen::Index kk = 0; kk < cfg.n_ue_antennas; ++kk)
            xacc += apply_channel(tx_air_signal(tx.ue.chains[q][kk]),
                                  env.channels.ue_taps_ant(q, l, k), nullptr, 0.0);
          CVec alpha_q = steering_vector(cfg.doa_ue_rad(l, q), cfg.n_ue_antennas,
                                         cfg.element_spacing_wl);
          intf_k += alpha_q[k] * xacc;
        }
        intf.row(k) = intf_k.transpose();
      }
      y_des = rx_combine(des, w);
      y_noise = rx_combine(noi, w);
      y_intf = rx_combine(intf, w);
      n0_eff = env.n0 * w.squaredNorm();
    }

    if (cfg.si_enabled) {
      CMat si(cfg.n_ue_antennas, n_cp);
      CVec zero = CVec::Zero(n_cp);
      for (Eigen::Index k = 0; k < cfg.n_ue_antennas; ++k)
        si.row(k) = add_self_interference(zero, tx.ue.chains[l], env.si_ue[l], k,
                                          cfg.sic_mode, cfg.si_cancel_depth_db)
                        .transpose();
      y_si = rx_combine(si, w);
    }

    CVec y = y_des + y_noise + y_intf + y_si;
    CVec tones = strip_cp_and_dft(y, cfg.n_subcarriers, cfg.cp_len);
    CVec ybar = env.alloc.demap(tones);
    CVec u_row = env.precoders.u.row(l).transpose();
    CVec yhat = ue_post_process(ybar, u_row);
    CVec gains = env.precoders.e_eff.row(l).transpose().cast<cplx>();
    CVec xbar_hat = mmse_equalize_diag(yhat, gains, n0_eff);
    CVec x_time = idft(xbar_hat, xbar_hat.size());
    res.decoded_bits.push_back(mapper.demap_hard(x_time));

    // Post-processing-point decomposition against the known spread symbols.
    const CVec& xbar_true = tx.enb.spread_per_ue[l];
    RVec sig(cfg.n_data_tones), err(cfg.n_data_tones);
    double sig_sum = 0.0, err_sum = 0.0;
    for (Eigen::Index m = 0; m < cfg.n_data_tones; ++m) {
      cplx ideal = gains[m] * xbar_true[m];
      sig[m] = std::norm(ideal);
      err[m] = std::norm(yhat[m] - ideal);
      sig_sum += sig[m];
      err_sum += err[m];
    }
    res.tone_signal.push_back(sig);
    res.tone_error.push_back(err);
    res.sinr.push_back(err_sum > 0.0 ? sig_sum / err_sum
                                     : std::numeric_limits<double>::infinity());
    res.desired_power.push_back(y_des.squaredNorm());
    res.cross_ue_power.push_back(y_intf.squaredNorm());
    res.si_power.push_back(y_si.squaredNorm());
  }
  return res;
}

SlotResult uplink_slot(const ScenarioConfig& cfg, const SlotEnv& env,
                       const std::vector<std::vector<std::uint8_t>>& dl_bits,
                       const std::vector<std::vector<std::uint8_t>>& ul_bits,
                       std::uint64_t trial) {
  QamMapper mapper = make_mapper(cfg);
  TxEnvironment tx = build_tx_environment(cfg, env, dl_bits, ul_bits, trial);
  Eigen::Index n_cp = cfg.n_subcarriers + cfg.cp_len;
  Eigen::Index m_tones = cfg.n_data_tones;
  bool collapsed = cfg.ue_corr_rho >= 1.0;

  SlotResult res;
  res.regularized_tones = 0;
  RngStream noise_rng = make_stream(cfg.seed, trial, StreamTag::UplinkNoise);

  // Per-antenna receive, CP strip, DFT, deallocation.
  CMat ybar(cfg.n_enb_antennas, m_tones);
  double des_pow = 0.0, si_pow = 0.0;
  for (Eigen::Index j = 0; j < cfg.n_enb_antennas; ++j) {
    CVec sig = CVec::Zero(n_cp);
    if (collapsed) {
      for (Eigen::Index i = 0; i < cfg.n_ue; ++i)
        sig += apply_channel(ue_air_sum(tx.ue, i), env.channels.enb_taps(j, i), nullptr,
                             0.0);
    } else {
      for (Eigen::Index i = 0; i < cfg.n_ue; ++i)
        for (Eigen::Index k = 0; k < cfg.n_ue_antennas; ++k)
          sig += apply_channel(tx_air_signal(tx.ue.chains[i][k]),
                               env.channels.enb_taps_ant(j, i, k), nullptr, 0.0);
    }
    CVec rx = sig + noise_rng.complex_gaussian_vector(n_cp, env.n0);
    if (cfg.si_enabled) {
      CVec with_si = add_self_interference(rx, tx.enb.chains, env.si_enb, j,
                                           cfg.sic_mode, cfg.si_cancel_depth_db);
      si_pow += (with_si - rx).squaredNorm();
      rx = with_si;
    }
    des_pow += sig.squaredNorm();
    CVec tones = strip_cp_and_dft(rx, cfg.n_subcarriers, cfg.cp_len);
    ybar.row(j) = env.alloc.demap(tones).transpose();
  }

  // Channel columns on the occupied tones.
  std::vector<CMat> h_ue;  // per UE: Ne x M
  for (Eigen::Index i = 0; i < cfg.n_ue; ++i) {
    CMat h(cfg.n_enb_antennas, m_tones);
    for (Eigen::Index m = 0; m < m_tones; ++m)
      h.col(m) = env.freq.uplink_col(i, env.alloc.tone_index[m]);
    h_ue.push_back(std::move(h));
  }

  // Block SSIC with optimal ordering: detect the strongest remaining UE on
  // every tone, despread, slice, respread, cancel.
  res.decoded_bits.assign(cfg.n_ue, {});
  res.tone_signal.assign(cfg.n_ue, RVec::Zero(m_tones));
  res.tone_error.assign(cfg.n_ue, RVec::Zero(m_tones));
  res.sinr.assign(cfg.n_ue, 0.0);

  std::vector<Eigen::Index> remaining(cfg.n_ue);
  std::iota(remaining.begin(), remaining.end(), 0);

  auto finish_ue = [&](Eigen::Index l, const CVec& unbiased) {
    CVec x_time = idft(unbiased, unbiased.size());
    res.decoded_bits[l] = mapper.demap_hard(x_time);
    const CVec& xbar_true = tx.ue.spread_per_ue[l];
    double sig_sum = 0.0, err_sum = 0.0;
    for (Eigen::Index m = 0; m < m_tones; ++m) {
      double s = std::norm(xbar_true[m]);
      double e = std::norm(unbiased[m] - xbar_true[m]);
      res.tone_signal[l][m] += s;
      res.tone_error[l][m] += e;
      sig_sum += s;
      err_sum += e;
    }
    res.sinr[l] = err_sum > 0.0 ? sig_sum / err_sum
                                : std::numeric_limits<double>::infinity();
    return x_time;
  };

  while (remaining.size() > 1) {
    Eigen::Index best = remaining[0];
    double best_pw = -1.0;
    for (auto i : remaining) {
      double pw = h_ue[i].squaredNorm();
      if (pw > best_pw) {
        best_pw = pw;
        best = i;
      }
    }
    CVec unbiased(m_tones);
    for (Eigen::Index m = 0; m < m_tones; ++m) {
      UplinkTone t;
      t.n0 = env.n0;
      t.y = ybar.col(m);
      t.h = CMat(cfg.n_enb_antennas, static_cast<Eigen::Index>(remaining.size()));
      Eigen::Index self_col = 0;
      for (std::size_t c = 0; c < remaining.size(); ++c) {
        t.h.col(static_cast<Eigen::Index>(c)) = h_ue[remaining[c]].col(m);
        if (remaining[c] == best) self_col = static_cast<Eigen::Index>(c);
      }
      auto est = mmse_detect_tone(t, self_col);
      if (est.regularized) ++res.regularized_tones;
      unbiased[m] = est.gain > 0.0 ? est.value / est.gain : est.value;
    }
    CVec x_time = finish_ue(best, unbiased);
    CVec cancel_tones;
    if (cfg.genie_sic) {
      cancel_tones = tx.ue.spread_per_ue[best];
    } else {
      CVec sliced(x_time.size());
      for (Eigen::Index s = 0; s < x_time.size(); ++s) sliced[s] = mapper.slice(x_time[s]);
      cancel_tones = dft_spread(sliced);
    }
    for (Eigen::Index m = 0; m < m_tones; ++m)
      ybar.col(m) -= h_ue[best].col(m) * cancel_tones[m];
    remaining.erase(std::find(remaining.begin(), remaining.end(), best));
  }

  // Last UE: matched-filter combining per tone.
  Eigen::Index last = remaining[0];
  CVec unbiased(m_tones);
  for (Eigen::Index m = 0; m < m_tones; ++m) {
    CVec h = h_ue[last].col(m);
    double hh = h.squaredNorm();
    unbiased[m] = hh > 0.0 ? h.dot(ybar.col(m)) / hh : cplx(0.0, 0.0);
  }
  finish_ue(last, unbiased);

  res.desired_power.assign(cfg.n_ue, des_pow);
  res.cross_ue_power.assign(cfg.n_ue, 0.0);
  res.si_power.assign(cfg.n_ue, si_pow);
  return res;
}

}  // namespace fdsim
