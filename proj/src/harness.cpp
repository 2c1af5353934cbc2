#include "fdsim/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace fdsim {

namespace {

constexpr std::uint64_t kCalibrationTrialBase = 1ull << 32;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

Eigen::Index worker_count(const ScenarioConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<Eigen::Index>(hw);
}

/// Runs fn(trial) for trial in [0, n_trials) in fixed-size waves. The wave
/// size is a constant and results are reduced in trial order, so the outcome
/// (including the early-stop boundary) is independent of the thread count.
/// stop() is checked between waves.
template <typename Out, typename Fn, typename Reduce, typename Stop>
void parallel_trials(const ScenarioConfig& cfg, Eigen::Index n_trials, Fn&& fn,
                     Reduce&& reduce, Stop&& stop) {
  constexpr Eigen::Index kWave = 32;
  Eigen::Index workers = worker_count(cfg);
  for (Eigen::Index start = 0; start < n_trials; start += kWave) {
    Eigen::Index end = std::min(n_trials, start + kWave);
    if (workers <= 1) {
      for (Eigen::Index t = start; t < end; ++t) reduce(t, fn(t));
    } else {
      std::vector<std::future<Out>> futs;
      futs.reserve(end - start);
      for (Eigen::Index t = start; t < end; ++t)
        futs.push_back(std::async(std::launch::async, [&fn, t] { return fn(t); }));
      for (Eigen::Index t = start; t < end; ++t) reduce(t, futs[t - start].get());
    }
    if (stop()) return;
  }
}

double snr_to_n0(const ScenarioConfig& cfg, double reference, double snr_db) {
  if (cfg.noiseless) return 0.0;
  return reference / std::pow(10.0, snr_db / 10.0);
}

FreqChannelSet subset_freq(const FreqChannelSet& hf, const std::vector<Eigen::Index>& ues) {
  FreqChannelSet out;
  out.n_fft = hf.n_fft;
  out.n_ue = static_cast<Eigen::Index>(ues.size());
  for (auto u : ues) out.enb_ue.push_back(hf.enb_ue[u]);
  // UE-UE links are not needed by the precoder.
  return out;
}

}  // namespace

void wilson_interval(std::uint64_t errors, std::uint64_t bits, double& lo, double& hi) {
  if (bits == 0) {
    lo = 0.0;
    hi = 1.0;
    return;
  }
  double z = 1.959963984540054;
  double n = static_cast<double>(bits);
  double p = static_cast<double>(errors) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  lo = std::max(0.0, center - half);
  hi = std::min(1.0, center + half);
}

double calibrate_reference_energy(const ScenarioConfig& cfg, LinkDirection dir) {
  // Fixed ensemble keyed off the seed; water-filling would need the N0 that
  // this calibration is about to define, so the reference uses equal power.
  ScenarioConfig cal = cfg;
  cal.power_policy =
      cfg.power_policy == PowerPolicy::WaterFill ? PowerPolicy::Equal : cfg.power_policy;
  AllocationMap alloc = cal.allocation == AllocationKind::Localized
                            ? AllocationMap::localized(cal.n_subcarriers, cal.n_data_tones)
                            : AllocationMap::interleaved(cal.n_subcarriers, cal.n_data_tones);
  double acc = 0.0;
  std::uint64_t count = 0;
  for (Eigen::Index d = 0; d < cal.calibration_draws; ++d) {
    RngStream rng = make_stream(cal.seed, kCalibrationTrialBase + d, StreamTag::Channel);
    ChannelRealization ch = draw_channels(rng, cal);
    FreqChannelSet hf = freq_response(ch, cal.n_subcarriers);
    if (dir == LinkDirection::Downlink) {
      PrecoderSet prec = build_precoders(hf, alloc, cal.power_policy, 0.0);
      for (Eigen::Index l = 0; l < cal.n_ue; ++l)
        for (Eigen::Index m = 0; m < cal.n_data_tones; ++m) {
          acc += prec.e_eff(l, m) * prec.e_eff(l, m);
          ++count;
        }
    } else {
      for (Eigen::Index l = 0; l < cal.n_ue; ++l)
        for (Eigen::Index m = 0; m < cal.n_data_tones; ++m) {
          acc += hf.uplink_col(l, alloc.tone_index[m]).squaredNorm() /
                 static_cast<double>(cal.n_enb_antennas);
          ++count;
        }
    }
  }
  return acc / static_cast<double>(count);
}

namespace {

struct TrialTally {
  std::vector<std::uint64_t> errors;
  std::vector<std::uint64_t> bits;
  std::vector<double> sinr_sum;
};

TrialTally run_one_ber_trial(const ScenarioConfig& cfg, LinkDirection dir, double n0,
                             std::uint64_t trial) {
  SlotEnv env = make_slot_env(cfg, trial, n0);
  RngStream dl_rng = make_stream(cfg.seed, trial, StreamTag::DownlinkBits);
  RngStream ul_rng = make_stream(cfg.seed, trial, StreamTag::UplinkBits);
  auto dl_bits = random_bits(cfg, dl_rng);
  auto ul_bits = random_bits(cfg, ul_rng);
  SlotResult slot = dir == LinkDirection::Downlink
                        ? downlink_slot(cfg, env, dl_bits, ul_bits, trial)
                        : uplink_slot(cfg, env, dl_bits, ul_bits, trial);
  const auto& truth = dir == LinkDirection::Downlink ? dl_bits : ul_bits;
  TrialTally tally;
  tally.errors.assign(cfg.n_ue, 0);
  tally.bits.assign(cfg.n_ue, 0);
  tally.sinr_sum.assign(cfg.n_ue, 0.0);
  for (Eigen::Index l = 0; l < cfg.n_ue; ++l) {
    for (std::size_t b = 0; b < truth[l].size(); ++b)
      if (truth[l][b] != slot.decoded_bits[l][b]) ++tally.errors[l];
    tally.bits[l] = truth[l].size();
    tally.sinr_sum[l] = std::isfinite(slot.sinr[l]) ? slot.sinr[l] : 1e12;
  }
  return tally;
}

}  // namespace

std::vector<BerPoint> run_ber(const ScenarioConfig& cfg, LinkDirection dir) {
  cfg.validate_or_throw();
  double reference = calibrate_reference_energy(cfg, dir);
  std::string experiment =
      dir == LinkDirection::Downlink ? "ber-downlink" : "ber-uplink";
  std::vector<BerPoint> out;
  for (double snr_db : cfg.snr_grid_db()) {
    auto t0 = std::chrono::steady_clock::now();
    double n0 = snr_to_n0(cfg, reference, snr_db);
    std::vector<std::uint64_t> errors(cfg.n_ue, 0), bits(cfg.n_ue, 0);
    std::vector<double> sinr_sum(cfg.n_ue, 0.0);
    Eigen::Index trials_done = 0;
    parallel_trials<TrialTally>(
        cfg, cfg.trials,
        [&](std::uint64_t t) { return run_one_ber_trial(cfg, dir, n0, t); },
        [&](Eigen::Index, const TrialTally& tt) {
          for (Eigen::Index l = 0; l < cfg.n_ue; ++l) {
            errors[l] += tt.errors[l];
            bits[l] += tt.bits[l];
            sinr_sum[l] += tt.sinr_sum[l];
          }
          ++trials_done;
        },
        [&] {
          if (cfg.max_bit_errors <= 0) return false;
          std::uint64_t min_err = *std::min_element(errors.begin(), errors.end());
          return min_err >= static_cast<std::uint64_t>(cfg.max_bit_errors);
        });
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (Eigen::Index l = 0; l < cfg.n_ue; ++l) {
      BerPoint p;
      p.experiment = experiment;
      p.snr_db = snr_db;
      p.ue = static_cast<int>(l) + 1;
      p.bits = bits[l];
      p.errors = errors[l];
      p.ber = bits[l] > 0 ? static_cast<double>(errors[l]) / static_cast<double>(bits[l])
                          : 0.0;
      wilson_interval(errors[l], bits[l], p.ci_lo, p.ci_hi);
      p.mean_sinr_db =
          trials_done > 0 ? 10.0 * std::log10(sinr_sum[l] / trials_done) : 0.0;
      p.wall_time_s = wall;
      p.seed = cfg.seed;
      out.push_back(p);
    }
  }
  return out;
}

namespace {

struct ToneAccum {
  std::vector<RVec> sig;  // per UE
  std::vector<RVec> err;
};

// Alternating-direction downlink half-slot: full-power single-UE precoding
// toward `dl_ue` while `ul_ue` transmits uplink; the receiving UE is
// half-duplex here, so it has no own-transmit self-interference.
void alt_dir_slot(const ScenarioConfig& cfg, double n0, std::uint64_t trial,
                  Eigen::Index dl_ue, Eigen::Index ul_ue, RVec& sig, RVec& err) {
  SlotEnv env = make_slot_env(cfg, trial, n0);
  QamMapper mapper(cfg.mod_order);
  ScenarioConfig tx_cfg = cfg;
  tx_cfg.tx_noise_evm_db =
      cfg.pa_enabled ? cfg.tx_noise_evm_db : -std::numeric_limits<double>::infinity();

  FreqChannelSet hf_one = subset_freq(env.freq, {dl_ue});
  PrecoderSet prec = build_precoders(hf_one, env.alloc, PowerPolicy::Equal, n0);

  RngStream dl_rng = make_stream(cfg.seed, trial, StreamTag::DownlinkBits);
  RngStream ul_rng = make_stream(cfg.seed, trial, StreamTag::UplinkBits);
  auto dl_bits = random_bits(cfg, dl_rng);
  auto ul_bits = random_bits(cfg, ul_rng);

  RngStream enb_tx_rng = make_stream(cfg.seed, trial, StreamTag::EnbTxNoise);
  ScenarioConfig cfg_dl = tx_cfg;
  cfg_dl.n_ue = 1;  // single-UE precoding toward dl_ue
  EnbTx enb = build_enb_downlink_tx(cfg_dl, prec, env.alloc, mapper, {dl_bits[dl_ue]},
                                    enb_tx_rng);
  RngStream ue_tx_rng = make_stream(cfg.seed, trial, StreamTag::UeTxNoiseBase);
  UeTx ue = build_ue_uplink_tx(tx_cfg, env.alloc, mapper, env.beams, ul_bits, ue_tx_rng);

  Eigen::Index n_cp = cfg.n_subcarriers + cfg.cp_len;
  CVec acc = CVec::Zero(n_cp);
  for (Eigen::Index j = 0; j < cfg.n_enb_antennas; ++j)
    acc += apply_channel(tx_air_signal(enb.chains[j]), env.channels.enb_taps(j, dl_ue),
                         nullptr, 0.0);
  cplx g_e = env.beams[dl_ue].gain(cfg.doa_enb_rad(dl_ue));
  RngStream noise_rng = make_stream(cfg.seed, trial, StreamTag::DownlinkNoise);
  CVec n_l = noise_rng.complex_gaussian_vector(n_cp, n0);
  CVec ue_sum = tx_air_signal(ue.chains[ul_ue][0]);
  for (Eigen::Index k = 1; k < cfg.n_ue_antennas; ++k)
    ue_sum += tx_air_signal(ue.chains[ul_ue][k]);
  CVec xacc = apply_channel(ue_sum, env.channels.ue_taps(ul_ue, dl_ue), nullptr, 0.0);
  CVec y = g_e * (acc + n_l) + env.beams[dl_ue].gain(cfg.doa_ue_rad(dl_ue, ul_ue)) * xacc;

  CVec tones = strip_cp_and_dft(y, cfg.n_subcarriers, cfg.cp_len);
  CVec ybar = env.alloc.demap(tones);
  CVec u_row = prec.u.row(0).transpose();
  CVec yhat = ue_post_process(ybar, u_row);
  CVec gains = prec.e_eff.row(0).transpose().cast<cplx>();
  for (Eigen::Index m = 0; m < cfg.n_data_tones; ++m) {
    cplx ideal = gains[m] * enb.spread_per_ue[0][m];
    sig[m] += std::norm(ideal);
    err[m] += std::norm(yhat[m] - ideal);
  }
}

double shannon_se(const ScenarioConfig& cfg, const std::vector<RVec>& sig,
                  const std::vector<RVec>& err) {
  double se = 0.0;
  for (std::size_t l = 0; l < sig.size(); ++l)
    for (Eigen::Index m = 0; m < sig[l].size(); ++m) {
      double sinr = err[l][m] > 0.0 ? sig[l][m] / err[l][m] : 1e12;
      se += std::log2(1.0 + sinr);
    }
  return se / static_cast<double>(cfg.n_subcarriers);
}

}  // namespace

std::vector<SePoint> run_spectral_efficiency(const ScenarioConfig& cfg) {
  cfg.validate_or_throw();
  if (cfg.n_ue < 2)
    throw std::invalid_argument("spectral-efficiency comparison needs K >= 2");

  // Fixed power basis across schemes: equal per-UE power, common N0
  // calibrated on the single-UE full-power reference.
  ScenarioConfig base = cfg;
  base.power_policy = PowerPolicy::Equal;

  ScenarioConfig cfg_one = base;
  cfg_one.n_ue = 1;
  cfg_one.doa_enb_deg = {base.doa_enb_deg[0]};
  cfg_one.doa_ue_deg.clear();
  cfg_one.si_enabled = false;  // half-duplex UE in its downlink slot
  double reference = calibrate_reference_energy(cfg_one, LinkDirection::Downlink);

  std::vector<SePoint> out;
  for (double snr_db : base.snr_grid_db()) {
    double n0 = snr_to_n0(base, reference, snr_db);

    // (a) proposed FD: both UEs in downlink, both uplinking concurrently.
    ToneAccum fd;
    fd.sig.assign(base.n_ue, RVec::Zero(base.n_data_tones));
    fd.err.assign(base.n_ue, RVec::Zero(base.n_data_tones));
    parallel_trials<SlotResult>(
        base, base.trials,
        [&](std::uint64_t t) {
          SlotEnv env = make_slot_env(base, t, n0);
          RngStream dl_rng = make_stream(base.seed, t, StreamTag::DownlinkBits);
          RngStream ul_rng = make_stream(base.seed, t, StreamTag::UplinkBits);
          auto dl = random_bits(base, dl_rng);
          auto ul = random_bits(base, ul_rng);
          return downlink_slot(base, env, dl, ul, t);
        },
        [&](Eigen::Index, const SlotResult& r) {
          for (Eigen::Index l = 0; l < base.n_ue; ++l) {
            fd.sig[l] += r.tone_signal[l];
            fd.err[l] += r.tone_error[l];
          }
        },
        [] { return false; });

    // (b) HD-TDD: single UE, full power, downlink active half the time.
    ToneAccum tdd;
    tdd.sig.assign(1, RVec::Zero(base.n_data_tones));
    tdd.err.assign(1, RVec::Zero(base.n_data_tones));
    parallel_trials<SlotResult>(
        cfg_one, cfg_one.trials,
        [&](std::uint64_t t) {
          SlotEnv env = make_slot_env(cfg_one, t, n0);
          RngStream dl_rng = make_stream(cfg_one.seed, t, StreamTag::DownlinkBits);
          RngStream ul_rng = make_stream(cfg_one.seed, t, StreamTag::UplinkBits);
          auto dl = random_bits(cfg_one, dl_rng);
          auto ul = random_bits(cfg_one, ul_rng);
          return downlink_slot(cfg_one, env, dl, ul, t);
        },
        [&](Eigen::Index, const SlotResult& r) {
          tdd.sig[0] += r.tone_signal[0];
          tdd.err[0] += r.tone_error[0];
        },
        [] { return false; });

    // (c) alternating direction: one UE in downlink while the other uplinks,
    // swapping every slot; downlink is always active with one UE.
    ToneAccum alt;
    alt.sig.assign(2, RVec::Zero(base.n_data_tones));
    alt.err.assign(2, RVec::Zero(base.n_data_tones));
    struct AltOut {
      RVec sig0, err0;
      Eigen::Index which;
    };
    parallel_trials<AltOut>(
        base, base.trials,
        [&](std::uint64_t t) {
          AltOut o;
          o.sig0 = RVec::Zero(base.n_data_tones);
          o.err0 = RVec::Zero(base.n_data_tones);
          o.which = static_cast<Eigen::Index>(t % 2);
          alt_dir_slot(base, n0, t, o.which, 1 - o.which, o.sig0, o.err0);
          return o;
        },
        [&](Eigen::Index, const AltOut& o) {
          alt.sig[o.which] += o.sig0;
          alt.err[o.which] += o.err0;
        },
        [] { return false; });

    SePoint a{"fd", snr_db, shannon_se(base, fd.sig, fd.err), base.seed};
    // Per-slot rate of the TDD UE, halved for the downlink time share.
    double tdd_slot_rate = shannon_se(base, tdd.sig, tdd.err);
    SePoint b{"hd-tdd", snr_db, 0.5 * tdd_slot_rate, base.seed};
    // Each alternating sub-ensemble covers half the slots.
    double alt_se = 0.5 * (shannon_se(base, {alt.sig[0]}, {alt.err[0]}) +
                           shannon_se(base, {alt.sig[1]}, {alt.err[1]}));
    SePoint c{"alt-dir", snr_db, alt_se, base.seed};
    out.push_back(a);
    out.push_back(c);
    out.push_back(b);
  }
  return out;
}

DoaSummary run_doa_experiment(const ScenarioConfig& cfg) {
  cfg.validate_or_throw();
  if (cfg.doa_mode != DoaMode::Estimated)
    throw std::invalid_argument("doa experiment requires doa_mode=estimated");
  DoaSummary summary;
  double sq_sum = 0.0;
  std::uint64_t n_err = 0;
  std::vector<double> null_depths;
  for (Eigen::Index t = 0; t < cfg.trials; ++t) {
    SlotEnv env = make_slot_env(cfg, static_cast<std::uint64_t>(t), 0.0);
    summary.failures += env.doa_failures;
    // Angle errors are recorded per UE in constraint order: look direction
    // first, then the nulled directions.
    for (Eigen::Index l = 0; l < cfg.n_ue; ++l) {
      const auto& errs = env.doa_error_deg[l];
      for (std::size_t slot = 0; slot < errs.size(); ++slot) {
        double true_rad;
        if (slot == 0) {
          true_rad = cfg.doa_enb_rad(l);
        } else {
          Eigen::Index q = static_cast<Eigen::Index>(slot) - 1;
          if (q >= l) ++q;
          true_rad = cfg.doa_ue_rad(l, q);
        }
        DoaPoint p;
        p.trial = static_cast<std::uint64_t>(t);
        p.true_deg = true_rad * 180.0 / M_PI;
        p.err_deg = errs[slot];
        p.est_deg = p.true_deg + p.err_deg;
        // Null depth at the true interferer bearing under these weights.
        if (slot > 0) {
          double g = std::norm(env.beams[l].gain(true_rad));
          p.null_depth_db = 10.0 * std::log10(std::max(g, 1e-30));
          null_depths.push_back(p.null_depth_db);
        } else {
          p.null_depth_db = 0.0;
        }
        summary.points.push_back(p);
        sq_sum += p.err_deg * p.err_deg;
        ++n_err;
      }
    }
  }
  summary.rmse_deg = n_err > 0 ? std::sqrt(sq_sum / static_cast<double>(n_err)) : 0.0;
  if (!null_depths.empty()) {
    std::sort(null_depths.begin(), null_depths.end());
    std::size_t idx = static_cast<std::size_t>(0.95 * (null_depths.size() - 1));
    summary.null_depth_p95_db = null_depths[idx];
  }
  return summary;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void emit_ber(const std::vector<BerPoint>& records, const std::string& path,
              EmitFormat format) {
  if (format == EmitFormat::Csv) {
    std::ostringstream os;
    os << "experiment,snr_db,ue,ber,ci_lo,ci_hi,bits,errors,seed\n";
    for (const auto& r : records)
      os << r.experiment << ',' << fmt_double(r.snr_db) << ',' << r.ue << ','
         << fmt_double(r.ber) << ',' << fmt_double(r.ci_lo) << ',' << fmt_double(r.ci_hi)
         << ',' << r.bits << ',' << r.errors << ',' << r.seed << '\n';
    write_file(path, os.str());
    return;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : records)
    arr.push_back({{"experiment", r.experiment},
                   {"snr_db", r.snr_db},
                   {"ue", r.ue},
                   {"ber", r.ber},
                   {"ci_lo", r.ci_lo},
                   {"ci_hi", r.ci_hi},
                   {"bits", r.bits},
                   {"errors", r.errors},
                   {"mean_sinr_db", r.mean_sinr_db},
                   {"seed", r.seed}});
  write_file(path, arr.dump(2) + "\n");
}

void emit_se(const std::vector<SePoint>& records, const std::string& path,
             EmitFormat format) {
  if (format == EmitFormat::Csv) {
    std::ostringstream os;
    os << "scheme,snr_db,se_bps_hz,seed\n";
    for (const auto& r : records)
      os << r.scheme << ',' << fmt_double(r.snr_db) << ',' << fmt_double(r.se_bps_hz)
         << ',' << r.seed << '\n';
    write_file(path, os.str());
    return;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : records)
    arr.push_back({{"scheme", r.scheme},
                   {"snr_db", r.snr_db},
                   {"se_bps_hz", r.se_bps_hz},
                   {"seed", r.seed}});
  write_file(path, arr.dump(2) + "\n");
}

void emit_doa(const std::vector<DoaPoint>& records, const std::string& path,
              EmitFormat format) {
  if (format == EmitFormat::Csv) {
    std::ostringstream os;
    os << "trial,true_deg,est_deg,err_deg,null_depth_db\n";
    for (const auto& r : records)
      os << r.trial << ',' << fmt_double(r.true_deg) << ',' << fmt_double(r.est_deg)
         << ',' << fmt_double(r.err_deg) << ',' << fmt_double(r.null_depth_db) << '\n';
    write_file(path, os.str());
    return;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : records)
    arr.push_back({{"trial", r.trial},
                   {"true_deg", r.true_deg},
                   {"est_deg", r.est_deg},
                   {"err_deg", r.err_deg},
                   {"null_depth_db", r.null_depth_db}});
  write_file(path, arr.dump(2) + "\n");
}

std::vector<BerPoint> parse_ber_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "experiment,snr_db,ue,ber,ci_lo,ci_hi,bits,errors,seed")
    throw std::runtime_error("unexpected ber csv header in " + path);
  std::vector<BerPoint> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    BerPoint p;
    std::getline(ss, p.experiment, ',');
    std::getline(ss, field, ',');
    p.snr_db = std::stod(field);
    std::getline(ss, field, ',');
    p.ue = std::stoi(field);
    std::getline(ss, field, ',');
    p.ber = std::stod(field);
    std::getline(ss, field, ',');
    p.ci_lo = std::stod(field);
    std::getline(ss, field, ',');
    p.ci_hi = std::stod(field);
    std::getline(ss, field, ',');
    p.bits = std::stoull(field);
    std::getline(ss, field, ',');
    p.errors = std::stoull(field);
    std::getline(ss, field, ',');
    p.seed = std::stoull(field);
    out.push_back(p);
  }
  return out;
}

void dump_channels(const ScenarioConfig& cfg, Eigen::Index trials,
                   const std::string& path) {
  std::ostringstream os;
  os << "trial,link,tap,re,im\n";
  for (Eigen::Index t = 0; t < trials; ++t) {
    RngStream rng = make_stream(cfg.seed, static_cast<std::uint64_t>(t), StreamTag::Channel);
    ChannelRealization ch = draw_channels(rng, cfg);
    auto emit_link = [&](const std::string& name, const CVec& taps) {
      for (Eigen::Index b = 0; b < taps.size(); ++b)
        os << t << ',' << name << ',' << b << ',' << fmt_double(taps[b].real()) << ','
           << fmt_double(taps[b].imag()) << '\n';
    };
    for (Eigen::Index j = 0; j < ch.n_enb; ++j)
      for (Eigen::Index i = 0; i < ch.n_ue; ++i)
        emit_link("enb" + std::to_string(j) + "-ue" + std::to_string(i),
                  ch.enb_taps(j, i));
    for (Eigen::Index q = 0; q < ch.n_ue; ++q)
      for (Eigen::Index l = 0; l < ch.n_ue; ++l) {
        if (q == l) continue;
        emit_link("ue" + std::to_string(q) + "-ue" + std::to_string(l),
                  ch.ue_taps(q, l));
      }
  }
  write_file(path, os.str());
}

}  // namespace fdsim
