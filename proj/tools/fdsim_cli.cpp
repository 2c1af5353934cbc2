#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fdsim/harness.hpp"
#include "fdsim/modem.hpp"
#include "fdsim/smart_antenna.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string snr;
  long trials = -1;
  long long seed = -1;
  std::string sic_mode;
  std::string doa_mode;
  std::string out;
  std::string format = "csv";
  bool dump_channels = false;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "scenario config file (key=value)");
  sub->add_option("--snr", o.snr, "SNR grid start:stop:step in dB");
  sub->add_option("--trials", o.trials, "Monte Carlo trials per SNR point");
  sub->add_option("--seed", o.seed, "base RNG seed");
  sub->add_option("--sic-mode", o.sic_mode,
                  "self-interference cancellation: none|linear|nl-no-ctc|full");
  sub->add_option("--doa-mode", o.doa_mode, "oracle|estimated");
  sub->add_option("--out", o.out, "output file path");
  sub->add_option("--format", o.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_flag("--dump-channels", o.dump_channels,
                "also write <out>.channels.csv with the drawn taps");
}

fdsim::ScenarioConfig build_config(const CommonOpts& o) {
  fdsim::ScenarioConfig cfg;
  if (!o.config_path.empty()) cfg = fdsim::load_config_file(o.config_path);
  if (!o.snr.empty()) {
    auto p1 = o.snr.find(':');
    auto p2 = o.snr.rfind(':');
    if (p1 == std::string::npos || p2 == p1)
      throw std::invalid_argument("--snr expects start:stop:step");
    cfg.snr_start_db = std::stod(o.snr.substr(0, p1));
    cfg.snr_stop_db = std::stod(o.snr.substr(p1 + 1, p2 - p1 - 1));
    cfg.snr_step_db = std::stod(o.snr.substr(p2 + 1));
  }
  if (o.trials >= 0) cfg.trials = o.trials;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.sic_mode.empty()) cfg.sic_mode = fdsim::sic_mode_from_string(o.sic_mode);
  if (!o.doa_mode.empty()) cfg.doa_mode = fdsim::doa_mode_from_string(o.doa_mode);
  return cfg;
}

fdsim::EmitFormat emit_format(const CommonOpts& o) {
  return o.format == "json" ? fdsim::EmitFormat::Json : fdsim::EmitFormat::Csv;
}

std::string out_path(const CommonOpts& o, const std::string& stem) {
  if (!o.out.empty()) return o.out;
  return stem + (o.format == "json" ? ".json" : ".csv");
}

void maybe_dump_channels(const fdsim::ScenarioConfig& cfg, const CommonOpts& o,
                         const std::string& out) {
  if (!o.dump_channels) return;
  std::string path = out + ".channels.csv";
  fdsim::dump_channels(cfg, std::min<Eigen::Index>(cfg.trials, 16), path);
  std::cerr << "channel dump: " << path << "\n";
}

int run_ber_cmd(const CommonOpts& o, fdsim::LinkDirection dir, const std::string& stem) {
  auto cfg = build_config(o);
  auto records = fdsim::run_ber(cfg, dir);
  std::string path = out_path(o, stem);
  fdsim::emit_ber(records, path, emit_format(o));
  for (const auto& r : records)
    std::printf("%s snr=%g ue=%d ber=%.6g ci=[%.6g,%.6g] bits=%llu errors=%llu\n",
                r.experiment.c_str(), r.snr_db, r.ue, r.ber, r.ci_lo, r.ci_hi,
                static_cast<unsigned long long>(r.bits),
                static_cast<unsigned long long>(r.errors));
  std::cerr << "wrote " << path << "\n";
  maybe_dump_channels(cfg, o, path);
  return 0;
}

int run_se_cmd(const CommonOpts& o) {
  auto cfg = build_config(o);
  auto records = fdsim::run_spectral_efficiency(cfg);
  std::string path = out_path(o, "spectral-efficiency");
  fdsim::emit_se(records, path, emit_format(o));
  for (const auto& r : records)
    std::printf("se scheme=%s snr=%g se=%.4f bit/s/Hz\n", r.scheme.c_str(), r.snr_db,
                r.se_bps_hz);
  std::cerr << "wrote " << path << "\n";
  return 0;
}

int run_doa_cmd(const CommonOpts& o) {
  auto cfg = build_config(o);
  cfg.doa_mode = fdsim::DoaMode::Estimated;
  auto summary = fdsim::run_doa_experiment(cfg);
  std::string path = out_path(o, "doa");
  fdsim::emit_doa(summary.points, path, emit_format(o));
  std::printf("doa rmse=%.4f deg, failures=%d, null depth p95=%.1f dB over %lld trials\n",
              summary.rmse_deg, summary.failures, summary.null_depth_p95_db,
              static_cast<long long>(cfg.trials));
  std::cerr << "wrote " << path << "\n";
  return 0;
}

int run_beampattern_cmd(const CommonOpts& o) {
  auto cfg = build_config(o);
  cfg.validate_or_throw();
  // UE 1's beam: unit gain toward the eNB, nulls toward the other UEs.
  std::vector<double> angles{cfg.doa_enb_rad(0)};
  for (Eigen::Index q = 1; q < cfg.n_ue; ++q) angles.push_back(cfg.doa_ue_rad(0, q));
  auto steering = fdsim::make_steering(angles, cfg.n_ue_antennas, cfg.element_spacing_wl);
  auto beam = fdsim::quiescent_beamformer(steering);
  std::string path = out_path(o, "beampattern");
  FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) {
    std::cerr << "cannot open " << path << "\n";
    return 1;
  }
  std::fprintf(f, "angle_deg,gain_db\n");
  for (double deg = -90.0; deg <= 90.0 + 1e-9; deg += 0.1) {
    double g = std::norm(beam.gain(deg * M_PI / 180.0));
    std::fprintf(f, "%.1f,%.6g\n", deg, 10.0 * std::log10(std::max(g, 1e-30)));
  }
  std::fclose(f);
  std::cerr << "wrote " << path << "\n";
  return 0;
}

int run_selftest(const CommonOpts& o) {
  auto cfg = build_config(o);
  cfg.validate_or_throw();
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", name.c_str());
    if (!ok) ++failures;
  };

  {  // modem loopback through every transmit/receive stage
    fdsim::QamMapper mapper(cfg.mod_order);
    auto alloc = fdsim::AllocationMap::localized(cfg.n_subcarriers, cfg.n_data_tones);
    fdsim::RngStream rng(cfg.seed, 7001);
    std::vector<std::uint8_t> bits(cfg.bits_per_slot_per_ue());
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
    auto syms = mapper.map(bits);
    auto grid = alloc.map(fdsim::dft_spread(syms));
    auto t = fdsim::to_time_with_cp(grid, cfg.cp_len, cfg.n_taps);
    auto back = alloc.demap(fdsim::strip_cp_and_dft(t, cfg.n_subcarriers, cfg.cp_len));
    auto rec = mapper.demap_hard(fdsim::dft_despread(back));
    check("modem loopback", rec == bits);
  }
  {  // precoder interference elimination
    fdsim::RngStream rng(cfg.seed, 7002);
    auto ch = fdsim::draw_channels(rng, cfg);
    auto hf = fdsim::freq_response(ch, cfg.n_subcarriers);
    auto alloc = fdsim::AllocationMap::localized(cfg.n_subcarriers, cfg.n_data_tones);
    auto prec = fdsim::build_precoders(hf, alloc, cfg.power_policy, 0.0);
    double worst = 0.0;
    for (Eigen::Index m = 0; m < prec.n_tones; ++m) {
      Eigen::Index tone = alloc.tone_index[m];
      for (Eigen::Index l = 0; l < cfg.n_ue; ++l) {
        auto row = hf.downlink_row(l, tone);
        for (Eigen::Index i = 0; i < cfg.n_ue; ++i) {
          if (i == l) continue;
          worst = std::max(worst, std::abs((row * prec.ue_column(i, m))(0)));
        }
      }
    }
    check("precoder nulling (max cross-UE leak " + std::to_string(worst) + ")",
          worst < 1e-9);
  }
  {  // beam contract
    std::vector<double> angles{cfg.doa_enb_rad(0)};
    for (Eigen::Index q = 1; q < cfg.n_ue; ++q) angles.push_back(cfg.doa_ue_rad(0, q));
    auto st = fdsim::make_steering(angles, cfg.n_ue_antennas, cfg.element_spacing_wl);
    auto beam = fdsim::quiescent_beamformer(st);
    bool ok = std::abs(beam.gain(angles[0]) - fdsim::cplx(1.0, 0.0)) < 1e-3;
    for (std::size_t a = 1; a < angles.size(); ++a)
      ok = ok && std::abs(beam.gain(angles[a])) < 1e-3;
    check("beamformer look/null contract", ok);
  }
  {  // noiseless perfect chain, both directions
    fdsim::ScenarioConfig clean = cfg;
    clean.noiseless = true;
    clean.si_enabled = false;
    clean.pa_enabled = false;
    clean.sic_mode = fdsim::SicMode::Full;
    clean.doa_mode = fdsim::DoaMode::Oracle;
    clean.trials = 4;
    clean.snr_start_db = clean.snr_stop_db = 0.0;
    bool ok = true;
    for (auto dir : {fdsim::LinkDirection::Downlink, fdsim::LinkDirection::Uplink})
      for (const auto& r : fdsim::run_ber(clean, dir)) ok = ok && r.errors == 0;
    check("noiseless perfect chain (downlink+uplink)", ok);
  }
  std::printf("%s\n", failures == 0 ? "selftest: all checks passed"
                                    : "selftest: FAILURES present");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex SC-FDMA cell link-level simulator"};
  app.require_subcommand(1);

  CommonOpts o_dl, o_ul, o_se, o_doa, o_bp, o_st;
  auto* dl = app.add_subcommand("ber-downlink", "Monte Carlo downlink BER sweep");
  add_common(dl, o_dl);
  auto* ul = app.add_subcommand("ber-uplink", "Monte Carlo uplink BER sweep");
  add_common(ul, o_ul);
  auto* se = app.add_subcommand("spectral-efficiency",
                                "downlink spectral efficiency of three schedulings");
  add_common(se, o_se);
  auto* doa = app.add_subcommand("doa", "DoA estimation accuracy experiment");
  add_common(doa, o_doa);
  auto* bp = app.add_subcommand("beampattern", "emit the UE1 beam pattern as CSV");
  add_common(bp, o_bp);
  auto* st = app.add_subcommand("selftest", "run quick built-in sanity checks");
  add_common(st, o_st);

  CLI11_PARSE(app, argc, argv);

  try {
    if (dl->parsed()) return run_ber_cmd(o_dl, fdsim::LinkDirection::Downlink, "ber-downlink");
    if (ul->parsed()) return run_ber_cmd(o_ul, fdsim::LinkDirection::Uplink, "ber-uplink");
    if (se->parsed()) return run_se_cmd(o_se);
    if (doa->parsed()) return run_doa_cmd(o_doa);
    if (bp->parsed()) return run_beampattern_cmd(o_bp);
    if (st->parsed()) return run_selftest(o_st);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
