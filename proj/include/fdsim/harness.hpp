#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdsim/scenario.hpp"
#include "fdsim/slots.hpp"

namespace fdsim {

enum class LinkDirection { Downlink, Uplink };

struct BerPoint {
  std::string experiment;
  double snr_db = 0.0;
  int ue = 1;  // 1-based in reports
  double ber = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
  double mean_sinr_db = 0.0;
  double wall_time_s = 0.0;  // diagnostics only, never emitted
  std::uint64_t seed = 0;
};

struct SePoint {
  std::string scheme;  // fd | alt-dir | hd-tdd
  double snr_db = 0.0;
  double se_bps_hz = 0.0;
  std::uint64_t seed = 0;
};

struct DoaPoint {
  std::uint64_t trial = 0;
  double true_deg = 0.0;
  double est_deg = 0.0;
  double err_deg = 0.0;
  double null_depth_db = 0.0;
};

struct DoaSummary {
  std::vector<DoaPoint> points;
  double rmse_deg = 0.0;
  int failures = 0;
  double null_depth_p95_db = 0.0;  // 95th percentile (closest to 0 dB) depth
};

/// Wilson 95% score interval.
void wilson_interval(std::uint64_t errors, std::uint64_t bits, double& lo, double& hi);

/// Mean received per-tone desired symbol energy at the given receiver,
/// measured over a fixed calibration ensemble. SNR grids translate to
/// N0 = reference / 10^(snr/10).
double calibrate_reference_energy(const ScenarioConfig& cfg, LinkDirection dir);

/// Monte Carlo BER sweep over the configured SNR grid. Fresh channels, bits
/// and noise per trial; Wilson intervals per UE; a point stops early once
/// every UE has accumulated cfg.max_bit_errors errors.
std::vector<BerPoint> run_ber(const ScenarioConfig& cfg, LinkDirection dir);

/// Downlink spectral efficiency of the three schedulings: proposed FD (all
/// UEs concurrently), HD-TDD (one UE, alternate slots, time-halved), and
/// alternating-direction (one UE in downlink while the other uplinks).
/// All schemes share one calibrated N0 per SNR point.
std::vector<SePoint> run_spectral_efficiency(const ScenarioConfig& cfg);

/// DoA estimation accuracy and resulting null depths over cfg.trials runs.
DoaSummary run_doa_experiment(const ScenarioConfig& cfg);

enum class EmitFormat { Csv, Json };

void emit_ber(const std::vector<BerPoint>& records, const std::string& path,
              EmitFormat format);
void emit_se(const std::vector<SePoint>& records, const std::string& path,
             EmitFormat format);
void emit_doa(const std::vector<DoaPoint>& records, const std::string& path,
              EmitFormat format);

/// Inverse of emit_ber's CSV writer (round-trip checked in tests).
std::vector<BerPoint> parse_ber_csv(const std::string& path);

/// trial,link,tap,re,im channel dump for debugging.
void dump_channels(const ScenarioConfig& cfg, Eigen::Index trials,
                   const std::string& path);

}  // namespace fdsim
