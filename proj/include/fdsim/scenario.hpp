#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fdsim/impairments.hpp"
#include "fdsim/numerics.hpp"

namespace fdsim {

enum class PowerPolicy { Equal, WaterFill, Inversion };
enum class DoaMode { Oracle, Estimated };
enum class BeamformerKind { Lcmv, Clms };
enum class AllocationKind { Localized, Interleaved };

PowerPolicy power_policy_from_string(const std::string& s);
DoaMode doa_mode_from_string(const std::string& s);
std::string to_string(PowerPolicy p);
std::string to_string(DoaMode m);

/// Every scenario constant. Defaults reproduce the reference small-cell
/// setup: 256-tone grid with 180 occupied, two 4-antenna full-duplex UEs,
/// a 4-antenna full-duplex eNB, L=10 uniform-power Rayleigh taps, 16-QAM.
struct ScenarioConfig {
  Eigen::Index n_subcarriers = 256;   // N
  Eigen::Index n_data_tones = 180;    // M
  Eigen::Index n_ue = 2;              // K
  Eigen::Index n_enb_antennas = 4;    // Ne
  Eigen::Index n_ue_antennas = 4;     // Nr
  Eigen::Index n_taps = 10;           // L
  Eigen::Index cp_len = 18;           // 4.69 us at 3.84 MHz sampling
  int mod_order = 16;
  AllocationKind allocation = AllocationKind::Localized;

  double element_spacing_wl = 0.45;
  std::vector<double> doa_enb_deg = {10.0, 60.0};  // psi_e per UE
  // DoA of UE q as seen from UE l; empty = default rule psi(q,l) = doa_enb_deg[q]
  // (each UE sits in the other UEs' null directions).
  std::vector<double> doa_ue_deg;  // row-major (l, q), q != l, size K*(K-1)

  double snr_start_db = 0.0;
  double snr_stop_db = 30.0;
  double snr_step_db = 5.0;
  bool noiseless = false;  // N0 = 0 regardless of the grid
  Eigen::Index trials = 200;
  Eigen::Index max_bit_errors = 400;  // per-point early stop
  std::uint64_t seed = 1;

  SicMode sic_mode = SicMode::Full;
  bool si_enabled = true;
  bool pa_enabled = true;
  bool genie_sic = false;  // uplink SSIC cancels with true symbols

  PowerPolicy power_policy = PowerPolicy::Equal;
  double ue_xlink_gain_db = 0.0;
  double ue_corr_rho = 1.0;

  DoaMode doa_mode = DoaMode::Oracle;
  BeamformerKind beamformer = BeamformerKind::Lcmv;
  double clms_mu = 0.01;
  Eigen::Index clms_iterations = 500;
  Eigen::Index doa_snapshots = 200;
  double doa_snapshot_snr_db = 20.0;

  double si_self_db = 60.0;
  double si_cross_db = 20.0;
  double si_cancel_depth_db = 110.0;
  double tx_noise_evm_db = -30.0;
  PaModel pa;

  Eigen::Index threads = 0;  // 0 = hardware concurrency
  Eigen::Index calibration_draws = 400;

  Eigen::Index bits_per_slot_per_ue() const;
  double doa_ue_rad(Eigen::Index l, Eigen::Index q) const;  // q-th UE seen from l
  double doa_enb_rad(Eigen::Index l) const;
  std::vector<double> snr_grid_db() const;

  /// All violations at once; empty means valid.
  std::vector<std::string> validate() const;
  void validate_or_throw() const;
};

/// Flat key=value file ('#' comments). Unknown keys are an error.
ScenarioConfig load_config_file(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text, ScenarioConfig base = {});

/// Applies one key=value assignment (shared by the file parser and CLI).
void apply_config_entry(ScenarioConfig& cfg, const std::string& key,
                        const std::string& value);

}  // namespace fdsim
