#include "fdsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace fdsim {

PowerPolicy power_policy_from_string(const std::string& s) {
  if (s == "equal") return PowerPolicy::Equal;
  if (s == "waterfill") return PowerPolicy::WaterFill;
  if (s == "inversion") return PowerPolicy::Inversion;
  throw std::invalid_argument("unknown power policy: " + s);
}

std::string to_string(PowerPolicy p) {
  switch (p) {
    case PowerPolicy::Equal: return "equal";
    case PowerPolicy::WaterFill: return "waterfill";
    case PowerPolicy::Inversion: return "inversion";
  }
  return "?";
}

DoaMode doa_mode_from_string(const std::string& s) {
  if (s == "oracle") return DoaMode::Oracle;
  if (s == "estimated") return DoaMode::Estimated;
  throw std::invalid_argument("unknown doa mode: " + s);
}

std::string to_string(DoaMode m) {
  return m == DoaMode::Oracle ? "oracle" : "estimated";
}

Eigen::Index ScenarioConfig::bits_per_slot_per_ue() const {
  return n_data_tones * static_cast<Eigen::Index>(std::lround(std::log2(mod_order)));
}

double ScenarioConfig::doa_enb_rad(Eigen::Index l) const {
  return doa_enb_deg.at(static_cast<std::size_t>(l)) * M_PI / 180.0;
}

double ScenarioConfig::doa_ue_rad(Eigen::Index l, Eigen::Index q) const {
  if (!doa_ue_deg.empty()) {
    // Row-major (l, q) with the q == l slot skipped.
    Eigen::Index col = q < l ? q : q - 1;
    return doa_ue_deg.at(static_cast<std::size_t>(l * (n_ue - 1) + col)) * M_PI / 180.0;
  }
  // Default geometry: UE q sits where UE l would point a null anyway — the
  // same bearing the eNB uses toward UE q.
  return doa_enb_rad(q);
}

std::vector<double> ScenarioConfig::snr_grid_db() const {
  std::vector<double> grid;
  if (snr_step_db <= 0.0) {
    grid.push_back(snr_start_db);
    return grid;
  }
  for (double s = snr_start_db; s <= snr_stop_db + 1e-9; s += snr_step_db)
    grid.push_back(s);
  return grid;
}

std::vector<std::string> ScenarioConfig::validate() const {
  std::vector<std::string> errs;
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  require(n_subcarriers >= 1, "n_subcarriers must be >= 1");
  require(n_data_tones >= 1 && n_data_tones <= n_subcarriers,
          "n_data_tones must satisfy 1 <= M <= N");
  require(n_ue >= 1, "n_ue must be >= 1");
  require(n_enb_antennas >= 1, "n_enb_antennas must be >= 1");
  require(n_ue_antennas >= 1, "n_ue_antennas must be >= 1");
  // Subcarrier sharing bound with the correlated UE array counted as one
  // effective antenna: K_hat = min(floor(Ne/1), K).
  require(n_ue <= n_enb_antennas,
          "n_ue exceeds the shared-subcarrier bound (K must be <= Ne)");
  require(n_ue <= n_ue_antennas,
          "beamformer needs K constraints <= Nr (1 look + K-1 nulls)");
  require(n_taps >= 1, "n_taps must be >= 1");
  require(n_taps <= n_subcarriers, "n_taps must be <= n_subcarriers");
  require(cp_len >= n_taps - 1, "cp_len must be >= L-1");
  require(cp_len <= n_subcarriers, "cp_len must be <= N");
  require(mod_order == 4 || mod_order == 16 || mod_order == 64,
          "mod_order must be 4, 16 or 64");
  require(static_cast<Eigen::Index>(doa_enb_deg.size()) == n_ue,
          "doa_enb_deg needs one entry per UE");
  require(doa_ue_deg.empty() ||
              static_cast<Eigen::Index>(doa_ue_deg.size()) == n_ue * (n_ue - 1),
          "doa_ue_deg needs K*(K-1) entries when given");
  require(element_spacing_wl > 0.0, "element_spacing_wl must be positive");
  require(trials >= 1, "trials must be >= 1");
  require(ue_corr_rho >= 0.0 && ue_corr_rho <= 1.0, "ue_corr_rho must be in [0,1]");
  require(clms_mu >= 0.0, "clms_mu must be >= 0");
  require(clms_iterations >= 0, "clms_iterations must be >= 0");
  require(doa_snapshots >= n_ue_antennas,
          "doa_snapshots must be >= Nr for a full-rank covariance");
  require(calibration_draws >= 1, "calibration_draws must be >= 1");
  if (pa_enabled) {
    try {
      pa.validate(4.0);
    } catch (const std::exception& e) {
      errs.push_back(e.what());
    }
  }
  return errs;
}

void ScenarioConfig::validate_or_throw() const {
  auto errs = validate();
  if (errs.empty()) return;
  std::string msg = "invalid scenario config:";
  for (const auto& e : errs) msg += "\n  - " + e;
  throw std::invalid_argument(msg);
}

namespace {

std::vector<double> parse_double_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected boolean, got '" + v + "'");
}

}  // namespace

void apply_config_entry(ScenarioConfig& cfg, const std::string& key,
                        const std::string& value) {
  using Setter = std::function<void(ScenarioConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"n_subcarriers", [](auto& c, const auto& v) { c.n_subcarriers = std::stol(v); }},
      {"n_data_tones", [](auto& c, const auto& v) { c.n_data_tones = std::stol(v); }},
      {"n_ue", [](auto& c, const auto& v) { c.n_ue = std::stol(v); }},
      {"n_enb_antennas", [](auto& c, const auto& v) { c.n_enb_antennas = std::stol(v); }},
      {"n_ue_antennas", [](auto& c, const auto& v) { c.n_ue_antennas = std::stol(v); }},
      {"n_taps", [](auto& c, const auto& v) { c.n_taps = std::stol(v); }},
      {"cp_len", [](auto& c, const auto& v) { c.cp_len = std::stol(v); }},
      {"mod_order", [](auto& c, const auto& v) { c.mod_order = std::stoi(v); }},
      {"allocation",
       [](auto& c, const auto& v) {
         if (v == "localized") c.allocation = AllocationKind::Localized;
         else if (v == "interleaved") c.allocation = AllocationKind::Interleaved;
         else throw std::invalid_argument("unknown allocation: " + v);
       }},
      {"element_spacing_wl",
       [](auto& c, const auto& v) { c.element_spacing_wl = std::stod(v); }},
      {"doa_enb_deg", [](auto& c, const auto& v) { c.doa_enb_deg = parse_double_list(v); }},
      {"doa_ue_deg", [](auto& c, const auto& v) { c.doa_ue_deg = parse_double_list(v); }},
      {"snr_start_db", [](auto& c, const auto& v) { c.snr_start_db = std::stod(v); }},
      {"snr_stop_db", [](auto& c, const auto& v) { c.snr_stop_db = std::stod(v); }},
      {"snr_step_db", [](auto& c, const auto& v) { c.snr_step_db = std::stod(v); }},
      {"noiseless", [](auto& c, const auto& v) { c.noiseless = parse_bool(v); }},
      {"trials", [](auto& c, const auto& v) { c.trials = std::stol(v); }},
      {"max_bit_errors", [](auto& c, const auto& v) { c.max_bit_errors = std::stol(v); }},
      {"seed", [](auto& c, const auto& v) { c.seed = std::stoull(v); }},
      {"sic_mode", [](auto& c, const auto& v) { c.sic_mode = sic_mode_from_string(v); }},
      {"si_enabled", [](auto& c, const auto& v) { c.si_enabled = parse_bool(v); }},
      {"pa_enabled", [](auto& c, const auto& v) { c.pa_enabled = parse_bool(v); }},
      {"genie_sic", [](auto& c, const auto& v) { c.genie_sic = parse_bool(v); }},
      {"power_policy",
       [](auto& c, const auto& v) { c.power_policy = power_policy_from_string(v); }},
      {"ue_xlink_gain_db",
       [](auto& c, const auto& v) { c.ue_xlink_gain_db = std::stod(v); }},
      {"ue_corr_rho", [](auto& c, const auto& v) { c.ue_corr_rho = std::stod(v); }},
      {"doa_mode", [](auto& c, const auto& v) { c.doa_mode = doa_mode_from_string(v); }},
      {"beamformer",
       [](auto& c, const auto& v) {
         if (v == "lcmv") c.beamformer = BeamformerKind::Lcmv;
         else if (v == "clms") c.beamformer = BeamformerKind::Clms;
         else throw std::invalid_argument("unknown beamformer: " + v);
       }},
      {"clms_mu", [](auto& c, const auto& v) { c.clms_mu = std::stod(v); }},
      {"clms_iterations", [](auto& c, const auto& v) { c.clms_iterations = std::stol(v); }},
      {"doa_snapshots", [](auto& c, const auto& v) { c.doa_snapshots = std::stol(v); }},
      {"doa_snapshot_snr_db",
       [](auto& c, const auto& v) { c.doa_snapshot_snr_db = std::stod(v); }},
      {"si_self_db", [](auto& c, const auto& v) { c.si_self_db = std::stod(v); }},
      {"si_cross_db", [](auto& c, const auto& v) { c.si_cross_db = std::stod(v); }},
      {"si_cancel_depth_db",
       [](auto& c, const auto& v) { c.si_cancel_depth_db = std::stod(v); }},
      {"tx_noise_evm_db", [](auto& c, const auto& v) { c.tx_noise_evm_db = std::stod(v); }},
      {"pa_ibo_db", [](auto& c, const auto& v) { c.pa.input_backoff_db = std::stod(v); }},
      {"pa_amam",
       [](auto& c, const auto& v) {
         auto p = parse_double_list(v);
         if (p.size() != 4) throw std::invalid_argument("pa_amam needs 4 values");
         c.pa.x1 = p[0]; c.pa.x2 = p[1]; c.pa.x3 = p[2]; c.pa.x4 = p[3];
       }},
      {"pa_ampm",
       [](auto& c, const auto& v) {
         auto p = parse_double_list(v);
         if (p.size() != 4) throw std::invalid_argument("pa_ampm needs 4 values");
         c.pa.y1 = p[0]; c.pa.y2 = p[1]; c.pa.y3 = p[2]; c.pa.y4 = p[3];
       }},
      {"threads", [](auto& c, const auto& v) { c.threads = std::stol(v); }},
      {"calibration_draws",
       [](auto& c, const auto& v) { c.calibration_draws = std::stol(v); }},
  };
  auto it = setters.find(key);
  if (it == setters.end())
    throw std::invalid_argument("unknown config key: " + key);
  try {
    it->second(cfg, value);
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
  }
}

ScenarioConfig parse_config_text(const std::string& text, ScenarioConfig base) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto strip = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    apply_config_entry(base, key, value);
  }
  return base;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace fdsim
