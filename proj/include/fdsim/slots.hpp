#pragma once

#include <cstdint>
#include <vector>

#include "fdsim/channel.hpp"
#include "fdsim/downlink.hpp"
#include "fdsim/impairments.hpp"
#include "fdsim/scenario.hpp"
#include "fdsim/smart_antenna.hpp"
#include "fdsim/uplink.hpp"

namespace fdsim {

/// Substream tags so that toggling one impairment never shifts the draws of
/// another component (paired runs stay paired).
enum class StreamTag : std::uint64_t {
  Channel = 0,
  DownlinkBits = 1,
  UplinkBits = 2,
  DownlinkNoise = 3,
  UplinkNoise = 4,
  EnbSi = 5,
  Doa = 6,
  EnbTxNoise = 7,
  UeSiBase = 8,       // + UE index (up to 8 UEs)
  UeTxNoiseBase = 16,  // + UE index
  Calibration = 24,
};

RngStream make_stream(std::uint64_t seed, std::uint64_t trial, StreamTag tag,
                      std::uint64_t offset = 0);

/// Everything quasi-static for one Monte Carlo trial.
struct SlotEnv {
  ChannelRealization channels;
  FreqChannelSet freq;
  PrecoderSet precoders;
  std::vector<BeamformerState> beams;  // per UE
  // Estimated mode: per UE, signed error (deg) per constrained angle (look
  // first, then nulls); empty for a UE whose estimation failed.
  std::vector<std::vector<double>> doa_error_deg;
  int doa_failures = 0;
  SiChannel si_enb;
  std::vector<SiChannel> si_ue;
  AllocationMap alloc;
  double n0 = 0.0;
};

SlotEnv make_slot_env(const ScenarioConfig& cfg, std::uint64_t trial, double n0);

struct SlotResult {
  std::vector<std::vector<std::uint8_t>> decoded_bits;  // per UE
  std::vector<double> sinr;                             // per UE, linear
  // Per-tone accumulators for spectral-efficiency measurements.
  std::vector<RVec> tone_signal;  // per UE, |gain|^2 per data tone
  std::vector<RVec> tone_error;   // per UE, residual power per data tone
  // Combined-output component powers at the receiver front end.
  std::vector<double> desired_power;
  std::vector<double> cross_ue_power;
  std::vector<double> si_power;
  int regularized_tones = 0;
};

/// Full downlink chain for every UE, with the concurrent uplink transmissions
/// of all UEs as the interference/self-interference environment.
SlotResult downlink_slot(const ScenarioConfig& cfg, const SlotEnv& env,
                         const std::vector<std::vector<std::uint8_t>>& dl_bits,
                         const std::vector<std::vector<std::uint8_t>>& ul_bits,
                         std::uint64_t trial);

/// Full uplink chain at the eNB (block SSIC detection), with the eNB's own
/// concurrent downlink transmission as its self-interference environment.
SlotResult uplink_slot(const ScenarioConfig& cfg, const SlotEnv& env,
                       const std::vector<std::vector<std::uint8_t>>& dl_bits,
                       const std::vector<std::vector<std::uint8_t>>& ul_bits,
                       std::uint64_t trial);

std::vector<std::vector<std::uint8_t>> random_bits(const ScenarioConfig& cfg,
                                                   RngStream& rng);

}  // namespace fdsim
