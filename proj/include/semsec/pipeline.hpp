#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semsec/allocator.hpp"
#include "semsec/config.hpp"
#include "semsec/feature_maps.hpp"
#include "semsec/importance.hpp"
#include "semsec/keys.hpp"
#include "semsec/ofdm.hpp"
#include "semsec/selector.hpp"

namespace semsec {

/// Dataset plus the task head shared by transmitter and receiver.
struct Model {
  Dataset dataset;
  HeadParams head;
};

/// Loads or synthesizes the dataset and loads or trains the head.
Model build_model(const RunConfig& cfg);

/// Frame header delivered to every receiver alongside the waveform:
/// which maps were sent, in what order, their dequantization ranges and the
/// frame geometry. Assumed to arrive intact.
struct SideInfo {
  std::vector<MapBlock> blocks;  ///< transmission order
  std::vector<float> min_vals;   ///< per block
  std::vector<float> max_vals;   ///< per block
  unsigned bits_per_sample = 8;
  unsigned qam_order = 16;
  std::size_t n_maps = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t rows = 0;

  std::size_t payload_bits_per_map() const { return height * width * bits_per_sample; }
};

struct Transmission {
  ImportanceVector iv;
  Selection selection;
  KeyMaterial keys;
  AllocationMap alloc;
  SideInfo side;
  OfdmFrame frame;
  Bits plaintext;   ///< quantized payload bits in transmission order
  Bits ciphertext;  ///< plaintext XOR keystream (== plaintext when unencrypted)
  std::size_t payload_symbols = 0;

  bool nothing_transmitted() const { return selection.lambda == 0; }
};

/// QAM symbols needed for one map: ceil(H'W'B / log2(order)).
std::size_t symbols_per_map(const FeatureMapSet& item, unsigned bits_per_sample, unsigned qam_order);

/// Transmitter side of the scheme: importance, entropy-budget selection,
/// SKey/keystream derivation from the PLK, quantization, encryption,
/// CSI-ranked subcarrier allocation and OFDM framing. `csi_rank` is the
/// receiver's feedback; an empty span means identity allocation.
Transmission transmit(const FeatureMapSet& item, const RunConfig& cfg, const HeadParams& head,
                      double epsilon, std::span<const std::size_t> csi_rank,
                      std::span<const std::uint8_t> plk, std::uint64_t filler_seed);

/// What a receiver recovers from one frame.
struct Reception {
  CVec h_est;
  CVec equalized;                  ///< payload symbols in logical order
  std::vector<std::size_t> carriers;  ///< physical subcarrier of each equalized symbol
  Bits channel_bits;               ///< demodulated payload bits, before decryption
  Bits plain_bits;                 ///< after decryption
  std::optional<FeatureMapSet> recovered;
  std::size_t predicted_class = 0;
};

/// Legitimate receiver: MMSE estimation and equalization, deallocation with
/// its own CSI ranking, demodulation, decryption with SKey XOR its PLK,
/// dequantization and classification with the shared head.
Reception receive_legit(const ReceivedFrame& rx, const SideInfo& side, const RunConfig& cfg,
                        const HeadParams& head, std::span<const std::size_t> csi_rank,
                        const SkeyStream& skeys, std::span<const std::uint8_t> plk,
                        double noise_var);

/// Eavesdropper: same algorithms, no CSI feedback (identity allocation) and
/// no key (zero keystream).
Reception receive_eavesdrop(const ReceivedFrame& rx, const SideInfo& side, const RunConfig& cfg,
                            const HeadParams& head, double noise_var);

struct TrialOptions {
  double snr_db = 20.0;
  double epsilon = 0.01;
  bool encrypt = true;
  bool allocate = true;
  /// Eavesdropper listens through the legitimate channel and noise.
  bool eve_on_legit_channel = false;
  /// Noise variance override; NaN means derive it from snr_db.
  double noise_var = std::numeric_limits<double>::quiet_NaN();
  bool keep_constellation = false;
};

struct ConstellationPoint {
  double i = 0.0;
  double q = 0.0;
  std::size_t subcarrier = 0;
};

/// Per-trial transmission report.
struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t trial_seed = 0;
  std::size_t item = 0;
  std::size_t label = 0;
  double snr_db = 0.0;
  double epsilon = 0.0;
  std::size_t lambda = 0;
  std::size_t symbols = 0;
  double latency_us = 0.0;
  std::size_t payload_bits = 0;
  std::size_t legit_errors_channel = 0;
  std::size_t legit_errors_plain = 0;
  std::size_t eve_errors = 0;
  double l_cha = 0.0;
  std::size_t tx_class = 0;
  std::size_t rx_class = 0;
  bool class_correct = false;  ///< receiver prediction equals the label
  bool class_match = false;    ///< receiver prediction equals the transmitter's
  bool nothing_transmitted = false;
  bool static_environment = false;
  double plk_disagreement = 0.0;
  std::vector<std::size_t> perm;
  std::vector<ConstellationPoint> constellation;

  double legit_ber() const;
  double legit_ber_channel() const;
  double eve_ber() const;
  std::string perm_text() const;
  std::string perm_digest() const;
};

/// Seeds of one trial, all derived from (master seed, trial index). They do
/// not depend on SNR or epsilon, so sweeps reuse channels and noise shapes.
struct TrialSeeds {
  std::uint64_t trial;
  std::uint64_t legit_channel;
  std::uint64_t eve_channel;
  std::uint64_t plk;
  std::uint64_t sounding;
  std::uint64_t legit_noise;
  std::uint64_t eve_noise;
  std::uint64_t filler;
};

TrialSeeds trial_seeds(std::uint64_t master, std::size_t trial);

/// One end-to-end transmission of dataset item (trial mod n_items).
TrialRecord run_trial(const Model& model, const RunConfig& cfg, std::size_t trial,
                      const TrialOptions& options);

}  // namespace semsec
