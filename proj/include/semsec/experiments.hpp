#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "semsec/config.hpp"
#include "semsec/pipeline.hpp"

namespace semsec {

/// Runs body(i) for i in [0, n) on up to `threads` workers. Callers write
/// results into slot i, so output never depends on scheduling.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

struct BerSweepRow {
  double snr_db = 0.0;
  std::size_t trials = 0;
  std::size_t payload_bits = 0;
  /// Received ciphertext against transmitted ciphertext.
  double legit_ber_encrypted = 0.0;
  /// Decrypted bits against the plaintext payload (same frames).
  double legit_ber_plaintext = 0.0;
  /// Control run with encryption switched off, same seeds.
  double legit_ber_unencrypted = 0.0;
  double eve_ber = 0.0;
  double mean_l_cha = 0.0;
};

struct ConstellationRow {
  double i = 0.0;
  double q = 0.0;
  std::size_t subcarrier = 0;
  std::size_t frame = 0;
  double snr_db = 0.0;
};

struct BerSweepResult {
  std::vector<BerSweepRow> rows;
  std::vector<ConstellationRow> constellation;
};

/// Per SNR, runs trials in batches of cfg.trials until at least cfg.trials
/// trials and cfg.min_payload_bits payload bits are accumulated. The first
/// frame at each SNR is kept for the constellation dump.
BerSweepResult run_ber_sweep(const Model& model, const RunConfig& cfg);

struct LatencySweepRow {
  double epsilon = 0.0;
  std::size_t items = 0;
  double mean_lambda = 0.0;
  double mean_symbols = 0.0;
  double latency_us = 0.0;
  /// mean_symbols over the all-maps symbol count.
  double symbol_ratio = 0.0;
  double accuracy = 0.0;
  double class_match_rate = 0.0;
  double legit_ber = 0.0;
};

/// One transmission per dataset item for each epsilon, at the first SNR in
/// cfg.snr_db. Throws ConfigError when epsilons are not ascending.
std::vector<LatencySweepRow> run_latency_sweep(const Model& model, const RunConfig& cfg);

/// Exact brute-force search-space sizes at the configured key lengths.
std::string search_space_report(const RunConfig& cfg);

void write_trial_csv(std::ostream& out, std::span<const TrialRecord> records);
void write_ber_csv(std::ostream& out, std::span<const BerSweepRow> rows);
void write_constellation_csv(std::ostream& out, std::span<const ConstellationRow> rows);
void write_latency_csv(std::ostream& out, std::span<const LatencySweepRow> rows);

/// Writes `text` to `path`, creating parent directories. I/O failures
/// throw std::runtime_error naming the path.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace semsec
