#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "semsec/feature_maps.hpp"
#include "semsec/ofdm.hpp"

namespace semsec {

/// Everything a simulation run depends on. Text form: one `key = value`
/// per line, `#` starts a comment, lists are comma-separated.
struct RunConfig {
  // source data: a dataset file, or synthesized when empty
  std::string dataset_file;
  SynthParams synth;

  // classification head: loaded when head_file is set, otherwise trained
  std::string head_file;
  std::size_t epochs = 200;
  double learning_rate = 0.1;
  std::uint64_t head_seed = 7;

  double epsilon = 0.01;
  std::vector<double> epsilons = {0.0, 0.0001, 0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
  std::vector<double> snr_db = {0.0, 5.0, 10.0, 15.0, 20.0};

  OfdmParams ofdm;
  std::size_t max_ofdm_symbols = 4096;
  unsigned bits_per_sample = 8;

  unsigned l_scores = 16;
  unsigned l_skey = 64;
  std::size_t l_plk = 128;
  double plk_noise = 0.0;

  bool encrypt = true;
  bool allocate = true;

  std::size_t trials = 100;
  std::size_t min_payload_bits = 100000;
  double symbol_duration_us = 1.0;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string out_dir = "out";

  /// Throws ConfigError when a field is outside its module's bounds.
  void validate() const;
};

/// Sets one field from its text form. Unknown keys and unparsable values
/// throw ConfigError.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

RunConfig parse_config(std::istream& in, std::string_view source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(format_config(c)) reproduces c.
std::string format_config(const RunConfig& cfg);

}  // namespace semsec
