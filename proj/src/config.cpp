#include "semsec/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "semsec/errors.hpp"

namespace semsec {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(fmt::format("config key '{}': cannot parse '{}'", key, text));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") {
    return true;
  }
  if (text == "false" || text == "0" || text == "no") {
    return false;
  }
  throw ConfigError(fmt::format("config key '{}': expected a boolean, got '{}'", key, text));
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_number<double>(key, trim(text.substr(0, comma))));
    if (comma == std::string_view::npos) {
      break;
    }
    text.remove_prefix(comma + 1);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view)>;

template <typename T>
Setter number(T RunConfig::*field) {
  return [field](RunConfig& c, std::string_view k, std::string_view v) {
    c.*field = parse_number<T>(k, v);
  };
}

template <typename T>
Setter synth_number(T SynthParams::*field) {
  return [field](RunConfig& c, std::string_view k, std::string_view v) {
    c.synth.*field = parse_number<T>(k, v);
  };
}

template <typename T>
Setter ofdm_number(T OfdmParams::*field) {
  return [field](RunConfig& c, std::string_view k, std::string_view v) {
    c.ofdm.*field = parse_number<T>(k, v);
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"dataset_file", [](RunConfig& c, auto, auto v) { c.dataset_file = std::string(v); }},
      {"n_items", synth_number(&SynthParams::n_items)},
      {"n_maps", synth_number(&SynthParams::n_maps)},
      {"map_height", synth_number(&SynthParams::height)},
      {"map_width", synth_number(&SynthParams::width)},
      {"n_classes", synth_number(&SynthParams::n_classes)},
      {"skew", synth_number(&SynthParams::skew)},
      {"data_seed", synth_number(&SynthParams::seed)},
      {"head_file", [](RunConfig& c, auto, auto v) { c.head_file = std::string(v); }},
      {"epochs", number(&RunConfig::epochs)},
      {"learning_rate", number(&RunConfig::learning_rate)},
      {"head_seed", number(&RunConfig::head_seed)},
      {"epsilon", number(&RunConfig::epsilon)},
      {"epsilons", [](RunConfig& c, auto k, auto v) { c.epsilons = parse_list(k, v); }},
      {"snr_db", [](RunConfig& c, auto k, auto v) { c.snr_db = parse_list(k, v); }},
      {"fft_len", ofdm_number(&OfdmParams::fft_len)},
      {"cp_len", ofdm_number(&OfdmParams::cp_len)},
      {"n_taps", ofdm_number(&OfdmParams::n_taps)},
      {"n_pilots", ofdm_number(&OfdmParams::n_pilots)},
      {"qam_order", ofdm_number(&OfdmParams::qam_order)},
      {"max_ofdm_symbols", number(&RunConfig::max_ofdm_symbols)},
      {"bits_per_sample", number(&RunConfig::bits_per_sample)},
      {"l_scores", number(&RunConfig::l_scores)},
      {"l_skey", number(&RunConfig::l_skey)},
      {"l_plk", number(&RunConfig::l_plk)},
      {"plk_noise", number(&RunConfig::plk_noise)},
      {"encrypt", [](RunConfig& c, auto k, auto v) { c.encrypt = parse_bool(k, v); }},
      {"allocate", [](RunConfig& c, auto k, auto v) { c.allocate = parse_bool(k, v); }},
      {"trials", number(&RunConfig::trials)},
      {"min_payload_bits", number(&RunConfig::min_payload_bits)},
      {"symbol_duration_us", number(&RunConfig::symbol_duration_us)},
      {"seed", number(&RunConfig::seed)},
      {"threads", number(&RunConfig::threads)},
      {"out_dir", [](RunConfig& c, auto, auto v) { c.out_dir = std::string(v); }},
  };
  return table;
}

}  // namespace

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) {
    throw ConfigError(fmt::format("unknown config key '{}'", key));
  }
  it->second(cfg, key, trim(value));
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (dataset_file.empty()) {
    if (synth.n_items == 0 || synth.n_maps == 0 || synth.height == 0 || synth.width == 0 ||
        synth.n_classes == 0) {
      fail("dataset dimensions must be >= 1");
    }
    if (synth.n_maps < synth.n_classes) {
      fail("n_maps must be >= n_classes");
    }
    if (!(synth.skew >= 0.0 && synth.skew <= 1.0)) {
      fail("skew must lie in [0, 1]");
    }
  }
  if (!(learning_rate > 0.0)) {
    fail("learning_rate must be > 0");
  }
  if (!(epsilon >= 0.0)) {
    fail("epsilon must be >= 0");
  }
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] >= 0.0) || (i > 0 && epsilons[i] < epsilons[i - 1])) {
      fail("epsilons must be >= 0 and sorted ascending");
    }
  }
  if (snr_db.empty()) {
    fail("snr_db list must not be empty");
  }
  ofdm.validate();
  if (max_ofdm_symbols == 0) {
    fail("max_ofdm_symbols must be >= 1");
  }
  if (bits_per_sample < 1 || bits_per_sample > 16) {
    fail("bits_per_sample must lie in [1, 16]");
  }
  if (l_scores < 1 || l_scores > 32) {
    fail("l_scores must lie in [1, 32]");
  }
  if (l_skey < 1 || l_skey > 64) {
    fail("l_skey must lie in [1, 64]");
  }
  if (l_plk == 0) {
    fail("l_plk must be >= 1");
  }
  if (!(plk_noise >= 0.0)) {
    fail("plk_noise must be >= 0");
  }
  if (trials == 0) {
    fail("trials must be >= 1");
  }
  if (!(symbol_duration_us > 0.0)) {
    fail("symbol_duration_us must be > 0");
  }
  if (threads == 0) {
    fail("threads must be >= 1");
  }
}

RunConfig parse_config(std::istream& in, std::string_view source) {
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) {
      text = text.substr(0, hash);
    }
    text = trim(text);
    if (text.empty()) {
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", source, lineno));
    }
    try {
      apply_setting(cfg, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", source, lineno, e.what()));
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string());
  }
  return parse_config(in, path.string());
}

std::string format_config(const RunConfig& c) {
  std::ostringstream out;
  auto line = [&](std::string_view key, const auto& value) {
    out << fmt::format("{} = {}\n", key, value);
  };
  auto list = [](const std::vector<double>& v) { return fmt::format("{}", fmt::join(v, ",")); };
  line("dataset_file", c.dataset_file);
  line("n_items", c.synth.n_items);
  line("n_maps", c.synth.n_maps);
  line("map_height", c.synth.height);
  line("map_width", c.synth.width);
  line("n_classes", c.synth.n_classes);
  line("skew", c.synth.skew);
  line("data_seed", c.synth.seed);
  line("head_file", c.head_file);
  line("epochs", c.epochs);
  line("learning_rate", c.learning_rate);
  line("head_seed", c.head_seed);
  line("epsilon", c.epsilon);
  line("epsilons", list(c.epsilons));
  line("snr_db", list(c.snr_db));
  line("fft_len", c.ofdm.fft_len);
  line("cp_len", c.ofdm.cp_len);
  line("n_taps", c.ofdm.n_taps);
  line("n_pilots", c.ofdm.n_pilots);
  line("qam_order", c.ofdm.qam_order);
  line("max_ofdm_symbols", c.max_ofdm_symbols);
  line("bits_per_sample", c.bits_per_sample);
  line("l_scores", c.l_scores);
  line("l_skey", c.l_skey);
  line("l_plk", c.l_plk);
  line("plk_noise", c.plk_noise);
  line("encrypt", c.encrypt);
  line("allocate", c.allocate);
  line("trials", c.trials);
  line("min_payload_bits", c.min_payload_bits);
  line("symbol_duration_us", c.symbol_duration_us);
  line("seed", c.seed);
  line("threads", c.threads);
  line("out_dir", c.out_dir);
  return out.str();
}

}  // namespace semsec
