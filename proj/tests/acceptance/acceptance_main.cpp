// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails. CLI-level checks drive the built
// `semsec` binary; the rest run in-process against independent oracles.
//
// usage: semsec_acceptance <work-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include "oracles.hpp"
#include "semsec/allocator.hpp"
#include "semsec/importance.hpp"
#include "semsec/keys.hpp"
#include "semsec/ofdm.hpp"
#include "semsec/rng.hpp"
#include "semsec/selector.hpp"

namespace fs = std::filesystem;
using namespace semsec;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Table = std::vector<std::map<std::string, std::string>>;

fs::path g_work;

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = fmt::format("\"{}\" {} > \"{}\" 2>&1", SEMSEC_CLI, args, log.string());
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Table read_csv(const fs::path& p) {
  std::ifstream in(p);
  Table rows;
  std::string line;
  std::vector<std::string> header;
  const auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      out.push_back(cell);
    }
    return out;
  };
  if (!std::getline(in, line)) {
    return rows;
  }
  header = split(line);
  while (std::getline(in, line)) {
    const auto cells = split(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) {
      row[header[i]] = cells[i];
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double num(const std::map<std::string, std::string>& row, const std::string& key) {
  return std::stod(row.at(key));
}

// The default BER sweep is shared by criteria 1, 2 and 11.
struct BerRun {
  bool ok = false;
  double seconds = 0.0;
  Table ber;
  Table constellation;
};

const BerRun& ber_run() {
  static const BerRun run = [] {
    BerRun r;
    const fs::path out = g_work / "ber";
    const auto start = std::chrono::steady_clock::now();
    const int rc = run_cli(fmt::format("ber-sweep --out \"{}\" --snr 0,5,10,15,20", out.string()),
                           g_work / "ber.log");
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.ok = rc == 0;
    if (r.ok) {
      r.ber = read_csv(out / "ber_sweep.csv");
      r.constellation = read_csv(out / "constellation.csv");
    }
    return r;
  }();
  return run;
}

Outcome eavesdropper_at_chance() {
  const BerRun& r = ber_run();
  if (!r.ok || r.ber.size() != 5) {
    return {false, "ber-sweep failed; see ber.log"};
  }
  bool pass = r.seconds < 120.0;
  std::string detail;
  for (const auto& row : r.ber) {
    const double eve = num(row, "eve_ber");
    const double bits = num(row, "payload_bits");
    pass = pass && eve >= 0.45 && eve <= 0.55 && bits >= 1e5;
    detail += fmt::format("{}dB:{:.4f}({:.0f} bits) ", row.at("snr_db"), eve, bits);
  }
  detail += fmt::format("runtime {:.1f}s", r.seconds);
  return {pass, detail};
}

Outcome legit_transparency() {
  const BerRun& r = ber_run();
  if (!r.ok || r.ber.empty()) {
    return {false, "ber-sweep failed"};
  }
  bool pass = true;
  std::string detail;
  for (const auto& row : r.ber) {
    pass = pass && row.at("legit_ber_encrypted") == row.at("legit_ber_plaintext");
    detail += fmt::format("{}dB:{}/{} (unencrypted control {}) ", row.at("snr_db"), row.at("legit_ber_encrypted"),
                          row.at("legit_ber_plaintext"), row.at("legit_ber_unencrypted"));
  }
  return {pass, detail};
}

Outcome mmse_closed_forms() {
  ResourceGrid one(1, 1);
  one.at(0, 0) = 1.0;
  const double shrink = std::abs(mmse_estimate(one, one, 1.0)[0] - cplx(0.5, 0.0));

  ResourceGrid y(1, 1);
  y.at(0, 0) = cplx(0.7, -0.2);
  ResourceGrid y2(1, 1);
  y2.at(0, 0) = 2.0 * y.at(0, 0);
  const double inversion = std::abs(mmse_equalize(y2, CVec{cplx(2, 0)}, 0.0).at(0, 0) - y.at(0, 0));
  const double pass_through = std::abs(mmse_equalize(y, CVec{cplx(1, 0)}, 0.0).at(0, 0) - y.at(0, 0));
  const double worst = std::max({shrink, inversion, pass_through});
  return {worst <= 1e-12, fmt::format("shrinkage {:.1e}, inversion {:.1e}, pass-through {:.1e}", shrink,
                                      inversion, pass_through)};
}

Outcome estimation_quality() {
  std::vector<double> losses;
  for (double snr : {0.0, 10.0, 20.0, 30.0}) {
    const double nv = snr_db_to_noise_var(snr);
    double total = 0;
    for (int s = 0; s < 1000; ++s) {
      const auto ch = draw_channel(8, 64, nv, derive_seed(41, "acc-channel", s));
      OfdmFrame f;
      f.fft_len = 64;
      f.cp_len = 16;
      f.pilots = pilot_grid(2, 64);
      f.data = ResourceGrid(0, 64);
      f.subcarrier_perm.resize(64);
      std::iota(f.subcarrier_perm.begin(), f.subcarrier_perm.end(), 0);
      const auto rx = channel_apply(f, ch, derive_seed(41, "acc-noise", s));
      total += channel_estimation_loss(mmse_estimate(rx.pilots, f.pilots, nv), ch.freq_response);
    }
    losses.push_back(total / 1000);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < losses.size(); ++i) {
    decreasing = decreasing && losses[i] < losses[i - 1];
  }

  double worst = 0;
  for (int s = 0; s < 50; ++s) {
    const auto ch = draw_channel(8, 64, 0.0, derive_seed(42, "acc-exact", s));
    OfdmFrame f;
    f.fft_len = 64;
    f.cp_len = 16;
    f.pilots = pilot_grid(1, 64);
    f.data = ResourceGrid(0, 64);
    f.subcarrier_perm.resize(64);
    std::iota(f.subcarrier_perm.begin(), f.subcarrier_perm.end(), 0);
    const auto h = mmse_estimate(channel_apply(f, ch, 1).pilots, f.pilots, 0.0);
    for (std::size_t k = 0; k < 64; ++k) {
      worst = std::max(worst, std::abs(h[k] - ch.freq_response[k]));
    }
  }
  return {decreasing && worst <= 1e-9,
          fmt::format("L_cha at 0/10/20/30 dB: {:.4g} {:.4g} {:.4g} {:.4g}; noiseless max |dH| {:.1e}", losses[0],
                      losses[1], losses[2], losses[3], worst)};
}

Outcome gradient_correctness() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2024);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t c = 2 + rng.below(5);
    const std::size_t n = 2 + rng.below(10);
    const std::size_t h = 1 + rng.below(6);
    const std::size_t w = 1 + rng.below(6);
    HeadParams head;
    head.n_classes = c;
    head.n_maps = n;
    head.weights.resize(c * n);
    head.bias.resize(c);
    for (auto& x : head.weights) {
      x = rng.normal();
    }
    for (auto& x : head.bias) {
      x = rng.normal();
    }
    std::vector<float> v(n * h * w);
    for (auto& x : v) {
      x = static_cast<float>(2.0 * rng.normal());
    }
    const FeatureMapSet item(n, h, w, std::move(v), 0);
    const std::size_t cls = rng.below(c);
    const auto iv = importance(head, item, cls);
    const auto fd = importance_fd_oracle(head, item, cls, 1e-3);
    for (std::size_t i = 0; i < n; ++i) {
      if (iv.raw[i] == 0.0) {
        worst = std::max(worst, std::abs(fd[i]) > 1e-9 ? 1.0 : 0.0);
      } else {
        worst = std::max(worst, std::abs(fd[i] - iv.raw[i]) / std::abs(iv.raw[i]));
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-4 && secs < 10.0,
          fmt::format("max relative error {:.2e} over 100 instances in {:.2f}s", worst, secs)};
}

Outcome selector_optimality() {
  Rng rng(77);
  std::size_t mismatches = 0;
  std::size_t non_monotone = 0;
  const int instances = 5000;
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<double> s(n);
    for (auto& v : s) {
      v = rng.below(5) == 0 ? 0.0 : rng.uniform();
    }
    const double total = std::accumulate(s.begin(), s.end(), 0.0);
    const double conf = rng.uniform();
    for (auto& v : s) {
      v = total > 0 ? v * conf / total : 0.0;
    }
    ImportanceVector iv;
    iv.raw = s;
    iv.scores = s;
    iv.confidence = conf;
    std::size_t prev = n + 1;
    for (int e = 0; e < 20; ++e) {
      const double eps = e / 19.0;
      const auto sel = select_maps(iv, eps);
      mismatches += sel.lambda != oracle::brute_force_lambda(s, conf, eps) ? 1 : 0;
      non_monotone += sel.lambda > prev ? 1 : 0;
      prev = sel.lambda;
    }
  }
  return {mismatches == 0 && non_monotone == 0,
          fmt::format("{} instances x 20 budgets: {} brute-force mismatches, {} monotonicity violations", instances,
                      mismatches, non_monotone)};
}

Outcome latency_claim() {
  const fs::path out = g_work / "latency";
  if (run_cli(fmt::format("latency-sweep --out \"{}\" --snr 20 --set n_items=200 --set skew=1", out.string()),
              g_work / "latency.log") != 0) {
    return {false, "latency-sweep failed; see latency.log"};
  }
  const Table rows = read_csv(out / "latency_sweep.csv");
  if (rows.empty() || num(rows.front(), "epsilon") != 0.0) {
    return {false, "sweep has no epsilon=0 row"};
  }
  const double base_acc = num(rows.front(), "accuracy");
  std::string detail = fmt::format("baseline accuracy {:.3f}; ", base_acc);
  for (const auto& row : rows) {
    const double ratio = num(row, "symbol_ratio");
    const double acc = num(row, "accuracy");
    if (ratio <= 0.4) {
      const bool ok = acc >= 0.95 * base_acc;
      detail += fmt::format("first eps with <=40% symbols: {} (ratio {:.4f}, accuracy {:.3f})", row.at("epsilon"),
                            ratio, acc);
      return {ok, detail};
    }
  }
  return {false, detail + "no epsilon reaches 40% of the baseline symbols"};
}

Outcome search_spaces() {
  using boost::multiprecision::cpp_int;
  const auto value = [](const SearchSpace& s) { return cpp_int(s.multiplier) << static_cast<unsigned>(s.log2); };
  const auto p2 = [](std::uint64_t e) { return cpp_int(1) << static_cast<unsigned>(e); };
  bool pass = value(search_space_scores(8, 4)) == p2(32) && value(search_space_seed(128)) == p2(128) &&
              search_space_total(128, 8) == SearchSpace{8, 1024} && value(search_space_total(128, 8)) == 8 * p2(1024);
  std::size_t checked = 0;
  for (std::uint64_t l = 1; l <= 16; ++l) {
    for (std::uint64_t n = 1; n <= 8; ++n) {
      const auto ratio = search_space_ratio(search_space_total(l, n), search_space_seed(l));
      pass = pass && value(ratio) == n * p2(l * (n - 1)) &&
             value(ratio) == value(search_space_total(l, n)) / value(search_space_seed(l));
      ++checked;
    }
  }
  return {pass, fmt::format("fixed examples exact; ratio exact on {} (L, N) pairs", checked)};
}

Outcome keystream_avalanche() {
  Rng rng(99);
  double total = 0;
  double least = 1;
  for (int t = 0; t < 100; ++t) {
    Bits seed(256);
    for (auto& b : seed) {
      b = static_cast<std::uint8_t>(rng.next_u64() >> 63);
    }
    Bits flipped = seed;
    flipped[rng.below(seed.size())] ^= 1;
    const double frac = static_cast<double>(hamming_distance(expand_seed(seed, kKeystreamDomain, 10000),
                                                             expand_seed(flipped, kKeystreamDomain, 10000))) /
                        10000.0;
    total += frac;
    least = std::min(least, frac);
  }
  return {total / 100 >= 0.30, fmt::format("mean flipped fraction {:.4f} (least {:.4f})", total / 100, least)};
}

Outcome allocation_monotone() {
  Rng rng(5);
  std::size_t bad_rho = 0;
  std::size_t bad_round = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng.below(5);
    std::vector<double> s(n);
    for (auto& v : s) {
      v = rng.uniform();
    }
    ImportanceVector iv;
    iv.raw = s;
    iv.scores = s;
    iv.confidence = std::accumulate(s.begin(), s.end(), 0.0);
    Selection sel;
    sel.indices.resize(n);
    std::iota(sel.indices.begin(), sel.indices.end(), 0);
    sel.lambda = n;
    const auto ch = draw_channel(8, 64, 0.0, rng.next_u64());
    const std::size_t per_map = 1 + rng.below(300);
    const auto alloc = allocate(sel, iv, rank_subchannels(ch.freq_response), std::vector<std::size_t>(n, per_map), 100000);
    std::vector<double> gain(n, 0.0);
    for (const auto& b : alloc.pairs) {
      for (std::size_t p = b.first_slot; p < b.first_slot + b.n_symbols; ++p) {
        gain[b.map_index] += std::abs(ch.freq_response[alloc.position(p).second]);
      }
      gain[b.map_index] /= static_cast<double>(b.n_symbols);
    }
    bad_rho += std::abs(oracle::spearman(s, gain) - 1.0) > 1e-12 ? 1 : 0;

    CVec sym(alloc.total_symbols());
    for (auto& v : sym) {
      v = rng.complex_normal(1.0);
    }
    const CVec filler(alloc.rows * 64 - sym.size(), cplx(0, 0));
    bad_round += deallocate(place_symbols(sym, alloc, filler), alloc) != sym ? 1 : 0;
  }
  return {bad_rho == 0 && bad_round == 0,
          fmt::format("1000 instances: {} with Spearman != 1, {} round-trip failures", bad_rho, bad_round)};
}

Outcome constellation_sanity() {
  const BerRun& r = ber_run();
  if (!r.ok) {
    return {false, "ber-sweep failed"};
  }
  const CVec& pts = constellation(16);
  std::size_t total = 0;
  std::size_t close = 0;
  for (const auto& row : r.constellation) {
    if (num(row, "snr_db") != 20.0) {
      continue;
    }
    const cplx p(num(row, "i"), num(row, "q"));
    ++total;
    close += std::abs(p - pts[nearest_point(p, 16)]) <= 0.5 ? 1 : 0;
  }
  double eve = -1;
  for (const auto& row : r.ber) {
    if (num(row, "snr_db") == 20.0) {
      eve = num(row, "eve_ber");
    }
  }
  const double frac = total == 0 ? 0.0 : static_cast<double>(close) / static_cast<double>(total);
  return {total > 0 && frac >= 0.99 && eve >= 0.45,
          fmt::format("legit at 20 dB: {}/{} points ({:.4f}) within 0.5 of their decision; eavesdropper bits "
                      "still at BER {:.4f}",
                      close, total, frac, eve)};
}

Outcome full_determinism() {
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
      {"synth", {"dataset.semf"}},
      {"train", {"head.semh"}},
      {"run --snr 15", {"run.csv"}},
      {"ber-sweep --trials 20 --set min_payload_bits=0 --snr 0,10,20", {"ber_sweep.csv", "constellation.csv"}},
      {"latency-sweep --snr 20 --set n_items=60", {"latency_sweep.csv"}},
      {"search-space", {"search_space.txt"}},
  };
  std::size_t compared = 0;
  for (const auto& [cmd, files] : commands) {
    for (const char* pass : {"a", "b"}) {
      const fs::path dir = g_work / "determinism" / pass;
      if (run_cli(fmt::format("{} --seed 31 --out \"{}\"", cmd, dir.string()), g_work / "determinism.log") != 0) {
        return {false, fmt::format("'{}' failed; see determinism.log", cmd)};
      }
    }
    for (const auto& f : files) {
      const auto a = slurp(g_work / "determinism" / "a" / f);
      const auto b = slurp(g_work / "determinism" / "b" / f);
      if (a.empty() || a != b) {
        return {false, fmt::format("{} differs between identical runs", f)};
      }
      ++compared;
    }
  }
  return {true, fmt::format("{} output files byte-identical across two runs of every subcommand", compared)};
}

}  // namespace

int main(int argc, char** argv) {
  g_work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "semsec_acceptance";
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"eavesdropper BER within [0.45, 0.55] at every SNR", eavesdropper_at_chance},
      {"encrypted and plaintext legitimate BER columns identical", legit_transparency},
      {"closed-form MMSE examples within 1e-12", mmse_closed_forms},
      {"estimation loss decreasing in SNR; noiseless estimate exact", estimation_quality},
      {"analytic importance matches finite differences within 1e-4", gradient_correctness},
      {"greedy selection matches brute force; lambda monotone in epsilon", selector_optimality},
      {"<=40% symbols at >=95% of baseline accuracy", latency_claim},
      {"exact search-space sizes", search_spaces},
      {"keystream avalanche >= 30%", keystream_avalanche},
      {"allocation Spearman = 1; deallocate inverts allocate", allocation_monotone},
      {"legitimate constellation clusters at 20 dB", constellation_sanity},
      {"byte-identical outputs for identical config and seed", full_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << fmt::format("[{}] {:2d} {} | {}", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failures, criteria.size()) << std::endl;
  return failures == 0 ? 0 : 1;
}
