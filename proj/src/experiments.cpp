#include "semsec/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "semsec/errors.hpp"

namespace semsec {

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

namespace {

constexpr const char* kNum = "{:.10g}";

std::string num(double v) { return fmt::format(kNum, v); }

}  // namespace

BerSweepResult run_ber_sweep(const Model& model, const RunConfig& cfg) {
  cfg.validate();
  BerSweepResult result;
  for (double snr : cfg.snr_db) {
    TrialOptions enc;
    enc.snr_db = snr;
    enc.epsilon = cfg.epsilon;
    enc.encrypt = true;
    enc.allocate = cfg.allocate;
    TrialOptions ctl = enc;
    ctl.encrypt = false;

    BerSweepRow row;
    row.snr_db = snr;
    std::size_t err_channel = 0;
    std::size_t err_plain = 0;
    std::size_t err_ctl = 0;
    std::size_t err_eve = 0;
    double l_cha = 0.0;

    while (row.trials < cfg.trials || row.payload_bits < cfg.min_payload_bits) {
      const std::size_t first = row.trials;
      std::vector<TrialRecord> encrypted(cfg.trials);
      std::vector<TrialRecord> control(cfg.trials);
      parallel_for(cfg.trials, cfg.threads, [&](std::size_t i) {
        TrialOptions e = enc;
        e.keep_constellation = first + i == 0;
        encrypted[i] = run_trial(model, cfg, first + i, e);
        control[i] = run_trial(model, cfg, first + i, ctl);
      });
      std::size_t batch_bits = 0;
      for (std::size_t i = 0; i < cfg.trials; ++i) {
        const TrialRecord& r = encrypted[i];
        batch_bits += r.payload_bits;
        err_channel += r.legit_errors_channel;
        err_plain += r.legit_errors_plain;
        err_eve += r.eve_errors;
        err_ctl += control[i].legit_errors_plain;
        l_cha += r.l_cha;
        for (const auto& p : r.constellation) {
          result.constellation.push_back({p.i, p.q, p.subcarrier, r.trial, snr});
        }
      }
      row.trials += cfg.trials;
      row.payload_bits += batch_bits;
      if (batch_bits == 0) {
        break;
      }
    }

    if (row.payload_bits > 0) {
      const auto bits = static_cast<double>(row.payload_bits);
      row.legit_ber_encrypted = static_cast<double>(err_channel) / bits;
      row.legit_ber_plaintext = static_cast<double>(err_plain) / bits;
      row.legit_ber_unencrypted = static_cast<double>(err_ctl) / bits;
      row.eve_ber = static_cast<double>(err_eve) / bits;
    }
    row.mean_l_cha = row.trials == 0 ? 0.0 : l_cha / static_cast<double>(row.trials);
    result.rows.push_back(row);
  }
  return result;
}

std::vector<LatencySweepRow> run_latency_sweep(const Model& model, const RunConfig& cfg) {
  cfg.validate();
  if (!std::is_sorted(cfg.epsilons.begin(), cfg.epsilons.end())) {
    throw ConfigError("epsilons must be sorted ascending");
  }
  if (cfg.snr_db.empty()) {
    throw ConfigError("snr_db must not be empty");
  }
  const std::size_t n_items = model.dataset.size();
  const FeatureMapSet& probe = model.dataset.front();
  const double baseline = static_cast<double>(
      probe.n_maps() * symbols_per_map(probe, cfg.bits_per_sample, cfg.ofdm.qam_order));

  std::vector<LatencySweepRow> rows;
  for (double eps : cfg.epsilons) {
    TrialOptions opt;
    opt.snr_db = cfg.snr_db.front();
    opt.epsilon = eps;
    opt.encrypt = cfg.encrypt;
    opt.allocate = cfg.allocate;
    std::vector<TrialRecord> records(n_items);
    parallel_for(n_items, cfg.threads,
                 [&](std::size_t i) { records[i] = run_trial(model, cfg, i, opt); });

    LatencySweepRow row;
    row.epsilon = eps;
    row.items = n_items;
    std::size_t bits = 0;
    std::size_t errors = 0;
    for (const auto& r : records) {
      row.mean_lambda += static_cast<double>(r.lambda);
      row.mean_symbols += static_cast<double>(r.symbols);
      row.latency_us += r.latency_us;
      row.accuracy += r.class_correct ? 1.0 : 0.0;
      row.class_match_rate += r.class_match ? 1.0 : 0.0;
      bits += r.payload_bits;
      errors += r.legit_errors_plain;
    }
    const auto n = static_cast<double>(n_items);
    row.mean_lambda /= n;
    row.mean_symbols /= n;
    row.latency_us /= n;
    row.accuracy /= n;
    row.class_match_rate /= n;
    row.symbol_ratio = baseline > 0.0 ? row.mean_symbols / baseline : 0.0;
    row.legit_ber = bits == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(bits);
    rows.push_back(row);
  }
  return rows;
}

std::string search_space_report(const RunConfig& cfg) {
  const std::uint64_t n = cfg.dataset_file.empty() ? cfg.synth.n_maps : 0;
  if (n == 0) {
    throw ConfigError("search-space needs the map count; set n_maps");
  }
  const SearchSpace scores = search_space_scores(cfg.l_scores, n);
  const SearchSpace skey = search_space_skey(cfg.l_skey, n);
  const SearchSpace seed = search_space_seed(cfg.l_skey);
  const SearchSpace total = search_space_total(cfg.l_skey, n);
  const SearchSpace ratio = search_space_ratio(total, seed);

  std::ostringstream out;
  fmt::print(out, "N = {}, L_scores = {}, L_SKey = {}, L_seedkey = {}\n", n, cfg.l_scores, cfg.l_skey,
             cfg.l_skey);
  fmt::print(out, "{:<28} {:>12} {:>12}  {}\n", "attack", "multiplier", "log2", "size");
  const auto line = [&](const char* name, const SearchSpace& s) {
    const SearchSpace v = s.normalized();
    fmt::print(out, "{:<28} {:>12} {:>12}  {}\n", name, v.multiplier, v.log2, v.to_string());
  };
  line("importance scores", scores);
  line("semantic keys", skey);
  line("seed key", seed);
  line("seed key, all maps", total);
  line("all maps / seed key", ratio);
  return out.str();
}

void write_trial_csv(std::ostream& out, std::span<const TrialRecord> records) {
  out << "trial,trial_seed,item,label,snr_db,epsilon,lambda,symbols,latency_us,payload_bits,"
         "legit_ber,legit_ber_channel,eve_ber,l_cha,tx_class,rx_class,class_correct,class_match,"
         "nothing_transmitted,static_environment,plk_disagreement,perm_digest,perm\n";
  for (const auto& r : records) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.trial,
               to_hex(r.trial_seed), r.item, r.label, num(r.snr_db), num(r.epsilon), r.lambda, r.symbols,
               num(r.latency_us), r.payload_bits, num(r.legit_ber()), num(r.legit_ber_channel()),
               num(r.eve_ber()), num(r.l_cha), r.tx_class, r.rx_class, int(r.class_correct),
               int(r.class_match), int(r.nothing_transmitted), int(r.static_environment),
               num(r.plk_disagreement), r.perm_digest(), r.perm_text());
  }
}

void write_ber_csv(std::ostream& out, std::span<const BerSweepRow> rows) {
  out << "snr_db,trials,payload_bits,legit_ber_encrypted,legit_ber_plaintext,legit_ber_unencrypted,"
         "eve_ber,mean_l_cha\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{}\n", num(r.snr_db), r.trials, r.payload_bits,
               num(r.legit_ber_encrypted), num(r.legit_ber_plaintext), num(r.legit_ber_unencrypted),
               num(r.eve_ber), num(r.mean_l_cha));
  }
}

void write_constellation_csv(std::ostream& out, std::span<const ConstellationRow> rows) {
  out << "i,q,subcarrier,frame,snr_db\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{}\n", num(r.i), num(r.q), r.subcarrier, r.frame, num(r.snr_db));
  }
}

void write_latency_csv(std::ostream& out, std::span<const LatencySweepRow> rows) {
  out << "epsilon,items,mean_lambda,mean_symbols,latency_us,symbol_ratio,accuracy,class_match_rate,"
         "legit_ber\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", num(r.epsilon), r.items, num(r.mean_lambda),
               num(r.mean_symbols), num(r.latency_us), num(r.symbol_ratio), num(r.accuracy),
               num(r.class_match_rate), num(r.legit_ber));
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw std::runtime_error(fmt::format("cannot create directory {}: {}", path.parent_path().string(),
                                           ec.message()));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
  }
  out << text;
  if (!out) {
    throw std::runtime_error(fmt::format("write failed: {}", path.string()));
  }
}

}  // namespace semsec
