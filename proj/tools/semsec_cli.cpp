// Command-line front end for the semantic secure OFDM simulator.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "semsec/config.hpp"
#include "semsec/errors.hpp"
#include "semsec/experiments.hpp"
#include "semsec/feature_maps.hpp"
#include "semsec/importance.hpp"
#include "semsec/pipeline.hpp"

namespace fs = std::filesystem;
using namespace semsec;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> settings;
  std::optional<std::string> snr;
  std::optional<std::string> epsilon;
  std::optional<std::string> epsilons;
  std::optional<std::string> seed;
  std::optional<std::string> trials;
  std::optional<std::string> threads;
  std::optional<std::string> out;
  bool plot = false;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "key = value config file");
  sub->add_option("--set", args.settings, "override a config key (key=value), repeatable");
  sub->add_option("--snr", args.snr, "SNR in dB, or a comma-separated list");
  sub->add_option("--epsilon", args.epsilon, "selection budget");
  sub->add_option("--epsilons", args.epsilons, "comma-separated epsilon grid");
  sub->add_option("--seed", args.seed, "master seed");
  sub->add_option("--trials", args.trials, "trial count");
  sub->add_option("--threads", args.threads, "worker threads");
  sub->add_option("--out", args.out, "output directory");
  sub->add_flag("--plot", args.plot, "render CSVs to PNG when matplotlib is available");
}

RunConfig resolve(const CommonArgs& args) {
  RunConfig cfg = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
  for (const auto& s : args.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("--set expects key=value, got '{}'", s));
    }
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  const auto apply = [&](const char* key, const std::optional<std::string>& v) {
    if (v) {
      apply_setting(cfg, key, *v);
    }
  };
  apply("snr_db", args.snr);
  apply("epsilon", args.epsilon);
  apply("epsilons", args.epsilons);
  apply("seed", args.seed);
  apply("trials", args.trials);
  apply("threads", args.threads);
  apply("out_dir", args.out);
  cfg.validate();
  return cfg;
}

template <typename Writer, typename Rows>
void write_csv(const fs::path& path, Writer writer, const Rows& rows) {
  std::ostringstream text;
  writer(text, rows);
  write_text_file(path, text.str());
  std::cout << "wrote " << path.string() << '\n';
}

void maybe_plot(bool requested, const fs::path& out_dir) {
  if (!requested) {
    return;
  }
  const std::string cmd = fmt::format("python3 \"{}\" \"{}\"", SEMSEC_PLOT_SCRIPT, out_dir.string());
  if (std::system(cmd.c_str()) != 0) {
    std::cout << "plotting skipped: no usable matplotlib backend\n";
  }
}

void print_record(const TrialRecord& r) {
  fmt::print("trial               {}\n", r.trial);
  fmt::print("item                {} (label {})\n", r.item, r.label);
  fmt::print("snr_db              {:.10g}\n", r.snr_db);
  fmt::print("epsilon             {:.10g}\n", r.epsilon);
  fmt::print("lambda              {}\n", r.lambda);
  fmt::print("symbols             {}\n", r.symbols);
  fmt::print("latency_us          {:.10g}\n", r.latency_us);
  fmt::print("payload_bits        {}\n", r.payload_bits);
  fmt::print("legit_ber           {:.10g}\n", r.legit_ber());
  fmt::print("eve_ber             {:.10g}\n", r.eve_ber());
  fmt::print("l_cha               {:.10g}\n", r.l_cha);
  fmt::print("tx_class            {}\n", r.tx_class);
  fmt::print("rx_class            {}\n", r.rx_class);
  fmt::print("static_environment  {}\n", r.static_environment);
  fmt::print("plk_disagreement    {:.10g}\n", r.plk_disagreement);
  fmt::print("perm                {}\n", r.perm_text());
  if (r.nothing_transmitted) {
    fmt::print("note                nothing transmitted\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic-entropy guided secure OFDM transmission simulator"};
  app.require_subcommand(1);

  CommonArgs args;
  std::size_t trial_index = 0;

  auto* synth = app.add_subcommand("synth", "write the synthetic dataset");
  auto* train = app.add_subcommand("train", "fit the classification head and save it");
  auto* run = app.add_subcommand("run", "one transmission, printed as a report");
  auto* ber = app.add_subcommand("ber-sweep", "BER against SNR for legit and eavesdropper");
  auto* latency = app.add_subcommand("latency-sweep", "symbols, latency and accuracy against epsilon");
  auto* space = app.add_subcommand("search-space", "exact key search-space sizes");
  for (auto* sub : {synth, train, run, ber, latency, space}) {
    add_common(sub, args);
  }
  run->add_option("--trial", trial_index, "trial index (selects item and seeds)");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolve(args);
    const fs::path out_dir = cfg.out_dir;
    fs::create_directories(out_dir);

    if (synth->parsed()) {
      const Dataset data = synth_dataset(cfg.synth);
      save_dataset(out_dir / "dataset.semf", data);
      fmt::print("wrote {} ({} items, {} maps of {}x{})\n", (out_dir / "dataset.semf").string(),
                 data.size(), cfg.synth.n_maps, cfg.synth.height, cfg.synth.width);
    } else if (train->parsed()) {
      RunConfig train_cfg = cfg;
      train_cfg.head_file.clear();
      const Model model = build_model(train_cfg);
      save_head(out_dir / "head.semh", model.head);
      fmt::print("loss {:.10g}  accuracy {:.10g}\n", mean_cross_entropy(model.head, model.dataset),
                 accuracy(model.head, model.dataset));
      fmt::print("wrote {}\n", (out_dir / "head.semh").string());
    } else if (run->parsed()) {
      const Model model = build_model(cfg);
      TrialOptions opt;
      opt.snr_db = cfg.snr_db.front();
      opt.epsilon = cfg.epsilon;
      opt.encrypt = cfg.encrypt;
      opt.allocate = cfg.allocate;
      const TrialRecord rec = run_trial(model, cfg, trial_index, opt);
      print_record(rec);
      write_csv(out_dir / "run.csv", write_trial_csv, std::vector<TrialRecord>{rec});
    } else if (ber->parsed()) {
      const Model model = build_model(cfg);
      const BerSweepResult res = run_ber_sweep(model, cfg);
      fmt::print("{:>8} {:>8} {:>10} {:>12} {:>12} {:>12} {:>10}\n", "snr_db", "trials", "bits",
                 "legit_enc", "legit_plain", "legit_ctl", "eve");
      for (const auto& r : res.rows) {
        fmt::print("{:>8.3g} {:>8} {:>10} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.4f}\n", r.snr_db, r.trials,
                   r.payload_bits, r.legit_ber_encrypted, r.legit_ber_plaintext, r.legit_ber_unencrypted,
                   r.eve_ber);
      }
      write_csv(out_dir / "ber_sweep.csv", write_ber_csv, res.rows);
      write_csv(out_dir / "constellation.csv", write_constellation_csv, res.constellation);
      maybe_plot(args.plot, out_dir);
    } else if (latency->parsed()) {
      const Model model = build_model(cfg);
      const auto rows = run_latency_sweep(model, cfg);
      fmt::print("{:>10} {:>8} {:>10} {:>8} {:>9} {:>9}\n", "epsilon", "lambda", "symbols", "ratio",
                 "accuracy", "match");
      for (const auto& r : rows) {
        fmt::print("{:>10.4g} {:>8.3f} {:>10.1f} {:>8.4f} {:>9.4f} {:>9.4f}\n", r.epsilon, r.mean_lambda,
                   r.mean_symbols, r.symbol_ratio, r.accuracy, r.class_match_rate);
      }
      write_csv(out_dir / "latency_sweep.csv", write_latency_csv, rows);
      maybe_plot(args.plot, out_dir);
    } else if (space->parsed()) {
      const std::string text = search_space_report(cfg);
      std::cout << text;
      write_text_file(out_dir / "search_space.txt", text);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
