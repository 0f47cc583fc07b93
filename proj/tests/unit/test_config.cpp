#include <doctest.h>

#include <sstream>

#include "semsec/config.hpp"
#include "semsec/errors.hpp"

using namespace semsec;

TEST_SUITE("config") {
  TEST_CASE("defaults are valid") {
    const RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.ofdm.fft_len == 64);
    CHECK(cfg.ofdm.cp_len == 16);
    CHECK(cfg.ofdm.n_taps == 8);
    CHECK(cfg.ofdm.n_pilots == 2);
    CHECK(cfg.l_skey == 64);
    CHECK(cfg.l_plk == 128);
    CHECK(cfg.l_scores == 16);
  }

  TEST_CASE("parse keys, comments and lists") {
    std::istringstream in(
        "# a comment\n"
        "epsilon = 0.02   # trailing comment\n"
        "\n"
        "snr_db = 0, 10,20\n"
        "fft_len=128\n"
        "encrypt = false\n"
        "n_maps = 12\n"
        "out_dir = results/run1\n");
    const RunConfig cfg = parse_config(in);
    CHECK(cfg.epsilon == 0.02);
    CHECK(cfg.snr_db == std::vector<double>{0, 10, 20});
    CHECK(cfg.ofdm.fft_len == 128);
    CHECK_FALSE(cfg.encrypt);
    CHECK(cfg.synth.n_maps == 12);
    CHECK(cfg.out_dir == "results/run1");
  }

  TEST_CASE("formatted config parses back to the same values") {
    RunConfig cfg;
    cfg.epsilon = 0.125;
    cfg.snr_db = {3, 6};
    cfg.seed = 99;
    cfg.allocate = false;
    std::istringstream in(format_config(cfg));
    const RunConfig back = parse_config(in);
    CHECK(format_config(back) == format_config(cfg));
    CHECK(back.seed == 99);
    CHECK_FALSE(back.allocate);
  }

  TEST_CASE("errors") {
    RunConfig cfg;
    CHECK_THROWS_AS(apply_setting(cfg, "no_such_key", "1"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "trials", "abc"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "encrypt", "maybe"), ConfigError);
    std::istringstream no_equals("epsilon 0.1\n");
    CHECK_THROWS_AS(parse_config(no_equals), ConfigError);

    cfg = RunConfig{};
    cfg.snr_db.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    cfg.trials = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    cfg.ofdm.cp_len = 2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    cfg.l_skey = 65;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    cfg.epsilons = {0.1, 0.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/semsec.cfg"), ConfigError);
  }
}
