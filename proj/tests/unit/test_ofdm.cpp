#include <doctest.h>

#include <bit>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "semsec/dft.hpp"
#include "semsec/errors.hpp"
#include "semsec/ofdm.hpp"
#include "semsec/rng.hpp"

using namespace semsec;

namespace {

OfdmFrame random_frame(Rng& rng, std::size_t fft_len, std::size_t cp, std::size_t rows, unsigned order) {
  OfdmFrame f;
  f.fft_len = fft_len;
  f.cp_len = cp;
  f.pilots = pilot_grid(2, fft_len);
  f.data = ResourceGrid(rows, fft_len);
  const CVec& pts = constellation(order);
  for (auto& v : f.data.values) {
    v = pts[rng.below(order)];
  }
  f.subcarrier_perm.resize(fft_len);
  std::iota(f.subcarrier_perm.begin(), f.subcarrier_perm.end(), 0);
  return f;
}

double max_diff(const ResourceGrid& a, const ResourceGrid& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  }
  return m;
}

}  // namespace

TEST_SUITE("ofdm") {
  TEST_CASE("DFT against the direct sum") {
    Rng rng(1);
    for (std::size_t n : {2U, 7U, 16U, 64U}) {
      CVec x(n);
      for (auto& v : x) {
        v = rng.complex_normal(1.0);
      }
      const auto fast = dft(x);
      const auto slow = oracle::naive_dft(std::vector<cplx>(x.begin(), x.end()), n);
      for (std::size_t k = 0; k < n; ++k) {
        CHECK(std::abs(fast[k] - slow[k]) < 1e-9);
      }
      const auto round = unitary_dft(unitary_dft(x, false), true);
      for (std::size_t k = 0; k < n; ++k) {
        CHECK(std::abs(round[k] - x[k]) < 1e-12);
      }
    }
  }

  TEST_CASE("frequency response is the zero-padded DFT of the taps") {
    const auto ch = draw_channel(8, 64, 0.1, 3);
    const auto ref = oracle::naive_dft(std::vector<cplx>(ch.taps.begin(), ch.taps.end()), 64);
    for (std::size_t k = 0; k < 64; ++k) {
      CHECK(std::abs(ch.freq_response[k] - ref[k]) < 1e-12);
    }
    CHECK(ch.noise_var == 0.1);
  }

  TEST_CASE("power-delay profile has unit expected power") {
    double total = 0;
    const int n = 4000;
    for (int s = 0; s < n; ++s) {
      for (const auto& t : draw_channel(8, 64, 0.0, s).taps) {
        total += std::norm(t);
      }
    }
    CHECK(std::abs(total / n - 1.0) < 0.03);
  }

  TEST_CASE("16-QAM table") {
    const CVec& c = constellation(16);
    CHECK(std::abs(c[0] - cplx(-3, -3) / std::sqrt(10.0)) < 1e-15);
    for (unsigned order : {4U, 16U, 64U}) {
      const CVec& pts = constellation(order);
      double e = 0;
      for (auto p : pts) {
        e += std::norm(p);
      }
      CHECK(std::abs(e / order - 1.0) < 1e-12);
      // Gray property: nearest neighbours differ in exactly one bit
      const double dmin = 2.0 / std::sqrt(2.0 * (order - 1) / 3.0);
      for (unsigned a = 0; a < order; ++a) {
        for (unsigned b = 0; b < order; ++b) {
          if (std::abs(std::abs(pts[a] - pts[b]) - dmin) < 1e-9) {
            CHECK(std::popcount(a ^ b) == 1);
          }
        }
      }
    }
  }

  TEST_CASE("modulation round trip and errors") {
    for (unsigned order : {4U, 16U, 64U}) {
      const unsigned k = bits_per_symbol(order);
      Bits all;
      for (unsigned p = 0; p < order; ++p) {
        append_bits(all, p, k);
      }
      CHECK(qam_demodulate(qam_modulate(all, order), order) == all);
    }
    CHECK_THROWS_AS(qam_modulate(Bits{1, 0, 1}, 16), ParameterError);
    CHECK_THROWS_AS(bits_per_symbol(8), ParameterError);
  }

  TEST_CASE("origin decides to the smallest inner pattern") {
    // the four inner points of 16-QAM are 0101, 0111, 1101, 1111
    CHECK(nearest_point(cplx(0, 0), 16) == 0b0101);
    CHECK(qam_demodulate(CVec{cplx(0, 0)}, 16) == Bits{0, 1, 0, 1});
  }

  TEST_CASE("identity channel") {
    Rng rng(2);
    const auto f = random_frame(rng, 64, 16, 5, 16);
    const auto ch = make_channel(CVec{cplx(1, 0)}, 64, 0.0);
    const auto rx = channel_apply(f, ch, 9);
    CHECK(max_diff(rx.data, f.data) < 1e-9);
    CHECK(max_diff(rx.pilots, f.pilots) < 1e-9);
  }

  TEST_CASE("time and frequency domain paths agree") {
    Rng rng(3);
    const auto f = random_frame(rng, 64, 16, 6, 16);
    const auto two_tap = make_channel(CVec{cplx(0.8, 0), cplx(0, 0.6)}, 64, 0.0);
    CHECK(max_diff(channel_apply(f, two_tap, 1).data, channel_apply_frequency(f, two_tap, 1).data) < 1e-9);
    for (int s = 0; s < 20; ++s) {
      const auto ch = draw_channel(8, 64, 0.0, 100 + s);
      const auto a = channel_apply(f, ch, 1);
      const auto b = channel_apply_frequency(f, ch, 1);
      CHECK(max_diff(a.data, b.data) < 1e-9);
      CHECK(max_diff(a.pilots, b.pilots) < 1e-9);
    }
  }

  TEST_CASE("cyclic prefix must cover the channel memory") {
    Rng rng(4);
    const auto f = random_frame(rng, 64, 4, 1, 16);
    CHECK_THROWS_AS(channel_apply(f, draw_channel(8, 64, 0.0, 1), 1), ConfigError);
    OfdmParams p;
    p.cp_len = 4;
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }

  TEST_CASE("noise variance per resource element") {
    OfdmFrame f;
    f.fft_len = 64;
    f.cp_len = 16;
    f.pilots = pilot_grid(1, 64);
    f.data = ResourceGrid(1600, 64);
    f.subcarrier_perm.resize(64);
    std::iota(f.subcarrier_perm.begin(), f.subcarrier_perm.end(), 0);
    const double var = 0.37;
    const auto rx = channel_apply(f, make_channel(CVec{cplx(1, 0)}, 64, var), 5);
    double e = 0;
    for (auto v : rx.data.values) {
      e += std::norm(v);
    }
    e /= static_cast<double>(rx.data.values.size());
    CHECK(std::abs(e / var - 1.0) < 0.05);
  }

  TEST_CASE("closed-form MMSE estimates") {
    ResourceGrid one(1, 1);
    one.at(0, 0) = 1.0;
    SUBCASE("shrinkage") {
      const auto h = mmse_estimate(one, one, 1.0);
      CHECK(std::abs(h[0] - cplx(0.5, 0)) < 1e-12);
    }
    SUBCASE("noiseless single pilot recovers H") {
      Rng rng(6);
      const auto ch = draw_channel(8, 64, 0.0, 6);
      OfdmFrame f = random_frame(rng, 64, 16, 0, 16);
      f.pilots = pilot_grid(1, 64);
      const auto rx = channel_apply(f, ch, 1);
      const auto h = mmse_estimate(rx.pilots, f.pilots, 0.0);
      for (std::size_t k = 0; k < 64; ++k) {
        CHECK(std::abs(h[k] - ch.freq_response[k]) < 1e-9);
      }
    }
    SUBCASE("shape mismatch") {
      CHECK_THROWS_AS(mmse_estimate(one, ResourceGrid(2, 1), 0.0), ParameterError);
    }
  }

  TEST_CASE("closed-form MMSE equalization") {
    ResourceGrid y(1, 3);
    y.values = {cplx(1, 2), cplx(-0.5, 0.25), cplx(3, -1)};
    SUBCASE("pass-through") {
      const auto out = mmse_equalize(y, CVec(3, cplx(1, 0)), 0.0);
      CHECK(max_diff(out, y) < 1e-12);
    }
    SUBCASE("zero-noise inversion") {
      ResourceGrid y2 = y;
      for (auto& v : y2.values) {
        v *= 2.0;
      }
      const auto out = mmse_equalize(y2, CVec(3, cplx(2, 0)), 0.0);
      CHECK(max_diff(out, y) < 1e-12);
    }
    SUBCASE("shrinkage") {
      const auto out = mmse_equalize(y, CVec(3, cplx(1, 0)), 1.0);
      for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(out.values[i] - y.values[i] / 2.0) < 1e-12);
      }
    }
    SUBCASE("shape mismatch") {
      CHECK_THROWS_AS(mmse_equalize(y, CVec(2), 0.0), ParameterError);
    }
  }

  TEST_CASE("channel estimation loss") {
    Rng rng(7);
    CVec h(64);
    CVec g(64);
    for (std::size_t k = 0; k < 64; ++k) {
      h[k] = rng.complex_normal(1.0);
      g[k] = rng.complex_normal(1.0);
    }
    CHECK(channel_estimation_loss(h, h) == 0.0);
    CVec shifted = h;
    for (auto& v : shifted) {
      v += 1.0;
    }
    CHECK(std::abs(channel_estimation_loss(shifted, h) - 1.0) < 1e-12);
    double ref = 0;
    for (std::size_t k = 0; k < 64; ++k) {
      const double dr = g[k].real() - h[k].real();
      const double di = g[k].imag() - h[k].imag();
      ref += dr * dr + di * di;
    }
    CHECK(std::abs(channel_estimation_loss(g, h) - ref / 64) < 1e-12);
  }

  TEST_CASE("estimation error falls with SNR") {
    double prev = 1e300;
    for (double snr : {0.0, 10.0, 20.0, 30.0}) {
      const double nv = snr_db_to_noise_var(snr);
      double loss = 0;
      for (int s = 0; s < 1000; ++s) {
        Rng rng(s);
        const auto ch = draw_channel(8, 64, nv, 5000 + s);
        const auto f = random_frame(rng, 64, 16, 0, 16);
        const auto rx = channel_apply(f, ch, 9000 + s);
        loss += channel_estimation_loss(mmse_estimate(rx.pilots, f.pilots, nv), ch.freq_response);
      }
      loss /= 1000;
      MESSAGE("SNR " << snr << " dB: mean estimation loss " << loss);
      CHECK(loss < prev);
      prev = loss;
    }
  }

  TEST_CASE("AWGN hard-decision BER") {
    Rng rng(8);
    const auto run = [&](double snr_db, std::size_t n_symbols) {
      const double nv = snr_db_to_noise_var(snr_db);
      Bits bits(n_symbols * 4);
      for (auto& b : bits) {
        b = static_cast<std::uint8_t>(rng.next_u64() >> 63);
      }
      CVec s = qam_modulate(bits, 16);
      for (auto& v : s) {
        v += rng.complex_normal(nv);
      }
      return static_cast<double>(hamming_distance(qam_demodulate(s, 16), bits)) / static_cast<double>(bits.size());
    };
    CHECK(run(30.0, 100000) < 1e-4);
    for (double snr : {6.0, 10.0, 14.0}) {
      const double measured = run(snr, 250000);
      const double theory = oracle::qam16_ber(std::pow(10.0, snr / 10.0));
      MESSAGE("SNR " << snr << " dB: measured " << measured << ", exact " << theory);
      CHECK(std::abs(measured / theory - 1.0) < 0.1);
    }
  }

  TEST_CASE("noiseless chain has no bit errors") {
    Rng rng(9);
    const auto ch = draw_channel(8, 64, 0.0, 77);
    const auto f = random_frame(rng, 64, 16, 10, 16);
    const auto rx = channel_apply(f, ch, 1);
    const auto eq = mmse_equalize(rx.data, ch.freq_response, 0.0);
    CHECK(qam_demodulate(eq.values, 16) == qam_demodulate(f.data.values, 16));
  }
}
