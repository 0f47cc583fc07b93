#include "semsec/ofdm.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "semsec/errors.hpp"
#include "semsec/rng.hpp"

namespace semsec {

ChannelRealization make_channel(CVec taps, std::size_t fft_len, double noise_var) {
  if (taps.empty()) {
    throw ParameterError("make_channel: no taps");
  }
  if (taps.size() > fft_len) {
    throw ParameterError("make_channel: more taps than subcarriers");
  }
  if (!(noise_var >= 0.0)) {
    throw ParameterError("make_channel: noise variance must be >= 0");
  }
  CVec padded(fft_len, cplx{});
  std::copy(taps.begin(), taps.end(), padded.begin());
  ChannelRealization ch;
  ch.freq_response = dft(padded);
  ch.taps = std::move(taps);
  ch.noise_var = noise_var;
  return ch;
}

ChannelRealization draw_channel(std::size_t n_taps, std::size_t fft_len, double noise_var,
                                std::uint64_t seed) {
  if (n_taps == 0) {
    throw ParameterError("draw_channel: zero taps");
  }
  std::vector<double> profile(n_taps);
  double total = 0.0;
  for (std::size_t t = 0; t < n_taps; ++t) {
    profile[t] = std::exp(-2.0 * static_cast<double>(t) / static_cast<double>(n_taps));
    total += profile[t];
  }
  Rng rng(seed);
  CVec taps(n_taps);
  for (std::size_t t = 0; t < n_taps; ++t) {
    taps[t] = rng.complex_normal(profile[t] / total);
  }
  return make_channel(std::move(taps), fft_len, noise_var);
}

double snr_db_to_noise_var(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

void OfdmParams::validate() const {
  if (fft_len < 2) {
    throw ConfigError("OFDM: fft_len must be >= 2");
  }
  if (cp_len >= fft_len) {
    throw ConfigError("OFDM: cp_len must be < fft_len");
  }
  if (n_taps == 0 || n_taps > fft_len) {
    throw ConfigError("OFDM: n_taps must lie in [1, fft_len]");
  }
  if (cp_len + 1 < n_taps) {
    throw ConfigError(fmt::format(
        "OFDM: cp_len {} shorter than channel memory {} (inter-symbol interference is not modeled)",
        cp_len, n_taps - 1));
  }
  if (n_pilots == 0) {
    throw ConfigError("OFDM: at least one pilot symbol is required");
  }
  bits_per_symbol(qam_order);
}

void OfdmFrame::validate() const {
  if (fft_len < 2 || cp_len >= fft_len) {
    throw ParameterError("OfdmFrame: need fft_len >= 2 and cp_len < fft_len");
  }
  if (pilots.rows == 0 || pilots.cols != fft_len || data.cols != fft_len) {
    throw ParameterError("OfdmFrame: grid geometry does not match fft_len");
  }
  if (subcarrier_perm.size() != fft_len) {
    throw ParameterError("OfdmFrame: permutation length does not match fft_len");
  }
}

ResourceGrid pilot_grid(std::size_t n_pilots, std::size_t fft_len) {
  ResourceGrid g(n_pilots, fft_len);
  Rng rng(derive_seed(0x50494C4F54ULL, "pilots"));
  for (auto& v : g.values) {
    v = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
  }
  return g;
}

unsigned bits_per_symbol(unsigned order) {
  switch (order) {
    case 4:
      return 2;
    case 16:
      return 4;
    case 64:
      return 6;
    default:
      throw ParameterError(fmt::format("unsupported QAM order {} (use 4, 16 or 64)", order));
  }
}

namespace {

CVec build_constellation(unsigned order) {
  const unsigned k = bits_per_symbol(order);
  const unsigned half = k / 2;
  const unsigned side = 1U << half;
  // amplitude index for each Gray label along one axis
  std::vector<int> level_of(side);
  for (unsigned l = 0; l < side; ++l) {
    level_of[l ^ (l >> 1)] = static_cast<int>(l);
  }
  const double scale = std::sqrt(2.0 * (static_cast<double>(side) * side - 1.0) / 3.0);
  CVec points(order);
  for (unsigned p = 0; p < order; ++p) {
    const int li = level_of[p >> half];
    const int lq = level_of[p & (side - 1)];
    const double re = 2.0 * li - (static_cast<int>(side) - 1);
    const double im = 2.0 * lq - (static_cast<int>(side) - 1);
    points[p] = cplx(re / scale, im / scale);
  }
  return points;
}

}  // namespace

const CVec& constellation(unsigned order) {
  static const std::array<CVec, 3> tables = {build_constellation(4), build_constellation(16),
                                             build_constellation(64)};
  return tables[bits_per_symbol(order) / 2 - 1];
}

CVec qam_modulate(std::span<const std::uint8_t> bits, unsigned order) {
  const unsigned k = bits_per_symbol(order);
  if (bits.size() % k != 0) {
    throw ParameterError(
        fmt::format("qam_modulate: {} bits is not a multiple of {}", bits.size(), k));
  }
  const CVec& table = constellation(order);
  CVec out(bits.size() / k);
  for (std::size_t s = 0; s < out.size(); ++s) {
    out[s] = table[read_bits(bits, s * k, k)];
  }
  return out;
}

std::size_t nearest_point(cplx symbol, unsigned order) {
  const CVec& table = constellation(order);
  std::size_t best = 0;
  double best_d = std::norm(symbol - table[0]);
  for (std::size_t p = 1; p < table.size(); ++p) {
    const double d = std::norm(symbol - table[p]);
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

Bits qam_demodulate(std::span<const cplx> symbols, unsigned order) {
  const unsigned k = bits_per_symbol(order);
  Bits out;
  out.reserve(symbols.size() * k);
  for (const cplx& s : symbols) {
    append_bits(out, nearest_point(s, order), k);
  }
  return out;
}

namespace {

void check_frame_channel(const OfdmFrame& frame, const ChannelRealization& channel) {
  frame.validate();
  if (channel.freq_response.size() != frame.fft_len) {
    throw ParameterError("channel frequency response length does not match fft_len");
  }
}

}  // namespace

ReceivedFrame channel_apply(const OfdmFrame& frame, const ChannelRealization& channel,
                            std::uint64_t seed) {
  check_frame_channel(frame, channel);
  if (frame.cp_len + 1 < channel.taps.size()) {
    throw ConfigError(fmt::format("cp_len {} cannot absorb {} channel taps", frame.cp_len,
                                  channel.taps.size()));
  }
  const std::size_t fft_len = frame.fft_len;
  const std::size_t block = fft_len + frame.cp_len;
  const std::size_t n_rows = frame.pilots.rows + frame.data.rows;

  CVec tx(n_rows * block);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto row = r < frame.pilots.rows ? frame.pilots.row(r) : frame.data.row(r - frame.pilots.rows);
    const CVec x = unitary_dft(row, true);
    cplx* dst = tx.data() + r * block;
    std::copy(x.end() - static_cast<std::ptrdiff_t>(frame.cp_len), x.end(), dst);
    std::copy(x.begin(), x.end(), dst + frame.cp_len);
  }

  Rng rng(seed);
  CVec rx(tx.size());
  for (std::size_t n = 0; n < tx.size(); ++n) {
    cplx acc{};
    const std::size_t reach = std::min(channel.taps.size(), n + 1);
    for (std::size_t t = 0; t < reach; ++t) {
      acc += channel.taps[t] * tx[n - t];
    }
    rx[n] = acc + (channel.noise_var > 0.0 ? rng.complex_normal(channel.noise_var) : cplx{});
  }

  ReceivedFrame out{ResourceGrid(frame.pilots.rows, fft_len), ResourceGrid(frame.data.rows, fft_len)};
  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto body = std::span<const cplx>(rx).subspan(r * block + frame.cp_len, fft_len);
    const CVec y = unitary_dft(body, false);
    ResourceGrid& dst = r < frame.pilots.rows ? out.pilots : out.data;
    const std::size_t dr = r < frame.pilots.rows ? r : r - frame.pilots.rows;
    std::copy(y.begin(), y.end(), dst.values.begin() + static_cast<std::ptrdiff_t>(dr * fft_len));
  }
  return out;
}

ReceivedFrame channel_apply_frequency(const OfdmFrame& frame, const ChannelRealization& channel,
                                      std::uint64_t seed) {
  check_frame_channel(frame, channel);
  Rng rng(seed);
  auto pass = [&](const ResourceGrid& in) {
    ResourceGrid out(in.rows, in.cols);
    for (std::size_t r = 0; r < in.rows; ++r) {
      for (std::size_t k = 0; k < in.cols; ++k) {
        out.at(r, k) = channel.freq_response[k] * in.at(r, k) +
                       (channel.noise_var > 0.0 ? rng.complex_normal(channel.noise_var) : cplx{});
      }
    }
    return out;
  };
  ReceivedFrame out;
  out.pilots = pass(frame.pilots);
  out.data = pass(frame.data);
  return out;
}

CVec mmse_estimate(const ResourceGrid& pilots_rx, const ResourceGrid& pilots_tx,
                   double noise_var) {
  if (pilots_rx.rows != pilots_tx.rows || pilots_rx.cols != pilots_tx.cols || pilots_rx.rows == 0) {
    throw ParameterError("mmse_estimate: pilot grid shapes differ or are empty");
  }
  if (!(noise_var >= 0.0)) {
    throw ParameterError("mmse_estimate: noise variance must be >= 0");
  }
  const double denom = static_cast<double>(pilots_rx.rows) + noise_var;
  CVec h(pilots_rx.cols);
  for (std::size_t k = 0; k < pilots_rx.cols; ++k) {
    cplx acc{};
    for (std::size_t i = 0; i < pilots_rx.rows; ++i) {
      acc += pilots_rx.at(i, k) * std::conj(pilots_tx.at(i, k));
    }
    h[k] = acc / denom;
  }
  return h;
}

ResourceGrid mmse_equalize(const ResourceGrid& data_rx, std::span<const cplx> h_est,
                           double noise_var) {
  if (h_est.size() != data_rx.cols) {
    throw ParameterError("mmse_equalize: channel estimate length does not match subcarriers");
  }
  ResourceGrid out(data_rx.rows, data_rx.cols);
  for (std::size_t r = 0; r < data_rx.rows; ++r) {
    for (std::size_t k = 0; k < data_rx.cols; ++k) {
      out.at(r, k) = data_rx.at(r, k) * std::conj(h_est[k]) / (std::norm(h_est[k]) + noise_var);
    }
  }
  return out;
}

double channel_estimation_loss(std::span<const cplx> h_est, std::span<const cplx> h) {
  if (h_est.size() != h.size() || h.empty()) {
    throw ParameterError("channel_estimation_loss: lengths differ or are zero");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    sum += std::norm(h_est[k] - h[k]);
  }
  return sum / static_cast<double>(h.size());
}

}  // namespace semsec
