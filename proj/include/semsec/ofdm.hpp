#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "semsec/bits.hpp"
#include "semsec/dft.hpp"

namespace semsec {

/// rows x cols complex grid, row-major. Rows are OFDM symbols, columns are
/// subcarriers.
struct ResourceGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  CVec values;

  ResourceGrid() = default;
  ResourceGrid(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c) {}

  cplx& at(std::size_t r, std::size_t k) { return values[r * cols + k]; }
  const cplx& at(std::size_t r, std::size_t k) const { return values[r * cols + k]; }
  std::span<const cplx> row(std::size_t r) const {
    return std::span<const cplx>(values).subspan(r * cols, cols);
  }
};

/// Multipath channel: taps, their fft_len-point DFT and the per-sample
/// complex noise variance.
struct ChannelRealization {
  CVec taps;
  CVec freq_response;
  double noise_var = 0.0;
};

ChannelRealization make_channel(CVec taps, std::size_t fft_len, double noise_var);

/// Independent complex Gaussian taps with an exponential power-delay profile
/// (tap t has power proportional to exp(-t / n_taps * 2)), normalized so the
/// expected total power is 1.
ChannelRealization draw_channel(std::size_t n_taps, std::size_t fft_len, double noise_var,
                                std::uint64_t seed);

/// Noise variance for unit-energy symbols at the given SNR.
double snr_db_to_noise_var(double snr_db);

struct OfdmParams {
  std::size_t fft_len = 64;
  std::size_t cp_len = 16;
  std::size_t n_taps = 8;
  std::size_t n_pilots = 2;
  unsigned qam_order = 16;

  void validate() const;
};

struct OfdmFrame {
  std::size_t fft_len = 0;
  std::size_t cp_len = 0;
  ResourceGrid pilots;  ///< N_p x fft_len, unit modulus
  ResourceGrid data;    ///< N_s x fft_len
  std::vector<std::size_t> subcarrier_perm;

  void validate() const;
};

/// Frequency-domain grids after CP removal and DFT.
struct ReceivedFrame {
  ResourceGrid pilots;
  ResourceGrid data;
};

/// Fixed unit-modulus pilot sequence known to every receiver.
ResourceGrid pilot_grid(std::size_t n_pilots, std::size_t fft_len);

unsigned bits_per_symbol(unsigned order);

/// Gray-mapped square constellation with unit average energy, indexed by the
/// bit pattern (first half of the bits selects I, second half Q).
const CVec& constellation(unsigned order);

CVec qam_modulate(std::span<const std::uint8_t> bits, unsigned order);

/// Minimum-distance hard decisions; exact ties go to the smallest pattern.
Bits qam_demodulate(std::span<const cplx> symbols, unsigned order);

/// Index of the nearest constellation point (same tie rule).
std::size_t nearest_point(cplx symbol, unsigned order);

/// IDFT, cyclic prefix, tap convolution, AWGN, CP removal and DFT over the
/// whole frame (pilot symbols first, then data).
ReceivedFrame channel_apply(const OfdmFrame& frame, const ChannelRealization& channel,
                            std::uint64_t seed);

/// Direct per-subcarrier model Y'[j,k] = H[k] Y[j,k] + V[j,k].
ReceivedFrame channel_apply_frequency(const OfdmFrame& frame, const ChannelRealization& channel,
                                      std::uint64_t seed);

/// H[k] = sum_i Yp'[i,k] conj(Yp[i,k]) / (N_p + noise_var)
CVec mmse_estimate(const ResourceGrid& pilots_rx, const ResourceGrid& pilots_tx,
                   double noise_var);

/// Y[j,k] = Y'[j,k] conj(H[k]) / (|H[k]|^2 + noise_var)
ResourceGrid mmse_equalize(const ResourceGrid& data_rx, std::span<const cplx> h_est,
                           double noise_var);

/// Mean squared deviation over subcarriers.
double channel_estimation_loss(std::span<const cplx> h_est, std::span<const cplx> h);

}  // namespace semsec
