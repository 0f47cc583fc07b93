#include "semsec/pipeline.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "semsec/errors.hpp"
#include "semsec/rng.hpp"

namespace semsec {

Model build_model(const RunConfig& cfg) {
  Model model;
  model.dataset = cfg.dataset_file.empty() ? synth_dataset(cfg.synth) : load_dataset(cfg.dataset_file);
  if (!cfg.head_file.empty()) {
    model.head = load_head(cfg.head_file);
  } else {
    TrainOptions opts;
    opts.epochs = cfg.epochs;
    opts.learning_rate = cfg.learning_rate;
    opts.seed = cfg.head_seed;
    const std::optional<std::size_t> classes =
        cfg.dataset_file.empty() ? std::optional<std::size_t>(cfg.synth.n_classes) : std::nullopt;
    model.head = train_head(model.dataset, opts, classes);
  }
  if (model.head.n_maps != model.dataset.front().n_maps()) {
    throw ConfigError(fmt::format("head expects {} maps but the dataset has {}", model.head.n_maps,
                                  model.dataset.front().n_maps()));
  }
  return model;
}

std::size_t symbols_per_map(const FeatureMapSet& item, unsigned bits_per_sample, unsigned qam_order) {
  const std::size_t bits = item.map_size() * bits_per_sample;
  const unsigned k = bits_per_symbol(qam_order);
  return (bits + k - 1) / k;
}

namespace {

AllocationMap rebuild_allocation(const SideInfo& side, std::size_t fft_len,
                                 std::span<const std::size_t> csi_rank) {
  AllocationMap alloc;
  if (csi_rank.empty()) {
    alloc.perm.resize(fft_len);
    std::iota(alloc.perm.begin(), alloc.perm.end(), 0);
  } else {
    if (csi_rank.size() != fft_len) {
      throw ParameterError("CSI rank length does not match fft_len");
    }
    alloc.perm.assign(csi_rank.begin(), csi_rank.end());
  }
  alloc.csi_rank = alloc.perm;
  alloc.pairs = side.blocks;
  alloc.rows = side.rows;
  return alloc;
}

CVec filler_symbols(std::size_t count, std::uint64_t seed) {
  const CVec& qpsk = constellation(4);
  Rng rng(seed);
  CVec out(count);
  for (auto& s : out) {
    s = qpsk[rng.below(4)];
  }
  return out;
}

}  // namespace

Transmission transmit(const FeatureMapSet& item, const RunConfig& cfg, const HeadParams& head,
                      double epsilon, std::span<const std::size_t> csi_rank,
                      std::span<const std::uint8_t> plk, std::uint64_t filler_seed) {
  const OfdmParams& ofdm = cfg.ofdm;
  Transmission tx;
  tx.iv = importance(head, item);
  tx.selection = select_maps(tx.iv, epsilon);

  const auto weights = weight_stream(plk, item.n_maps(), cfg.l_scores);
  SkeyStream skeys = skey_stream(tx.iv, weights, cfg.l_skey);

  const unsigned k = bits_per_symbol(ofdm.qam_order);
  const std::vector<std::size_t> spm(item.n_maps(),
                                     symbols_per_map(item, cfg.bits_per_sample, ofdm.qam_order));

  tx.side.bits_per_sample = cfg.bits_per_sample;
  tx.side.qam_order = ofdm.qam_order;
  tx.side.n_maps = item.n_maps();
  tx.side.height = item.height();
  tx.side.width = item.width();

  tx.frame.fft_len = ofdm.fft_len;
  tx.frame.cp_len = ofdm.cp_len;
  tx.frame.pilots = pilot_grid(ofdm.n_pilots, ofdm.fft_len);

  if (tx.nothing_transmitted()) {
    tx.keys = make_key_material(Bits(plk.begin(), plk.end()), std::move(skeys), 0);
    tx.alloc = rebuild_allocation(tx.side, ofdm.fft_len, {});
    tx.frame.data = ResourceGrid(0, ofdm.fft_len);
    tx.frame.subcarrier_perm = tx.alloc.perm;
    return tx;
  }

  tx.alloc = csi_rank.empty()
                 ? identity_allocation(tx.selection, tx.iv, ofdm.fft_len, spm, cfg.max_ofdm_symbols)
                 : allocate(tx.selection, tx.iv, csi_rank, spm, cfg.max_ofdm_symbols);
  tx.side.blocks = tx.alloc.pairs;
  tx.side.rows = tx.alloc.rows;

  for (const MapBlock& block : tx.alloc.pairs) {
    const QuantizedPayload q = quantize_map(item.map(block.map_index), cfg.bits_per_sample, block.map_index);
    tx.side.min_vals.push_back(q.min_val);
    tx.side.max_vals.push_back(q.max_val);
    tx.plaintext.insert(tx.plaintext.end(), q.bits.begin(), q.bits.end());
  }

  tx.keys = make_key_material(Bits(plk.begin(), plk.end()), std::move(skeys), tx.plaintext.size());
  tx.ciphertext = tx.plaintext;
  if (cfg.encrypt) {
    xor_in_place(tx.ciphertext, tx.keys.keystream);
  }

  // Each map's bits are zero-padded to a whole number of symbols.
  const std::size_t map_bits = tx.side.payload_bits_per_map();
  CVec logical;
  for (std::size_t b = 0; b < tx.alloc.pairs.size(); ++b) {
    Bits chunk(tx.ciphertext.begin() + static_cast<std::ptrdiff_t>(b * map_bits),
               tx.ciphertext.begin() + static_cast<std::ptrdiff_t>((b + 1) * map_bits));
    chunk.resize(tx.alloc.pairs[b].n_symbols * k, 0);
    const CVec symbols = qam_modulate(chunk, ofdm.qam_order);
    logical.insert(logical.end(), symbols.begin(), symbols.end());
  }
  tx.payload_symbols = logical.size();

  const std::size_t capacity = tx.alloc.rows * ofdm.fft_len;
  tx.frame.data = place_symbols(logical, tx.alloc, filler_symbols(capacity - logical.size(), filler_seed));
  tx.frame.subcarrier_perm = tx.alloc.perm;
  return tx;
}

namespace {

Reception decode(const ReceivedFrame& rx, const SideInfo& side, const RunConfig& cfg,
                 const HeadParams& head, std::span<const std::size_t> csi_rank,
                 const Bits* keystream_source_plk, const SkeyStream* skeys, double noise_var) {
  const std::size_t fft_len = cfg.ofdm.fft_len;
  Reception out;
  const ResourceGrid pilots_tx = pilot_grid(rx.pilots.rows, fft_len);
  out.h_est = mmse_estimate(rx.pilots, pilots_tx, noise_var);
  const ResourceGrid equalized = mmse_equalize(rx.data, out.h_est, noise_var);

  const AllocationMap alloc = rebuild_allocation(side, fft_len, csi_rank);
  const unsigned k = bits_per_symbol(side.qam_order);
  const std::size_t map_bits = side.payload_bits_per_map();

  if (!side.blocks.empty()) {
    out.equalized = deallocate(equalized, alloc);
    out.carriers.reserve(out.equalized.size());
    for (std::size_t p = 0; p < out.equalized.size(); ++p) {
      out.carriers.push_back(alloc.position(p).second);
    }
    for (const MapBlock& block : side.blocks) {
      const auto symbols = std::span<const cplx>(out.equalized).subspan(block.first_slot, block.n_symbols);
      Bits bits = qam_demodulate(symbols, side.qam_order);
      if (bits.size() < map_bits || block.n_symbols * k != bits.size()) {
        throw ParameterError("receiver: block too short for the map payload");
      }
      out.channel_bits.insert(out.channel_bits.end(), bits.begin(),
                              bits.begin() + static_cast<std::ptrdiff_t>(map_bits));
    }
  }

  out.plain_bits = out.channel_bits;
  if (keystream_source_plk != nullptr && skeys != nullptr && !out.channel_bits.empty()) {
    xor_in_place(out.plain_bits, derive_keystream(*skeys, *keystream_source_plk, out.plain_bits.size()));
  }

  std::vector<float> values(side.n_maps * side.height * side.width, 0.0F);
  for (std::size_t b = 0; b < side.blocks.size(); ++b) {
    QuantizedPayload q;
    q.map_index = side.blocks[b].map_index;
    q.min_val = side.min_vals[b];
    q.max_val = side.max_vals[b];
    q.bits_per_sample = side.bits_per_sample;
    q.bits.assign(out.plain_bits.begin() + static_cast<std::ptrdiff_t>(b * map_bits),
                  out.plain_bits.begin() + static_cast<std::ptrdiff_t>((b + 1) * map_bits));
    const auto map = dequantize_map(q);
    std::copy(map.begin(), map.end(),
              values.begin() + static_cast<std::ptrdiff_t>(q.map_index * side.height * side.width));
  }
  out.recovered.emplace(side.n_maps, side.height, side.width, std::move(values), 0, "received");
  out.predicted_class = head_forward(head, *out.recovered).argmax();
  return out;
}

}  // namespace

Reception receive_legit(const ReceivedFrame& rx, const SideInfo& side, const RunConfig& cfg,
                        const HeadParams& head, std::span<const std::size_t> csi_rank,
                        const SkeyStream& skeys, std::span<const std::uint8_t> plk,
                        double noise_var) {
  const Bits plk_bits(plk.begin(), plk.end());
  return decode(rx, side, cfg, head, csi_rank, cfg.encrypt ? &plk_bits : nullptr,
                cfg.encrypt ? &skeys : nullptr, noise_var);
}

Reception receive_eavesdrop(const ReceivedFrame& rx, const SideInfo& side, const RunConfig& cfg,
                            const HeadParams& head, double noise_var) {
  return decode(rx, side, cfg, head, {}, nullptr, nullptr, noise_var);
}

double TrialRecord::legit_ber() const {
  return payload_bits == 0 ? 0.0 : static_cast<double>(legit_errors_plain) / payload_bits;
}

double TrialRecord::legit_ber_channel() const {
  return payload_bits == 0 ? 0.0 : static_cast<double>(legit_errors_channel) / payload_bits;
}

double TrialRecord::eve_ber() const {
  return payload_bits == 0 ? 0.0 : static_cast<double>(eve_errors) / payload_bits;
}

std::string TrialRecord::perm_text() const { return fmt::format("{}", fmt::join(perm, "-")); }

std::string TrialRecord::perm_digest() const {
  std::uint64_t h = 0x7065726D;
  for (std::size_t v : perm) {
    h = lightweight_hash(h, v, 0);
  }
  return to_hex(h);
}

TrialSeeds trial_seeds(std::uint64_t master, std::size_t trial) {
  const std::uint64_t base = derive_seed(master, "trial", trial);
  return TrialSeeds{base,
                    derive_seed(base, "legit-channel"),
                    derive_seed(base, "eve-channel"),
                    derive_seed(base, "plk"),
                    derive_seed(base, "sounding"),
                    derive_seed(base, "legit-noise"),
                    derive_seed(base, "eve-noise"),
                    derive_seed(base, "filler")};
}

TrialRecord run_trial(const Model& model, const RunConfig& base_cfg, std::size_t trial,
                      const TrialOptions& options) {
  if (model.dataset.empty()) {
    throw ParameterError("run_trial: empty dataset");
  }
  RunConfig cfg = base_cfg;
  cfg.encrypt = options.encrypt;
  cfg.allocate = options.allocate;
  const OfdmParams& ofdm = cfg.ofdm;

  const TrialSeeds seeds = trial_seeds(cfg.seed, trial);
  const std::size_t item_index = trial % model.dataset.size();
  const FeatureMapSet& item = model.dataset[item_index];
  const double noise_var =
      std::isnan(options.noise_var) ? snr_db_to_noise_var(options.snr_db) : options.noise_var;

  const ChannelRealization legit_ch = draw_channel(ofdm.n_taps, ofdm.fft_len, noise_var, seeds.legit_channel);
  const ChannelRealization eve_ch = draw_channel(ofdm.n_taps, ofdm.fft_len, noise_var, seeds.eve_channel);
  const PlkProbe plk = probe_plk(legit_ch, cfg.l_plk, cfg.plk_noise, seeds.plk);

  // Channel sounding: the receiver ranks its estimated subchannels and
  // feeds the order back to the transmitter.
  std::vector<std::size_t> csi_rank;
  if (cfg.allocate) {
    OfdmFrame sounding;
    sounding.fft_len = ofdm.fft_len;
    sounding.cp_len = ofdm.cp_len;
    sounding.pilots = pilot_grid(ofdm.n_pilots, ofdm.fft_len);
    sounding.data = ResourceGrid(0, ofdm.fft_len);
    sounding.subcarrier_perm.resize(ofdm.fft_len);
    std::iota(sounding.subcarrier_perm.begin(), sounding.subcarrier_perm.end(), 0);
    const ReceivedFrame probe_rx = channel_apply(sounding, legit_ch, seeds.sounding);
    csi_rank = rank_subchannels(mmse_estimate(probe_rx.pilots, sounding.pilots, noise_var));
  }

  const Transmission tx = transmit(item, cfg, model.head, options.epsilon, csi_rank, plk.alice, seeds.filler);
  const ReceivedFrame rx_legit = channel_apply(tx.frame, legit_ch, seeds.legit_noise);
  const ReceivedFrame rx_eve =
      options.eve_on_legit_channel ? rx_legit : channel_apply(tx.frame, eve_ch, seeds.eve_noise);

  const Reception legit =
      receive_legit(rx_legit, tx.side, cfg, model.head, csi_rank, tx.keys.skeys, plk.bob, noise_var);
  const Reception eve = receive_eavesdrop(rx_eve, tx.side, cfg, model.head, noise_var);

  TrialRecord rec;
  rec.trial = trial;
  rec.trial_seed = seeds.trial;
  rec.item = item_index;
  rec.label = item.label();
  rec.snr_db = options.snr_db;
  rec.epsilon = options.epsilon;
  rec.lambda = tx.selection.lambda;
  rec.symbols = tx.payload_symbols;
  rec.latency_us = static_cast<double>(tx.payload_symbols) * cfg.symbol_duration_us;
  rec.payload_bits = tx.plaintext.size();
  rec.legit_errors_channel = hamming_distance(legit.channel_bits, tx.ciphertext);
  rec.legit_errors_plain = hamming_distance(legit.plain_bits, tx.plaintext);
  rec.eve_errors = hamming_distance(eve.plain_bits, tx.plaintext);
  rec.l_cha = channel_estimation_loss(legit.h_est, legit_ch.freq_response);
  rec.tx_class = tx.iv.cls;
  rec.rx_class = legit.predicted_class;
  rec.class_correct = legit.predicted_class == item.label();
  rec.class_match = legit.predicted_class == tx.iv.cls;
  rec.nothing_transmitted = tx.nothing_transmitted();
  rec.static_environment = plk.static_environment;
  rec.plk_disagreement = plk.disagreement_rate();
  rec.perm = tx.alloc.perm;
  if (options.keep_constellation) {
    rec.constellation.reserve(legit.equalized.size());
    for (std::size_t p = 0; p < legit.equalized.size(); ++p) {
      rec.constellation.push_back({legit.equalized[p].real(), legit.equalized[p].imag(), legit.carriers[p]});
    }
  }
  return rec;
}

}  // namespace semsec
