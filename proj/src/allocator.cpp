#include "semsec/allocator.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "semsec/errors.hpp"

namespace semsec {

std::size_t AllocationMap::total_symbols() const {
  std::size_t total = 0;
  for (const auto& b : pairs) {
    total += b.n_symbols;
  }
  return total;
}

std::pair<std::size_t, std::size_t> AllocationMap::position(std::size_t slot) const {
  if (rows == 0 || slot >= rows * perm.size()) {
    throw ParameterError(fmt::format("slot {} outside the {}x{} frame", slot, rows, perm.size()));
  }
  return {slot % rows, perm[slot / rows]};
}

std::vector<std::size_t> rank_subchannels(std::span<const cplx> h) {
  std::vector<double> mag(h.size());
  std::transform(h.begin(), h.end(), mag.begin(), [](cplx v) { return std::abs(v); });
  std::vector<std::size_t> order(h.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });
  return order;
}

bool is_permutation_of_range(std::span<const std::size_t> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t v : perm) {
    if (v >= perm.size() || seen[v]) {
      return false;
    }
    seen[v] = true;
  }
  return true;
}

std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> perm) {
  if (!is_permutation_of_range(perm)) {
    throw ParameterError("inverse_permutation: not a permutation");
  }
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t j = 0; j < perm.size(); ++j) {
    inv[perm[j]] = j;
  }
  return inv;
}

AllocationMap allocate(const Selection& selection, const ImportanceVector& iv,
                       std::span<const std::size_t> csi_rank,
                       std::span<const std::size_t> symbols_per_map, std::size_t max_rows) {
  if (selection.indices.empty()) {
    throw ParameterError("allocate: empty selection");
  }
  if (csi_rank.empty() || !is_permutation_of_range(csi_rank)) {
    throw ParameterError("allocate: CSI rank is not a permutation of the subcarriers");
  }
  if (symbols_per_map.size() != iv.scores.size()) {
    throw ParameterError("allocate: symbols_per_map must have one entry per map");
  }
  std::vector<std::size_t> order = selection.indices;
  for (std::size_t idx : order) {
    if (idx >= iv.scores.size()) {
      throw ParameterError(fmt::format("allocate: map index {} out of range", idx));
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return iv.scores[a] > iv.scores[b] || (iv.scores[a] == iv.scores[b] && a < b);
  });

  AllocationMap alloc;
  alloc.csi_rank.assign(csi_rank.begin(), csi_rank.end());
  alloc.perm = alloc.csi_rank;
  std::size_t slot = 0;
  for (std::size_t idx : order) {
    alloc.pairs.push_back({idx, slot, symbols_per_map[idx]});
    slot += symbols_per_map[idx];
  }
  const std::size_t cols = csi_rank.size();
  alloc.rows = std::max<std::size_t>(1, (slot + cols - 1) / cols);
  if (alloc.rows > max_rows) {
    throw ConfigError(fmt::format("payload of {} symbols needs {} OFDM symbols, frame allows {}",
                                  slot, alloc.rows, max_rows));
  }
  return alloc;
}

AllocationMap identity_allocation(const Selection& selection, const ImportanceVector& iv,
                                  std::size_t fft_len, std::span<const std::size_t> symbols_per_map,
                                  std::size_t max_rows) {
  std::vector<std::size_t> identity(fft_len);
  std::iota(identity.begin(), identity.end(), 0);
  return allocate(selection, iv, identity, symbols_per_map, max_rows);
}

ResourceGrid place_symbols(std::span<const cplx> logical, const AllocationMap& alloc,
                           std::span<const cplx> filler) {
  const std::size_t cols = alloc.perm.size();
  const std::size_t capacity = alloc.rows * cols;
  if (logical.size() > capacity) {
    throw ParameterError("place_symbols: more symbols than frame capacity");
  }
  if (filler.size() < capacity - logical.size()) {
    throw ParameterError("place_symbols: not enough filler symbols");
  }
  ResourceGrid grid(alloc.rows, cols);
  for (std::size_t p = 0; p < capacity; ++p) {
    const auto [r, k] = alloc.position(p);
    grid.at(r, k) = p < logical.size() ? logical[p] : filler[p - logical.size()];
  }
  return grid;
}

CVec deallocate(const ResourceGrid& data, const AllocationMap& alloc) {
  if (data.cols != alloc.perm.size() || data.rows != alloc.rows) {
    throw ParameterError(fmt::format("deallocate: frame is {}x{}, allocation expects {}x{}",
                                     data.rows, data.cols, alloc.rows, alloc.perm.size()));
  }
  const std::size_t total = alloc.total_symbols();
  CVec out(total);
  for (std::size_t p = 0; p < total; ++p) {
    const auto [r, k] = alloc.position(p);
    out[p] = data.at(r, k);
  }
  return out;
}

double scrambling_fraction(std::span<const std::size_t> truth, std::span<const std::size_t> guess) {
  if (truth.size() != guess.size() || truth.empty()) {
    throw ParameterError("scrambling_fraction: length mismatch");
  }
  std::size_t moved = 0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    moved += truth[j] != guess[j] ? 1 : 0;
  }
  return static_cast<double>(moved) / static_cast<double>(truth.size());
}

}  // namespace semsec
