#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "semsec/importance.hpp"
#include "semsec/ofdm.hpp"
#include "semsec/selector.hpp"

namespace semsec {

/// Contiguous run of logical slots carrying one map's symbols.
struct MapBlock {
  std::size_t map_index = 0;
  std::size_t first_slot = 0;
  std::size_t n_symbols = 0;

  friend bool operator==(const MapBlock&, const MapBlock&) = default;
};

/// Placement of semantic payloads on subcarriers.
///
/// Logical slots are filled column-major: slot p sits in OFDM symbol
/// (p % rows) of logical column (p / rows), and logical column j is carried
/// by physical subcarrier perm[j]. Columns are ordered by CSI rank, so the
/// first map in `pairs` occupies the strongest subcarriers.
struct AllocationMap {
  std::vector<std::size_t> perm;
  std::vector<MapBlock> pairs;
  std::vector<std::size_t> csi_rank;
  std::size_t rows = 0;

  std::size_t total_symbols() const;
  /// (OFDM symbol, physical subcarrier) of a logical slot.
  std::pair<std::size_t, std::size_t> position(std::size_t slot) const;

  friend bool operator==(const AllocationMap&, const AllocationMap&) = default;
};

/// Subcarrier indices by descending |H[k]|, ties by ascending k.
std::vector<std::size_t> rank_subchannels(std::span<const cplx> h);

/// Assigns the selected maps, in descending score order, to consecutive
/// blocks of logical slots over the CSI-ranked subcarriers.
/// `symbols_per_map` is indexed by map index. Throws ConfigError when the
/// payload needs more than `max_rows` OFDM symbols.
AllocationMap allocate(const Selection& selection, const ImportanceVector& iv,
                       std::span<const std::size_t> csi_rank,
                       std::span<const std::size_t> symbols_per_map, std::size_t max_rows);

/// Same block layout with the identity subcarrier order.
AllocationMap identity_allocation(const Selection& selection, const ImportanceVector& iv,
                                  std::size_t fft_len, std::span<const std::size_t> symbols_per_map,
                                  std::size_t max_rows);

std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> perm);
bool is_permutation_of_range(std::span<const std::size_t> perm);

/// Writes logical symbols into a rows x fft_len data grid; unused slots get
/// `filler`.
ResourceGrid place_symbols(std::span<const cplx> logical, const AllocationMap& alloc,
                           std::span<const cplx> filler);

/// Reads the logical symbol sequence back out of a data grid.
CVec deallocate(const ResourceGrid& data, const AllocationMap& alloc);

/// Fraction of logical columns that land on a different physical subcarrier
/// under `guess` than under `truth`.
double scrambling_fraction(std::span<const std::size_t> truth, std::span<const std::size_t> guess);

}  // namespace semsec
