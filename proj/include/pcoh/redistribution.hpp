#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcoh/cover.hpp"
#include "pcoh/runtime.hpp"

namespace pcoh {

    // p - 1 boundary keys, strictly increasing in matrix order.
    // Rank i owns the keys k with boundaries[i - 1] <= k < boundaries[i] in matrix order,
    // so lower ranks hold the earlier (larger) keys.
    struct Splitters {
        std::vector<CellKey> boundaries;

        int n_ranks() const { return int(boundaries.size()) + 1; }
    };

    int rank_by_value(const CellKey& k, const Splitters& s);

    // up to `count` keys drawn without replacement
    std::vector<CellKey> sample_keys(std::span<const CellKey> keys, int count, std::uint64_t seed);

    // Sorts and dedupes the samples and picks p - 1 evenly spaced ones.
    // Fewer distinct samples than ranks is a configuration error.
    Splitters splitters_from_samples(std::vector<CellKey> samples, int p);

    // Collective: every rank samples `oversample` of its keys, the samples are
    // all-gathered and every rank derives the same splitters.
    Splitters compute_splitters(Transport& t, std::span<const CellKey> local_keys, int oversample, std::uint64_t seed);

    // Owners of the columns this block contributes to the redistribution.
    std::vector<CellKey> outgoing_owners(const BlockMatrices& bm, const Cover& cover);

    struct RedistributionStats {
        std::size_t columns_sent {0};         // column fragments leaving this rank
        std::size_t fragments_merged {0};     // fragments joined onto an existing column
        ReductionStats reduction;
    };

    // Collective. Ships every nonzero interior column and the shared fragments to the
    // rank owning the column's key and merges fragments per owner, without reducing.
    // Each shared row is contributed only by the lowest-id block containing it, so
    // fragments of one owner are entry-disjoint; an overlap is reported as ProtocolError.
    ReducedChunk exchange_columns(BlockMatrices&& bm, const Cover& cover, const Splitters& s, Transport& t,
                                  RedistributionStats* stats = nullptr);

    // exchange_columns followed by reduce_chunk on the assembled chunk
    ReducedChunk redistribute_columns(BlockMatrices&& bm, const Cover& cover, const Splitters& s, Transport& t,
                                      bool use_clearing, RedistributionStats* stats = nullptr);

} // namespace pcoh
