#include "pcoh/redistribution.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "pcoh/errors.hpp"

namespace pcoh {

    int rank_by_value(const CellKey& k, const Splitters& s)
    {
        // a key equal to a boundary opens the later segment
        auto iter = std::upper_bound(s.boundaries.begin(), s.boundaries.end(), k, MatrixOrder());
        return int(iter - s.boundaries.begin());
    }

    std::vector<CellKey> sample_keys(std::span<const CellKey> keys, int count, std::uint64_t seed)
    {
        std::vector<CellKey> result;
        if (count <= 0)
            return result;
        std::mt19937_64 rng(seed);
        std::sample(keys.begin(), keys.end(), std::back_inserter(result), std::size_t(count), rng);
        return result;
    }

    Splitters splitters_from_samples(std::vector<CellKey> samples, int p)
    {
        if (p < 1)
            throw ConfigError("number of ranks must be at least 1");
        std::sort(samples.begin(), samples.end(), MatrixOrder());
        samples.erase(std::unique(samples.begin(), samples.end()), samples.end());

        Splitters s;
        if (p == 1)
            return s;
        std::size_t m = samples.size();
        if (m < std::size_t(p))
            throw ConfigError("cannot split " + std::to_string(m) + " sampled columns among " + std::to_string(p) + " ranks");
        for(int i = 1; i < p; ++i)
            s.boundaries.push_back(samples[std::size_t(i) * m / std::size_t(p)]);
        return s;
    }

    Splitters compute_splitters(Transport& t, std::span<const CellKey> local_keys, int oversample, std::uint64_t seed)
    {
        std::uint64_t rank_seed = seed ^ (0x9e3779b97f4a7c15ull * std::uint64_t(t.rank() + 1));
        Bytes local;
        ByteWriter w(local);
        for(const CellKey& k: sample_keys(local_keys, oversample, rank_seed))
            w.key(k);

        std::vector<CellKey> samples;
        for(const Bytes& b: t.all_gather(local)) {
            ByteReader r(b);
            while(not r.done())
                samples.push_back(r.key());
        }
        return splitters_from_samples(std::move(samples), t.size());
    }

    namespace {

        // shared-row part of a shared column that this block is responsible for
        Entries homed_shared_rows(const Entries& rows, const BlockMatrices& bm, const Cover& cover)
        {
            Entries result;
            for(const CellKey& e: rows)
                if (cover.home_block(cover.shape().cell(e.uid)) == bm.block_id)
                    result.push_back(e);
            return result;
        }

        // fragment = interior rows + homed shared rows, both sorted and disjoint
        Entries shared_fragment(const Entries& interior_rows, const Entries& shared_rows, const BlockMatrices& bm,
                                const Cover& cover)
        {
            Entries homed = homed_shared_rows(shared_rows, bm, cover);
            Entries result;
            result.reserve(interior_rows.size() + homed.size());
            std::merge(interior_rows.begin(), interior_rows.end(), homed.begin(), homed.end(), std::back_inserter(result), MatrixOrder());
            return result;
        }

        void merge_into(ColumnStore& store, const CellKey& owner, Entries&& entries, RedistributionStats& stats)
        {
            auto [iter, inserted] = store.try_emplace(owner, std::move(entries));
            if (inserted)
                return;
            Entries& existing = iter->second;
            Entries merged;
            merged.reserve(existing.size() + entries.size());
            std::set_union(existing.begin(), existing.end(), entries.begin(), entries.end(), std::back_inserter(merged), MatrixOrder());
            if (merged.size() != existing.size() + entries.size())
                throw ProtocolError("column fragments for owner uid " + std::to_string(owner.uid) + " overlap");
            existing = std::move(merged);
            ++stats.fragments_merged;
        }

    } // namespace

    std::vector<CellKey> outgoing_owners(const BlockMatrices& bm, const Cover& cover)
    {
        std::vector<CellKey> owners;
        for(int d = 0; d <= max_cell_dim; ++d) {
            for(const auto& [owner, col]: bm.interior.columns[d])
                if (not col.empty())
                    owners.push_back(owner);
            for(const auto& [owner, col]: bm.shared_interior[d]) {
                const Entries& ss = bm.shared_shared[d].at(owner);
                if (not col.empty() or not homed_shared_rows(ss, bm, cover).empty())
                    owners.push_back(owner);
            }
        }
        return owners;
    }

    ReducedChunk exchange_columns(BlockMatrices&& bm, const Cover& cover, const Splitters& s, Transport& t,
                                  RedistributionStats* stats_out)
    {
        RedistributionStats stats;
        ReducedChunk chunk;
        std::vector<std::vector<Message>> outbox(t.size());
        std::uint32_t me = std::uint32_t(t.rank());

        auto route = [&](int d, const CellKey& owner, Entries&& entries) {
            if (entries.empty())
                return;
            int dest = rank_by_value(owner, s);
            if (dest == t.rank()) {
                merge_into(chunk.columns[d], owner, std::move(entries), stats);
                return;
            }
            outbox[dest].push_back(Message::column(me, std::uint32_t(dest), owner, std::move(entries)));
            ++stats.columns_sent;
        };

        for(int d = 0; d <= max_cell_dim; ++d) {
            for(auto& [owner, col]: bm.interior.columns[d])
                route(d, owner, std::move(col));
            for(auto& [owner, col]: bm.shared_interior[d])
                route(d, owner, shared_fragment(col, bm.shared_shared[d].at(owner), bm, cover));
        }
        bm = BlockMatrices {};

        for(Message& msg: t.exchange(outbox, "redistribute")) {
            if (msg.kind != MessageKind::ColumnPayload)
                throw ProtocolError("unexpected clear request during redistribution");
            if (rank_by_value(msg.owner, s) != t.rank())
                throw ProtocolError("column for owner uid " + std::to_string(msg.owner.uid) + " delivered to the wrong rank");
            int d = cover.shape().cell_dim(msg.owner.uid);
            merge_into(chunk.columns[d], msg.owner, std::move(msg.entries), stats);
        }

        if (stats_out)
            *stats_out = stats;
        return chunk;
    }

    ReducedChunk redistribute_columns(BlockMatrices&& bm, const Cover& cover, const Splitters& s, Transport& t,
                                      bool use_clearing, RedistributionStats* stats_out)
    {
        RedistributionStats stats;
        ReducedChunk chunk = exchange_columns(std::move(bm), cover, s, t, &stats);
        stats.reduction = reduce_chunk(chunk, use_clearing);
        if (stats_out)
            *stats_out = stats;
        return chunk;
    }

} // namespace pcoh
