#include "pcoh/reduction.hpp"

#include <unordered_set>

namespace pcoh {

    std::size_t ReducedChunk::n_columns() const
    {
        std::size_t result = 0;
        for(const auto& store: columns)
            result += store.size();
        return result;
    }

    ReductionStats reduce_chunk(ReducedChunk& chunk, bool use_clearing)
    {
        ReductionStats stats;
        Entries scratch;

        for(int dim = 0; dim <= max_cell_dim; ++dim) {
            ColumnStore& store = chunk.columns[dim];
            PivotTable& pivots = chunk.pivots[dim];
            pivots.clear();

            if (use_clearing and dim > 0) {
                // owners that are lows one dimension down are positive, their columns reduce to zero
                for(const auto& [low_key, owner]: chunk.pivots[dim - 1])
                    stats.cleared += store.erase(low_key);
            }

            for(auto col_iter = store.begin(); col_iter != store.end();) {
                Entries& col = col_iter->second;
                while(not col.empty()) {
                    auto pivot_iter = pivots.find(col.back());
                    if (pivot_iter == pivots.end()) {
                        pivots.emplace(col.back(), col_iter->first);
                        break;
                    }
                    add_to(col, store.at(pivot_iter->second), scratch);
                    ++stats.additions;
                }

                if (col.empty())
                    col_iter = store.erase(col_iter);
                else
                    ++col_iter;
            }
        }

        return stats;
    }

    bool is_reduced(const ReducedChunk& chunk)
    {
        for(int dim = 0; dim <= max_cell_dim; ++dim) {
            std::unordered_set<CellKey, CellKeyHash> lows;
            for(const auto& [owner, col]: chunk.columns[dim]) {
                if (col.empty() or not is_strictly_sorted(col))
                    return false;
                if (not lows.insert(col.back()).second)
                    return false;
            }
            for(const auto& [low_key, owner]: chunk.pivots[dim]) {
                auto iter = chunk.columns[dim].find(owner);
                if (iter == chunk.columns[dim].end() or not (iter->second.back() == low_key))
                    return false;
            }
        }
        return true;
    }

} // namespace pcoh
