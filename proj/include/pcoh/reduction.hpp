#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <unordered_map>

#include "pcoh/column.hpp"

namespace pcoh {

    constexpr int max_cell_dim = 3;

    // Owner key -> entries, iterated in matrix order.
    // Zero columns are erased rather than stored.
    using ColumnStore = std::map<CellKey, Entries, MatrixOrder>;

    // low row -> owner of the column whose low it is
    using PivotTable = std::unordered_map<CellKey, CellKey, CellKeyHash>;

    // A chunk of the coboundary matrix split by the dimension of the column owners.
    // Columns of dimension d only have rows of dimension d + 1, so each
    // dimension is an independent block.
    struct ReducedChunk {
        std::array<ColumnStore, max_cell_dim + 1> columns;
        std::array<PivotTable, max_cell_dim + 1> pivots;

        std::size_t n_columns() const;
    };

    struct ReductionStats {
        std::size_t additions {0};
        std::size_t cleared {0};
    };

    // Standard left-to-right reduction, one dimension at a time in increasing order.
    // With clearing, columns of dimension d + 1 whose owner is a low of a reduced
    // dimension-d column are dropped before dimension d + 1 is touched.
    // Pivot tables are rebuilt from scratch.
    ReductionStats reduce_chunk(ReducedChunk& chunk, bool use_clearing);

    // true if no two nonzero columns of the same dimension share a low,
    // and every pivot table entry points at a stored column with that low
    bool is_reduced(const ReducedChunk& chunk);

} // namespace pcoh
