#pragma once

#include <span>
#include <vector>

#include "pcoh/filtration.hpp"
#include "pcoh/reduction.hpp"

namespace pcoh {

    // Axis-aligned box of vertices; its sub-complex holds every cell whose vertices all lie in the box.
    // Neighbouring blocks overlap in one vertex plane.
    struct Block {
        int id {0};
        Coords lo {0, 0, 0};
        Coords hi {0, 0, 0};

        bool contains_vertex(const Coords& v) const;
        bool contains(const Cell& c) const;
    };

    enum class CellClass { Interior, Shared };

    // Blocks of a grid split into blocks_per_axis pieces along each axis.
    // Block id = ix + bx * (iy + by * iz).
    class Cover {
    public:
        Cover(const Shape& shape, Coords blocks_per_axis);

        const Shape& shape() const { return shape_; }
        const std::vector<Block>& blocks() const { return blocks_; }
        int n_blocks() const { return int(blocks_.size()); }
        const Coords& blocks_per_axis() const { return counts_; }

        // number of blocks whose box contains vertex v
        int vertex_multiplicity(const Coords& v) const;

        CellClass classify(const Cell& c) const;

        // smallest id among the blocks containing the cell
        int home_block(const Cell& c) const;

    private:
        Shape shape_;
        Coords counts_;
        std::array<std::vector<int>, 3> cuts_;
        std::vector<Block> blocks_;
    };

    std::vector<Block> partition_grid(const Shape& shape, Coords blocks_per_axis);

    // Reference classification straight from the block list:
    // Interior iff some vertex of the cell lies in exactly one block.
    CellClass classify_cell(const Cell& cell, std::span<const Block> blocks);

    // Per-block pieces of the coboundary matrix:
    //   interior         -- columns of interior cells, all rows interior (reduced in place, with pivots)
    //   shared_interior  -- columns of shared cells restricted to interior rows
    //   shared_shared    -- columns of shared cells restricted to shared rows
    // The two shared stores have identical key sets and may hold empty columns.
    struct BlockMatrices {
        int block_id {0};
        ReducedChunk interior;
        std::array<ColumnStore, max_cell_dim + 1> shared_interior;
        std::array<ColumnStore, max_cell_dim + 1> shared_shared;
    };

    BlockMatrices build_local_matrices(const Block& block, const Cover& cover, const Grid& grid, int max_dim);

    // Reduces the interior columns only; the shared stores are left as they are.
    ReductionStats reduce_local(BlockMatrices& bm, bool use_clearing);

    struct SparsifyStats {
        std::size_t row_additions {0};
        std::size_t entries_removed {0};      // shared-interior entries cancelled by an ultrasparse column to their left
        std::size_t non_ultrasparse {0};      // interior columns left with more than one entry, expected 0
    };

    // Row additions bottom-up until every interior column is its pivot alone,
    // mirrored on the shared-interior rows, then cancellation of shared-interior
    // entries that have an ultrasparse pivot column to their left.
    SparsifyStats sparsify(BlockMatrices& bm);

} // namespace pcoh
