#include "pcoh/cover.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "pcoh/errors.hpp"

namespace pcoh {

    bool Block::contains_vertex(const Coords& v) const
    {
        for(int k = 0; k < 3; ++k)
            if (v[k] < lo[k] or v[k] > hi[k])
                return false;
        return true;
    }

    bool Block::contains(const Cell& c) const
    {
        for(int k = 0; k < 3; ++k)
            if (c.coords[k] < 2 * lo[k] or c.coords[k] > 2 * hi[k])
                return false;
        return true;
    }

    Cover::Cover(const Shape& shape, Coords blocks_per_axis)
        : shape_(shape), counts_(blocks_per_axis)
    {
        for(int k = 0; k < 3; ++k) {
            int n = shape.dims[k], b = blocks_per_axis[k];
            if (b < 1)
                throw ConfigError("blocks per axis must be positive, got " + std::to_string(b) + " on axis " + std::to_string(k));
            if (b > n)
                throw ConfigError("cannot split " + std::to_string(n) + " vertices into " + std::to_string(b) + " blocks on axis " + std::to_string(k));
            // block i covers vertices [cuts[i], cuts[i + 1]]
            for(int i = 0; i <= b; ++i)
                cuts_[k].push_back(int((std::int64_t(i) * (n - 1)) / b));
        }

        for(int iz = 0; iz < counts_[2]; ++iz)
            for(int iy = 0; iy < counts_[1]; ++iy)
                for(int ix = 0; ix < counts_[0]; ++ix) {
                    Block block;
                    block.id = int(blocks_.size());
                    Coords idx {ix, iy, iz};
                    for(int k = 0; k < 3; ++k) {
                        block.lo[k] = cuts_[k][idx[k]];
                        block.hi[k] = cuts_[k][idx[k] + 1];
                    }
                    blocks_.push_back(block);
                }
    }

    int Cover::vertex_multiplicity(const Coords& v) const
    {
        int result = 1;
        for(int k = 0; k < 3; ++k) {
            int count = 0;
            for(int i = 0; i < counts_[k]; ++i)
                if (cuts_[k][i] <= v[k] and v[k] <= cuts_[k][i + 1])
                    ++count;
            result *= count;
        }
        return result;
    }

    CellClass Cover::classify(const Cell& c) const
    {
        bool interior = false;
        for_each_vertex(c, [&](const Coords& v) { interior = interior or vertex_multiplicity(v) == 1; });
        return interior ? CellClass::Interior : CellClass::Shared;
    }

    int Cover::home_block(const Cell& c) const
    {
        Coords idx;
        for(int k = 0; k < 3; ++k) {
            int i = 0;
            while(i < counts_[k] and not (2 * cuts_[k][i] <= c.coords[k] and c.coords[k] <= 2 * cuts_[k][i + 1]))
                ++i;
            if (i == counts_[k])
                throw InternalError("cell is not covered by any block");
            idx[k] = i;
        }
        return idx[0] + counts_[0] * (idx[1] + counts_[1] * idx[2]);
    }

    std::vector<Block> partition_grid(const Shape& shape, Coords blocks_per_axis)
    {
        return Cover(shape, blocks_per_axis).blocks();
    }

    CellClass classify_cell(const Cell& cell, std::span<const Block> blocks)
    {
        if (std::none_of(blocks.begin(), blocks.end(), [&](const Block& b) { return b.contains(cell); }))
            throw InternalError("cell is not covered by any block");

        bool interior = false;
        for_each_vertex(cell, [&](const Coords& v) {
            auto n = std::count_if(blocks.begin(), blocks.end(), [&](const Block& b) { return b.contains_vertex(v); });
            interior = interior or n == 1;
        });
        return interior ? CellClass::Interior : CellClass::Shared;
    }

    BlockMatrices build_local_matrices(const Block& block, const Cover& cover, const Grid& grid, int max_dim)
    {
        if (max_dim < 0 or max_dim > max_cell_dim)
            throw ConfigError("max_dim must be in [0, 3], got " + std::to_string(max_dim));

        const Shape& shape = grid.shape();
        CellValueTable table(grid, block.lo, block.hi);

        BlockMatrices bm;
        bm.block_id = block.id;

        Entries interior_rows, shared_rows;

        Cell sigma;
        for(sigma.coords[2] = table.lo()[2]; sigma.coords[2] <= table.hi()[2]; ++sigma.coords[2])
        for(sigma.coords[1] = table.lo()[1]; sigma.coords[1] <= table.hi()[1]; ++sigma.coords[1])
        for(sigma.coords[0] = table.lo()[0]; sigma.coords[0] <= table.hi()[0]; ++sigma.coords[0]) {
            int dim = sigma.dim();
            if (dim > max_dim)
                continue;

            interior_rows.clear();
            shared_rows.clear();

            bool sigma_interior = cover.classify(sigma) == CellClass::Interior;
            CellKey key = table.key(sigma);

            if (dim < max_dim) {
                for_each_cofacet(sigma, shape, [&](const Cell& tau) {
                    if (not block.contains(tau)) {
                        // coboundary of an interior cell never leaves the block
                        if (sigma_interior)
                            throw InternalError("interior cell has a cofacet outside its block");
                        return;
                    }
                    if (cover.classify(tau) == CellClass::Interior)
                        interior_rows.push_back(table.key(tau));
                    else
                        shared_rows.push_back(table.key(tau));
                });
            }

            std::sort(interior_rows.begin(), interior_rows.end(), MatrixOrder());
            std::sort(shared_rows.begin(), shared_rows.end(), MatrixOrder());

            if (sigma_interior) {
                if (not interior_rows.empty())
                    bm.interior.columns[dim].emplace(key, interior_rows);
            } else {
                bm.shared_interior[dim].emplace(key, interior_rows);
                bm.shared_shared[dim].emplace(key, shared_rows);
            }
        }

        return bm;
    }

    ReductionStats reduce_local(BlockMatrices& bm, bool use_clearing)
    {
        return reduce_chunk(bm.interior, use_clearing);
    }

    namespace {

        // shared-interior matrix of one dimension in row-major form: row -> owners in matrix order
        using RowMap = std::unordered_map<CellKey, Entries, CellKeyHash>;

    } // namespace

    SparsifyStats sparsify(BlockMatrices& bm)
    {
        SparsifyStats stats;
        Entries scratch;

        for(int dim = 0; dim <= max_cell_dim; ++dim) {
            ColumnStore& interior = bm.interior.columns[dim];
            const PivotTable& pivots = bm.interior.pivots[dim];
            ColumnStore& shared_interior = bm.shared_interior[dim];

            RowMap rows;
            for(const auto& [owner, col]: shared_interior)
                for(const CellKey& e: col)
                    rows[e].push_back(owner);      // owners arrive in matrix order

            // lows from the bottom of the matrix up
            std::vector<std::pair<CellKey, CellKey>> lows(pivots.begin(), pivots.end());
            std::sort(lows.begin(), lows.end(), [](const auto& a, const auto& b) { return filtration_less(a.first, b.first); });

            for(const auto& [low_row, owner]: lows) {
                Entries& col = interior.at(owner);

                auto low_row_iter = rows.find(low_row);
                if (low_row_iter != rows.end() and not low_row_iter->second.empty()) {
                    const Entries& source = low_row_iter->second;
                    for(const CellKey& e: col) {
                        if (e == low_row)
                            continue;
                        add_to(rows[e], source, scratch);
                        ++stats.row_additions;
                    }
                }

                // every other entry of this column is cancelled by the row additions
                col.assign(1, low_row);
            }

            for(auto& [owner, col]: shared_interior)
                col.clear();
            for(const auto& [row, owners]: rows)
                for(const CellKey& owner: owners)
                    shared_interior.at(owner).push_back(row);

            for(auto& [owner, col]: shared_interior) {
                std::sort(col.begin(), col.end(), MatrixOrder());
                auto new_end = std::remove_if(col.begin(), col.end(), [&, owner = owner](const CellKey& e) {
                    auto iter = pivots.find(e);
                    // adding the ultrasparse column {e} to its right removes e
                    return iter != pivots.end() and precedes(iter->second, owner);
                });
                stats.entries_removed += std::size_t(col.end() - new_end);
                col.erase(new_end, col.end());
            }

            for(const auto& [owner, col]: interior)
                if (col.size() != 1)
                    ++stats.non_ultrasparse;
        }

        return stats;
    }

} // namespace pcoh
