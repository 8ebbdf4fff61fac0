#include "pcoh/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcoh/errors.hpp"

namespace pcoh {

    Grid::Grid(Coords dims, std::vector<double> values)
        : shape_ {dims}, values_(std::move(values))
    {
        for(int k = 0; k < 3; ++k)
            if (dims[k] < 1)
                throw ConfigError("grid dimension " + std::to_string(k) + " must be positive, got " + std::to_string(dims[k]));

        if (values_.size() != shape_.n_vertices())
            throw ConfigError("grid expects " + std::to_string(shape_.n_vertices()) + " values, got " + std::to_string(values_.size()));

        for(double v: values_)
            if (not std::isfinite(v))
                throw ConfigError("grid values must be finite");
    }

    double lower_star_value(const Cell& cell, const Grid& grid)
    {
        if (not grid.shape().contains(cell))
            throw ConfigError("cell outside of grid");

        double result = -INFINITY;
        for_each_vertex(cell, [&](const Coords& v) { result = std::max(result, grid.vertex_value(v)); });
        return result;
    }

    CellKey cell_key(const Cell& cell, const Grid& grid)
    {
        return {lower_star_value(cell, grid), grid.shape().uid(cell)};
    }

    CellValueTable::CellValueTable(const Grid& grid)
        : CellValueTable(grid, Coords {0, 0, 0}, Coords {grid.dims()[0] - 1, grid.dims()[1] - 1, grid.dims()[2] - 1})
    {
    }

    CellValueTable::CellValueTable(const Grid& grid, Coords vertex_lo, Coords vertex_hi)
        : shape_(grid.shape())
    {
        for(int k = 0; k < 3; ++k) {
            if (vertex_lo[k] < 0 or vertex_hi[k] >= grid.dims()[k] or vertex_lo[k] > vertex_hi[k])
                throw ConfigError("vertex box outside of grid");
            lo_[k] = 2 * vertex_lo[k];
            hi_[k] = 2 * vertex_hi[k];
            ext_[k] = std::size_t(hi_[k] - lo_[k] + 1);
        }

        values_.assign(ext_[0] * ext_[1] * ext_[2], 0.0);

        auto at = [this](std::size_t x, std::size_t y, std::size_t z) -> double& {
            return values_[x + ext_[0] * (y + ext_[1] * z)];
        };

        for(std::size_t z = 0; z < ext_[2]; z += 2)
            for(std::size_t y = 0; y < ext_[1]; y += 2)
                for(std::size_t x = 0; x < ext_[0]; x += 2)
                    at(x, y, z) = grid.vertex_value({int(x + lo_[0]) / 2, int(y + lo_[1]) / 2, int(z + lo_[2]) / 2});

        // max along x on vertex rows, then along y, then along z
        for(std::size_t z = 0; z < ext_[2]; z += 2)
            for(std::size_t y = 0; y < ext_[1]; y += 2)
                for(std::size_t x = 1; x < ext_[0]; x += 2)
                    at(x, y, z) = std::max(at(x - 1, y, z), at(x + 1, y, z));

        for(std::size_t z = 0; z < ext_[2]; z += 2)
            for(std::size_t y = 1; y < ext_[1]; y += 2)
                for(std::size_t x = 0; x < ext_[0]; ++x)
                    at(x, y, z) = std::max(at(x, y - 1, z), at(x, y + 1, z));

        for(std::size_t z = 1; z < ext_[2]; z += 2)
            for(std::size_t y = 0; y < ext_[1]; ++y)
                for(std::size_t x = 0; x < ext_[0]; ++x)
                    at(x, y, z) = std::max(at(x, y, z - 1), at(x, y, z + 1));
    }

    bool CellValueTable::contains(const Cell& c) const
    {
        for(int k = 0; k < 3; ++k)
            if (c.coords[k] < lo_[k] or c.coords[k] > hi_[k])
                return false;
        return true;
    }

    std::vector<std::pair<Cell, CellKey>> enumerate_cells(const Grid& grid, int max_dim)
    {
        if (max_dim < 0 or max_dim > 3)
            throw ConfigError("max_dim must be in [0, 3], got " + std::to_string(max_dim));

        const Shape& shape = grid.shape();
        CellValueTable table(grid);

        std::vector<std::pair<Cell, CellKey>> result;
        result.reserve(shape.n_cells());

        Cell c;
        for(c.coords[2] = 0; c.coords[2] < shape.doubled(2); ++c.coords[2])
            for(c.coords[1] = 0; c.coords[1] < shape.doubled(1); ++c.coords[1])
                for(c.coords[0] = 0; c.coords[0] < shape.doubled(0); ++c.coords[0])
                    if (c.dim() <= max_dim)
                        result.emplace_back(c, table.key(c));

        std::sort(result.begin(), result.end(), [](const auto& a, const auto& b) {
            int da = a.first.dim(), db = b.first.dim();
            if (da != db)
                return da < db;
            return precedes(a.second, b.second);
        });

        return result;
    }

    std::vector<Cell> cofacets(const Cell& cell, const Shape& shape)
    {
        std::vector<Cell> result;
        for_each_cofacet(cell, shape, [&](const Cell& tau) { result.push_back(tau); });
        return result;
    }

    std::vector<Cell> facets(const Cell& cell)
    {
        std::vector<Cell> result;
        for_each_facet(cell, [&](const Cell& sigma) { result.push_back(sigma); });
        return result;
    }

} // namespace pcoh
