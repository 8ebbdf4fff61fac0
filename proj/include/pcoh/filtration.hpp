#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "pcoh/cell_key.hpp"

namespace pcoh {

    using Coords = std::array<int, 3>;

    // Cubical cell in doubled-grid coordinates: even coordinate = vertex axis,
    // odd coordinate = interval axis.
    struct Cell {
        Coords coords {0, 0, 0};

        int dim() const { return (coords[0] & 1) + (coords[1] & 1) + (coords[2] & 1); }

        friend bool operator==(const Cell&, const Cell&) = default;
    };

    // Vertex dimensions of a grid and the doubled-grid indexing derived from them.
    struct Shape {
        Coords dims {1, 1, 1};

        std::size_t n_vertices() const { return std::size_t(dims[0]) * dims[1] * dims[2]; }

        // extent of the doubled grid along axis k: 2 * dims[k] - 1
        int doubled(int k) const { return 2 * dims[k] - 1; }

        std::size_t n_cells() const { return std::size_t(doubled(0)) * doubled(1) * doubled(2); }

        bool contains(const Cell& c) const
        {
            for(int k = 0; k < 3; ++k)
                if (c.coords[k] < 0 or c.coords[k] >= doubled(k))
                    return false;
            return true;
        }

        Uid uid(const Cell& c) const
        {
            return Uid(c.coords[0]) + Uid(doubled(0)) * (Uid(c.coords[1]) + Uid(doubled(1)) * Uid(c.coords[2]));
        }

        Cell cell(Uid uid) const
        {
            Cell c;
            c.coords[0] = int(uid % Uid(doubled(0)));
            uid /= Uid(doubled(0));
            c.coords[1] = int(uid % Uid(doubled(1)));
            c.coords[2] = int(uid / Uid(doubled(1)));
            return c;
        }

        int cell_dim(Uid uid) const { return cell(uid).dim(); }

        std::size_t vertex_index(const Coords& v) const
        {
            return std::size_t(v[0]) + std::size_t(dims[0]) * (std::size_t(v[1]) + std::size_t(dims[1]) * std::size_t(v[2]));
        }

        friend bool operator==(const Shape&, const Shape&) = default;
    };

    // Scalar field sampled on grid vertices, row-major with x fastest.
    class Grid {
    public:
        Grid() = default;
        Grid(Coords dims, std::vector<double> values);

        const Shape& shape() const { return shape_; }
        const Coords& dims() const { return shape_.dims; }
        const std::vector<double>& values() const { return values_; }

        double vertex_value(const Coords& v) const { return values_[shape_.vertex_index(v)]; }

    private:
        Shape shape_;
        std::vector<double> values_;
    };

    // Max of the grid values over the 2^dim vertices of the cell.
    double lower_star_value(const Cell& cell, const Grid& grid);

    CellKey cell_key(const Cell& cell, const Grid& grid);

    // Lower-star values of every cell inside an axis-aligned box of vertices,
    // computed with one max pass per axis instead of per-cell vertex scans.
    class CellValueTable {
    public:
        CellValueTable(const Grid& grid, Coords vertex_lo, Coords vertex_hi);
        explicit CellValueTable(const Grid& grid);

        bool contains(const Cell& c) const;
        double operator()(const Cell& c) const { return values_[index(c)]; }
        CellKey key(const Cell& c) const { return {(*this)(c), shape_.uid(c)}; }

        // doubled-grid bounds of the box, inclusive
        const Coords& lo() const { return lo_; }
        const Coords& hi() const { return hi_; }

    private:
        std::size_t index(const Cell& c) const
        {
            return std::size_t(c.coords[0] - lo_[0])
                 + ext_[0] * (std::size_t(c.coords[1] - lo_[1]) + ext_[1] * std::size_t(c.coords[2] - lo_[2]));
        }

        Shape shape_;
        Coords lo_, hi_;
        std::array<std::size_t, 3> ext_;
        std::vector<double> values_;
    };

    // Every cell of dimension <= max_dim with its key, sorted by dimension ascending,
    // then by matrix order.
    std::vector<std::pair<Cell, CellKey>> enumerate_cells(const Grid& grid, int max_dim = 3);

    template<class F>
    void for_each_cofacet(const Cell& cell, const Shape& shape, F&& f)
    {
        for(int k = 0; k < 3; ++k) {
            if (cell.coords[k] & 1)
                continue;
            for(int delta: {-1, 1}) {
                Cell tau = cell;
                tau.coords[k] += delta;
                if (tau.coords[k] >= 0 and tau.coords[k] < shape.doubled(k))
                    f(tau);
            }
        }
    }

    template<class F>
    void for_each_facet(const Cell& cell, F&& f)
    {
        for(int k = 0; k < 3; ++k) {
            if (not (cell.coords[k] & 1))
                continue;
            for(int delta: {-1, 1}) {
                Cell sigma = cell;
                sigma.coords[k] += delta;
                f(sigma);
            }
        }
    }

    template<class F>
    void for_each_vertex(const Cell& cell, F&& f)
    {
        int lo[3], hi[3];
        for(int k = 0; k < 3; ++k) {
            lo[k] = (cell.coords[k] - (cell.coords[k] & 1)) / 2;
            hi[k] = (cell.coords[k] + (cell.coords[k] & 1)) / 2;
        }
        for(int z = lo[2]; z <= hi[2]; ++z)
            for(int y = lo[1]; y <= hi[1]; ++y)
                for(int x = lo[0]; x <= hi[0]; ++x)
                    f(Coords {x, y, z});
    }

    std::vector<Cell> cofacets(const Cell& cell, const Shape& shape);
    std::vector<Cell> facets(const Cell& cell);

} // namespace pcoh
