#include "pcoh/diagram.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "pcoh/errors.hpp"

namespace pcoh {

    void Diagram::canonicalize()
    {
        std::sort(pairs.begin(), pairs.end(), [](const PersistencePair& a, const PersistencePair& b) {
            return std::tie(a.dim, a.birth, a.death, a.birth_cell) < std::tie(b.dim, b.birth, b.death, b.birth_cell);
        });
    }

    std::size_t Diagram::count(int dim) const
    {
        return std::size_t(std::count_if(pairs.begin(), pairs.end(), [&](const PersistencePair& p) { return p.dim == dim; }));
    }

    std::vector<FinalColumn> final_columns(const ReducedChunk& chunk)
    {
        std::vector<FinalColumn> result;
        for(const auto& store: chunk.columns)
            for(const auto& [owner, col]: store)
                if (not col.empty())
                    result.push_back({owner, col.back()});
        return result;
    }

    Diagram extract_pairs(std::span<const FinalColumn> columns, const Grid& grid, int max_dim, ExtractionStats* stats_out)
    {
        const Shape& shape = grid.shape();
        ExtractionStats stats;
        Diagram diagram;

        std::unordered_set<Uid> owners, lows;
        owners.reserve(columns.size());
        lows.reserve(columns.size());
        for(const FinalColumn& c: columns) {
            if (not owners.insert(c.owner.uid).second)
                throw InternalError("cell uid " + std::to_string(c.owner.uid) + " owns two columns");
            if (not lows.insert(c.low.uid).second)
                throw InternalError("two columns share the low uid " + std::to_string(c.low.uid));
        }

        for(const FinalColumn& c: columns) {
            if (owners.contains(c.low.uid))
                throw InternalError("low uid " + std::to_string(c.low.uid) + " is positive but owns a nonzero column");
            if (lows.contains(c.owner.uid))
                throw InternalError("cell uid " + std::to_string(c.owner.uid) + " is both an owner and a low");
            int dim = shape.cell_dim(c.owner.uid);
            if (shape.cell_dim(c.low.uid) != dim + 1)
                throw InternalError("column of uid " + std::to_string(c.owner.uid) + " has a low of the wrong dimension");
            if (c.owner.value == c.low.value) {
                ++stats.diagonal;
                continue;
            }
            diagram.pairs.push_back({dim, c.owner.value, c.low.value, c.owner.uid, c.low.uid});
            ++stats.finite;
        }

        for(const auto& [cell, key]: enumerate_cells(grid, max_dim)) {
            if (owners.contains(key.uid) or lows.contains(key.uid))
                continue;
            diagram.pairs.push_back({cell.dim(), key.value, infinity, key.uid, std::nullopt});
            ++stats.essential;
        }

        diagram.canonicalize();
        if (stats_out)
            *stats_out = stats;
        return diagram;
    }

    Diagram oracle_cohomology_diagram(const Grid& grid, int max_dim)
    {
        ReducedChunk chunk;
        for(const auto& [cell, key]: enumerate_cells(grid, max_dim)) {
            if (cell.dim() >= max_dim)
                continue;
            Entries col;
            for(const Cell& tau: cofacets(cell, grid.shape()))
                col.push_back(cell_key(tau, grid));
            std::sort(col.begin(), col.end(), MatrixOrder());
            if (not col.empty())
                chunk.columns[cell.dim()].emplace(key, std::move(col));
        }
        reduce_chunk(chunk, true);
        auto columns = final_columns(chunk);
        return extract_pairs(columns, grid, max_dim);
    }

    Diagram oracle_homology_diagram(const Grid& grid, int max_dim)
    {
        const Shape& shape = grid.shape();

        // every face strictly before its cofaces: value, then dimension, then uid
        struct Item {
            Cell cell;
            double value;
            int dim;
            Uid uid;
        };
        std::vector<Item> items;
        Cell c;
        for(c.coords[2] = 0; c.coords[2] < shape.doubled(2); ++c.coords[2])
            for(c.coords[1] = 0; c.coords[1] < shape.doubled(1); ++c.coords[1])
                for(c.coords[0] = 0; c.coords[0] < shape.doubled(0); ++c.coords[0])
                    if (c.dim() <= max_dim)
                        items.push_back({c, lower_star_value(c, grid), c.dim(), shape.uid(c)});
        std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
            return std::tie(a.value, a.dim, a.uid) < std::tie(b.value, b.dim, b.uid);
        });

        std::unordered_map<Uid, int> index;
        for(int i = 0; i < int(items.size()); ++i)
            index[items[i].uid] = i;

        // columns as sorted index lists; low is the largest index
        std::vector<std::vector<int>> boundary(items.size());
        for(int j = 0; j < int(items.size()); ++j) {
            for(const Cell& f: facets(items[j].cell))
                boundary[j].push_back(index.at(shape.uid(f)));
            std::sort(boundary[j].begin(), boundary[j].end());
        }

        std::vector<int> pivot_of_row(items.size(), -1);
        std::vector<bool> paired(items.size(), false);
        Diagram diagram;
        std::vector<int> sum;
        for(int j = 0; j < int(items.size()); ++j) {
            auto& col = boundary[j];
            while(not col.empty() and pivot_of_row[col.back()] >= 0) {
                const auto& other = boundary[pivot_of_row[col.back()]];
                sum.clear();
                std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(), std::back_inserter(sum));
                col.swap(sum);
            }
            if (col.empty())
                continue;
            int i = col.back();
            pivot_of_row[i] = j;
            paired[i] = paired[j] = true;
            if (items[i].value != items[j].value)
                diagram.pairs.push_back({items[i].dim, items[i].value, items[j].value, items[i].uid, items[j].uid});
        }

        for(int i = 0; i < int(items.size()); ++i)
            if (not paired[i])
                diagram.pairs.push_back({items[i].dim, items[i].value, infinity, items[i].uid, std::nullopt});

        diagram.canonicalize();
        return diagram;
    }

    std::string format_pair(const PersistencePair& p)
    {
        std::ostringstream out;
        out << "dim " << p.dim << " (" << p.birth << ", " << p.death << ")";
        return out.str();
    }

    DiagramComparison diagrams_equal(const Diagram& a, const Diagram& b)
    {
        using Point = std::tuple<int, double, double>;
        auto points = [](const Diagram& d) {
            std::vector<Point> result;
            for(const auto& p: d.pairs)
                result.emplace_back(p.dim, p.birth, p.death);
            std::sort(result.begin(), result.end());
            return result;
        };
        auto pa = points(a), pb = points(b);

        DiagramComparison cmp;
        std::size_t i = 0;
        while(i < pa.size() and i < pb.size() and pa[i] == pb[i])
            ++i;
        if (i == pa.size() and i == pb.size())
            return cmp;

        auto show = [](const Point& p) {
            std::ostringstream out;
            out << "dim " << std::get<0>(p) << " (" << std::get<1>(p) << ", " << std::get<2>(p) << ")";
            return out.str();
        };
        cmp.equal = false;
        if (i == pa.size())
            cmp.difference = "second diagram has extra point " + show(pb[i]);
        else if (i == pb.size())
            cmp.difference = "first diagram has extra point " + show(pa[i]);
        else if (pa[i] < pb[i])
            cmp.difference = "point " + show(pa[i]) + " only in first diagram (or with higher multiplicity)";
        else
            cmp.difference = "point " + show(pb[i]) + " only in second diagram (or with higher multiplicity)";
        cmp.difference += "; sizes " + std::to_string(pa.size()) + " vs " + std::to_string(pb.size());
        return cmp;
    }

} // namespace pcoh
