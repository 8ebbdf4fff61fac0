#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcoh/filtration.hpp"
#include "pcoh/reduction.hpp"

namespace pcoh {

    constexpr double infinity = std::numeric_limits<double>::infinity();

    struct PersistencePair {
        int dim {0};
        double birth {0};
        double death {infinity};
        Uid birth_cell {0};
        std::optional<Uid> death_cell;      // absent for essential classes

        bool essential() const { return not death_cell; }
    };

    struct Diagram {
        std::vector<PersistencePair> pairs;

        // sort by (dim, birth, death, birth cell)
        void canonicalize();
        std::size_t size() const { return pairs.size(); }
        std::size_t count(int dim) const;
    };

    // nonzero column of the reduced coboundary matrix, reduced to what extraction needs
    struct FinalColumn {
        CellKey owner;
        CellKey low;
    };

    struct ExtractionStats {
        std::size_t finite {0};
        std::size_t diagonal {0};      // pairs with equal birth and death, left out of the diagram
        std::size_t essential {0};
    };

    // Finite pairs from the columns, essential classes from every cell of dimension
    // <= max_dim that neither owns a column nor is a low. Throws InternalError if two
    // columns share a low, a low owns a column, or a cell shows up in two pairs.
    Diagram extract_pairs(std::span<const FinalColumn> columns, const Grid& grid, int max_dim, ExtractionStats* stats = nullptr);

    std::vector<FinalColumn> final_columns(const ReducedChunk& chunk);

    // sequential coboundary reduction of the whole complex with clearing
    Diagram oracle_cohomology_diagram(const Grid& grid, int max_dim = 3);

    // sequential boundary reduction of the whole complex, written without the column store
    Diagram oracle_homology_diagram(const Grid& grid, int max_dim = 3);

    struct DiagramComparison {
        bool equal {true};
        std::string difference;      // first mismatch, empty when equal

        explicit operator bool() const { return equal; }
    };

    // multiset equality of (dim, birth, death), values compared exactly
    DiagramComparison diagrams_equal(const Diagram& a, const Diagram& b);

    std::string format_pair(const PersistencePair& p);

} // namespace pcoh
