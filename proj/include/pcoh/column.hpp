#pragma once

#include <optional>
#include <vector>

#include "pcoh/cell_key.hpp"

namespace pcoh {

    // Entries of a Z/2Z column, strictly sorted in matrix order (earliest row first).
    using Entries = std::vector<CellKey>;

    struct Column {
        CellKey owner;
        Entries entries;

        bool is_zero() const { return entries.empty(); }
        std::optional<CellKey> low() const;
    };

    // last entry in matrix order; nullopt for the zero column
    inline std::optional<CellKey> low(const Entries& entries)
    {
        if (entries.empty())
            return std::nullopt;
        return entries.back();
    }

    inline std::optional<CellKey> Column::low() const { return pcoh::low(entries); }

    bool is_strictly_sorted(const Entries& entries);

    // Symmetric difference of two sorted entry lists, written into out.
    void symmetric_difference(const Entries& a, const Entries& b, Entries& out);

    // target += source over Z/2Z; scratch is reused storage to avoid reallocation
    void add_to(Entries& target, const Entries& source, Entries& scratch);

    // a + b, owner taken from a
    Column add_columns(const Column& a, const Column& b);

} // namespace pcoh
