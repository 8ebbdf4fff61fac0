#include "pcoh/column.hpp"

#include <algorithm>

namespace pcoh {

    bool is_strictly_sorted(const Entries& entries)
    {
        return std::adjacent_find(entries.begin(), entries.end(),
                                  [](const CellKey& a, const CellKey& b) { return not precedes(a, b); }) == entries.end();
    }

    void symmetric_difference(const Entries& a, const Entries& b, Entries& out)
    {
        out.clear();
        out.reserve(a.size() + b.size());
        std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out), MatrixOrder());
    }

    void add_to(Entries& target, const Entries& source, Entries& scratch)
    {
        symmetric_difference(target, source, scratch);
        target.swap(scratch);
    }

    Column add_columns(const Column& a, const Column& b)
    {
        Column result {a.owner, {}};
        symmetric_difference(a.entries, b.entries, result.entries);
        return result;
    }

} // namespace pcoh
