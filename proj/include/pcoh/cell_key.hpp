#pragma once

#include <cstdint>
#include <functional>
#include <ostream>

namespace pcoh {

    using Uid = std::uint64_t;

    // Identity of a cell: its filtration value, ties broken by uid.
    // Filtration order is lexicographic (value, uid) ascending.
    struct CellKey {
        double value {0};
        Uid uid {0};

        friend bool operator==(const CellKey&, const CellKey&) = default;
    };

    inline bool filtration_less(const CellKey& a, const CellKey& b)
    {
        return a.value < b.value or (a.value == b.value and a.uid < b.uid);
    }

    // Rows and columns of the coboundary matrix are listed in reverse filtration order:
    // a precedes b in the matrix iff (a.value, a.uid) > (b.value, b.uid).
    struct MatrixOrder {
        bool operator()(const CellKey& a, const CellKey& b) const { return filtration_less(b, a); }
    };

    inline bool precedes(const CellKey& a, const CellKey& b) { return filtration_less(b, a); }

    enum class Ordering { precedes, equals, follows };

    inline Ordering compare_matrix_order(const CellKey& a, const CellKey& b)
    {
        if (precedes(a, b))
            return Ordering::precedes;
        if (precedes(b, a))
            return Ordering::follows;
        return Ordering::equals;
    }

    struct CellKeyHash {
        std::size_t operator()(const CellKey& k) const noexcept
        {
            // uid alone identifies the cell
            return std::hash<Uid>{}(k.uid);
        }
    };

    inline std::ostream& operator<<(std::ostream& out, const CellKey& k)
    {
        return out << "(" << k.value << ", " << k.uid << ")";
    }

} // namespace pcoh
