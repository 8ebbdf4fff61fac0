#pragma once

#include <set>
#include <vector>

#include "pcoh/redistribution.hpp"

namespace pcoh {

    using OwnerSet = std::set<CellKey, MatrixOrder>;

    struct GlobalState {
        int rank {0};
        Shape shape;
        ReducedChunk chunk;
        Splitters splitters;
        int dim {0};
        int round {1};
        OwnerSet updated;      // owners of columns whose low left this rank's segment

        bool owns(const CellKey& k) const { return rank_by_value(k, splitters) == rank; }
    };

    struct GlobalStats {
        std::vector<int> rounds;                 // per dimension
        std::size_t columns_sent {0};            // cross-rank column messages
        std::size_t routing_violations {0};      // messages after round 1 going to a higher rank
        std::size_t additions {0};
        std::size_t pivot_swaps {0};
        std::size_t clear_requests {0};          // clear messages sent to other ranks
        std::size_t cleared {0};                 // columns erased on this rank by global clearing
    };

    // Columns of dimension st.dim leaving this rank this round, removed from the store.
    // Round 1 moves every column whose low lies in another segment; later rounds
    // move the owners in st.updated, which is then emptied.
    std::vector<std::vector<Message>> send_columns(GlobalState& st, GlobalStats* stats = nullptr);

    // Inserts the incoming columns and reduces from the earliest incoming owner to the
    // end of the store. Returns (and keeps in st.updated) the owners of finished columns
    // whose low belongs to another rank.
    OwnerSet receive_columns(GlobalState& st, std::vector<Column> incoming, GlobalStats* stats = nullptr);

    // For every column of dimension st.dim, the column owned by its low is positive and
    // gets erased: locally if this rank holds it, otherwise through a clear request.
    std::vector<std::vector<Message>> clear_columns(GlobalState& st, int n_ranks, GlobalStats* stats = nullptr);

    void apply_clear_requests(GlobalState& st, const std::vector<Message>& requests, GlobalStats* stats = nullptr);

    // Collective. Reduces dimensions 0 .. max_dim - 1 in turn until no column is in flight.
    GlobalStats run_global_loop(GlobalState& st, Transport& t, int max_dim, bool use_clearing);

} // namespace pcoh
