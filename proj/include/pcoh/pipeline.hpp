#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "pcoh/diagram.hpp"
#include "pcoh/filtration.hpp"
#include "pcoh/runtime.hpp"

namespace pcoh {

    struct PipelineConfig {
        Coords blocks {1, 1, 1};      // one block per rank
        int max_dim {3};
        bool clearing {true};
        bool sparsify {true};
        std::uint64_t seed {0};
        int oversample {32};
        TransportKind transport {TransportKind::InProcess};
        std::chrono::milliseconds timeout {std::chrono::minutes(10)};
        bool keep_columns {false};    // return the gathered final columns as well

        int n_ranks() const { return blocks[0] * blocks[1] * blocks[2]; }
    };

    // seconds spent by one rank in each phase
    struct PhaseTimes {
        double setup {0};             // building the block matrices
        double local_reduce {0};
        double sparsify {0};
        double redistribution {0};    // splitters, exchange, merge and chunk reduction
        double global_loop {0};

        double reduction() const { return local_reduce + sparsify + redistribution + global_loop; }
    };

    struct RankStats {
        std::size_t interior_columns {0};      // nonzero interior columns after local reduction
        std::size_t final_columns {0};         // nonzero columns held after the global loop
        std::size_t columns_sent {0};          // redistribution plus global loop
        std::size_t non_ultrasparse {0};
        std::size_t routing_violations {0};
        std::size_t cleared_local {0};
        std::size_t cleared_redistribution {0};
        std::size_t cleared_global {0};
        std::size_t pivot_swaps {0};
        PhaseTimes times;
    };

    struct RunStats {
        int n_ranks {1};
        Coords blocks {1, 1, 1};
        std::vector<int> rounds;               // per dimension
        std::vector<RankStats> ranks;
        std::size_t finite_pairs {0};
        std::size_t diagonal_pairs {0};
        std::size_t essential_pairs {0};

        std::size_t total_final_columns() const;
        // max over mean of the final column counts
        double imbalance() const;
        // slowest rank per phase, summed over the reduction phases
        double reduction_seconds() const;
        PhaseTimes max_times() const;
    };

    struct PipelineResult {
        Diagram diagram;
        RunStats stats;
        std::vector<FinalColumn> columns;      // only with keep_columns
    };

    // Runs the full distributed computation on cfg.n_ranks() ranks.
    PipelineResult run_pipeline(const Grid& grid, const PipelineConfig& cfg);

    // Near-cubic factorization of p into blocks per axis that fit the grid.
    Coords auto_blocks(int p, const Coords& dims);

} // namespace pcoh
