#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "pcoh/wire.hpp"

namespace pcoh {

    enum class TransportKind { InProcess, Process };

    // Bulk-synchronous message passing between a fixed set of ranks.
    // Every collective must be called by all ranks in the same order.
    class Transport {
    public:
        virtual ~Transport() = default;

        virtual int rank() const = 0;
        virtual int size() const = 0;

        // Rank r receives outgoing[r] of every rank, indexed by source.
        // The tag names the collective; ranks calling different collectives is a protocol error.
        virtual std::vector<Bytes> alltoall(std::vector<Bytes> outgoing, std::string_view tag) = 0;

        // outbox[d] holds the messages for rank d; the inbox is grouped by source
        // rank ascending, each source's messages in send order.
        std::vector<Message> exchange(const std::vector<std::vector<Message>>& outbox, std::string_view tag = "exchange");

        std::int64_t all_reduce_sum(std::int64_t local);
        std::vector<Bytes> all_gather(const Bytes& local);

        // result indexed by source on the root, empty elsewhere
        std::vector<Bytes> gather(const Bytes& local, int root = 0);

        void barrier();
    };

    struct RunOptions {
        TransportKind transport {TransportKind::InProcess};
        // a rank stuck in one collective longer than this aborts the run
        std::chrono::milliseconds timeout {std::chrono::minutes(10)};
    };

    using RankProgram = std::function<Bytes(Transport&)>;

    // Runs the program on n ranks and returns each rank's result, indexed by rank.
    // If any rank throws, the run is aborted and the first failure is rethrown on the
    // caller as ConfigError, InternalError or ProtocolError (anything else becomes
    // std::runtime_error), its message prefixed with the failing rank.
    std::vector<Bytes> run_ranks(int n, const RankProgram& program, const RunOptions& options = {});

} // namespace pcoh
