#include "pcoh/global_reduce.hpp"

#include <optional>
#include <string>

#include "pcoh/errors.hpp"

namespace pcoh {

    namespace {

        void unregister(PivotTable& pivots, const CellKey& owner, const Entries& col)
        {
            if (col.empty())
                return;
            auto iter = pivots.find(col.back());
            if (iter != pivots.end() and iter->second == owner)
                pivots.erase(iter);
        }

    } // namespace

    std::vector<std::vector<Message>> send_columns(GlobalState& st, GlobalStats* stats)
    {
        int n = st.splitters.n_ranks();
        std::vector<std::vector<Message>> outbox(n);
        ColumnStore& store = st.chunk.columns[st.dim];
        PivotTable& pivots = st.chunk.pivots[st.dim];

        auto ship = [&](ColumnStore::iterator iter) {
            int dest = rank_by_value(iter->second.back(), st.splitters);
            if (stats) {
                ++stats->columns_sent;
                if (st.round > 1 and dest > st.rank)
                    ++stats->routing_violations;
            }
            unregister(pivots, iter->first, iter->second);
            outbox[dest].push_back(Message::column(std::uint32_t(st.rank), std::uint32_t(dest), iter->first, std::move(iter->second)));
            return store.erase(iter);
        };

        if (st.round == 1) {
            for(auto iter = store.begin(); iter != store.end();) {
                if (not iter->second.empty() and not st.owns(iter->second.back()))
                    iter = ship(iter);
                else
                    ++iter;
            }
        } else {
            for(const CellKey& owner: st.updated) {
                auto iter = store.find(owner);
                if (iter == store.end() or iter->second.empty())
                    throw InternalError("updated owner uid " + std::to_string(owner.uid) + " has no column");
                if (st.owns(iter->second.back()))
                    throw InternalError("updated owner uid " + std::to_string(owner.uid) + " has a local low");
                ship(iter);
            }
        }
        st.updated.clear();
        return outbox;
    }

    OwnerSet receive_columns(GlobalState& st, std::vector<Column> incoming, GlobalStats* stats)
    {
        ColumnStore& store = st.chunk.columns[st.dim];
        PivotTable& pivots = st.chunk.pivots[st.dim];
        st.updated.clear();
        if (incoming.empty())
            return st.updated;

        std::optional<CellKey> first;
        for(Column& c: incoming) {
            if (c.entries.empty())
                throw ProtocolError("received a zero column for owner uid " + std::to_string(c.owner.uid));
            if (not first or precedes(c.owner, *first))
                first = c.owner;
            if (not store.emplace(c.owner, std::move(c.entries)).second)
                throw ProtocolError("received a column for owner uid " + std::to_string(c.owner.uid) + " that is already stored");
        }

        Entries scratch;
        for(auto cursor = store.find(*first); cursor != store.end();) {
            CellKey sigma = cursor->first;
            ++cursor;      // sigma's node stays put; columns are only erased once finished

            while(true) {
                auto iter = store.find(sigma);
                Entries& col = iter->second;
                if (col.empty()) {
                    if (cursor != store.end() and cursor == iter)
                        ++cursor;
                    store.erase(iter);
                    break;
                }
                CellKey l = col.back();
                if (not st.owns(l)) {
                    st.updated.insert(sigma);
                    break;
                }
                auto piv = pivots.find(l);
                if (piv == pivots.end()) {
                    pivots.emplace(l, sigma);
                    break;
                }
                CellKey p = piv->second;
                if (p == sigma)
                    break;
                if (stats)
                    ++stats->additions;
                if (precedes(p, sigma)) {
                    add_to(col, store.at(p), scratch);
                } else {
                    // pivot to the right: sigma takes over the row, the old pivot column is reduced instead
                    piv->second = sigma;
                    add_to(store.at(p), col, scratch);
                    if (stats)
                        ++stats->pivot_swaps;
                    sigma = p;
                }
            }
        }

        // a column marked early may have been reduced further or erased later in the sweep
        for(auto iter = st.updated.begin(); iter != st.updated.end();) {
            auto col = store.find(*iter);
            if (col == store.end() or col->second.empty() or st.owns(col->second.back()))
                iter = st.updated.erase(iter);
            else
                ++iter;
        }
        return st.updated;
    }

    std::vector<std::vector<Message>> clear_columns(GlobalState& st, int n_ranks, GlobalStats* stats)
    {
        std::vector<std::vector<Message>> outbox(n_ranks);
        if (st.dim + 1 > max_cell_dim)
            return outbox;

        ColumnStore& next = st.chunk.columns[st.dim + 1];
        PivotTable& next_pivots = st.chunk.pivots[st.dim + 1];
        for(const auto& [owner, col]: st.chunk.columns[st.dim]) {
            if (col.empty())
                continue;
            const CellKey& positive = col.back();
            int dest = rank_by_value(positive, st.splitters);
            if (dest == st.rank) {
                auto iter = next.find(positive);
                if (iter != next.end()) {
                    unregister(next_pivots, iter->first, iter->second);
                    next.erase(iter);
                    if (stats)
                        ++stats->cleared;
                }
            } else {
                outbox[dest].push_back(Message::clear(std::uint32_t(st.rank), std::uint32_t(dest), positive));
                if (stats)
                    ++stats->clear_requests;
            }
        }
        return outbox;
    }

    void apply_clear_requests(GlobalState& st, const std::vector<Message>& requests, GlobalStats* stats)
    {
        if (st.dim + 1 > max_cell_dim)
            return;
        ColumnStore& next = st.chunk.columns[st.dim + 1];
        PivotTable& next_pivots = st.chunk.pivots[st.dim + 1];
        for(const Message& msg: requests) {
            if (msg.kind != MessageKind::ClearRequest)
                throw ProtocolError("expected a clear request");
            if (not st.owns(msg.owner))
                throw ProtocolError("clear request for owner uid " + std::to_string(msg.owner.uid) + " sent to the wrong rank");
            // an absent column was already zero here
            auto iter = next.find(msg.owner);
            if (iter == next.end())
                continue;
            unregister(next_pivots, iter->first, iter->second);
            next.erase(iter);
            if (stats)
                ++stats->cleared;
        }
    }

    GlobalStats run_global_loop(GlobalState& st, Transport& t, int max_dim, bool use_clearing)
    {
        GlobalStats stats;
        for(st.dim = 0; st.dim < max_dim; ++st.dim) {
            std::int64_t n_columns = t.all_reduce_sum(std::int64_t(st.chunk.columns[st.dim].size()));
            std::int64_t guard = std::max<std::int64_t>(1, std::int64_t(t.size()) * n_columns);

            st.updated.clear();
            for(st.round = 1;; ++st.round) {
                if (st.round > guard)
                    throw InternalError("global reduction of dimension " + std::to_string(st.dim) + " did not settle after "
                                        + std::to_string(guard) + " rounds");
                auto outbox = send_columns(st, &stats);
                std::vector<Column> incoming;
                for(Message& msg: t.exchange(outbox, "columns")) {
                    if (msg.kind != MessageKind::ColumnPayload)
                        throw ProtocolError("expected a column payload");
                    if (st.shape.cell_dim(msg.owner.uid) != st.dim)
                        throw ProtocolError("column of the wrong dimension in round " + std::to_string(st.round));
                    incoming.push_back({msg.owner, std::move(msg.entries)});
                }
                receive_columns(st, std::move(incoming), &stats);
                if (t.all_reduce_sum(std::int64_t(st.updated.size())) == 0)
                    break;
            }
            stats.rounds.push_back(st.round);

            if (use_clearing) {
                auto outbox = clear_columns(st, t.size(), &stats);
                apply_clear_requests(st, t.exchange(outbox, "clear"), &stats);
            }
        }
        return stats;
    }

} // namespace pcoh
