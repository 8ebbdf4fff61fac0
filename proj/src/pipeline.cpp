#include "pcoh/pipeline.hpp"

#include <algorithm>
#include <string>

#include "pcoh/errors.hpp"
#include "pcoh/global_reduce.hpp"

namespace pcoh {

    std::size_t RunStats::total_final_columns() const
    {
        std::size_t total = 0;
        for(const RankStats& r: ranks)
            total += r.final_columns;
        return total;
    }

    double RunStats::imbalance() const
    {
        if (ranks.empty())
            return 0;
        std::size_t max = 0;
        for(const RankStats& r: ranks)
            max = std::max(max, r.final_columns);
        double mean = double(total_final_columns()) / double(ranks.size());
        return mean > 0 ? double(max) / mean : 1.0;
    }

    PhaseTimes RunStats::max_times() const
    {
        PhaseTimes m;
        for(const RankStats& r: ranks) {
            m.setup = std::max(m.setup, r.times.setup);
            m.local_reduce = std::max(m.local_reduce, r.times.local_reduce);
            m.sparsify = std::max(m.sparsify, r.times.sparsify);
            m.redistribution = std::max(m.redistribution, r.times.redistribution);
            m.global_loop = std::max(m.global_loop, r.times.global_loop);
        }
        return m;
    }

    double RunStats::reduction_seconds() const { return max_times().reduction(); }

    Coords auto_blocks(int p, const Coords& dims)
    {
        if (p < 1)
            throw ConfigError("number of ranks must be at least 1, got " + std::to_string(p));
        std::optional<Coords> best;
        double best_extent = 0;
        for(int bx = 1; bx <= p; ++bx) {
            if (p % bx)
                continue;
            for(int by = 1; by <= p / bx; ++by) {
                if ((p / bx) % by)
                    continue;
                Coords b {bx, by, p / bx / by};
                bool fits = true;
                double extent = 0;
                for(int k = 0; k < 3; ++k) {
                    fits = fits and b[k] <= dims[k];
                    extent = std::max(extent, double(dims[k] - 1) / b[k]);
                }
                if (fits and (not best or extent < best_extent)) {
                    best = b;
                    best_extent = extent;
                }
            }
        }
        if (not best)
            throw ConfigError("cannot split a " + std::to_string(dims[0]) + "x" + std::to_string(dims[1]) + "x" + std::to_string(dims[2])
                              + " grid into " + std::to_string(p) + " blocks");
        return *best;
    }

    namespace {

        using Clock = std::chrono::steady_clock;

        double seconds_since(Clock::time_point& start)
        {
            auto now = Clock::now();
            double s = std::chrono::duration<double>(now - start).count();
            start = now;
            return s;
        }

        void write_rank_stats(ByteWriter& w, const RankStats& s)
        {
            for(std::size_t x: {s.interior_columns, s.final_columns, s.columns_sent, s.non_ultrasparse, s.routing_violations,
                                s.cleared_local, s.cleared_redistribution, s.cleared_global, s.pivot_swaps})
                w.u64(x);
            for(double x: {s.times.setup, s.times.local_reduce, s.times.sparsify, s.times.redistribution, s.times.global_loop})
                w.f64(x);
        }

        RankStats read_rank_stats(ByteReader& r)
        {
            RankStats s;
            for(std::size_t* x: {&s.interior_columns, &s.final_columns, &s.columns_sent, &s.non_ultrasparse, &s.routing_violations,
                                 &s.cleared_local, &s.cleared_redistribution, &s.cleared_global, &s.pivot_swaps})
                *x = r.u64();
            for(double* x: {&s.times.setup, &s.times.local_reduce, &s.times.sparsify, &s.times.redistribution, &s.times.global_loop})
                *x = r.f64();
            return s;
        }

        void write_result(ByteWriter& w, const PipelineResult& res)
        {
            const RunStats& s = res.stats;
            w.u32(std::uint32_t(s.n_ranks));
            for(int b: s.blocks)
                w.u32(std::uint32_t(b));
            w.u64(s.rounds.size());
            for(int x: s.rounds)
                w.u32(std::uint32_t(x));
            w.u64(s.ranks.size());
            for(const RankStats& r: s.ranks)
                write_rank_stats(w, r);
            w.u64(s.finite_pairs);
            w.u64(s.diagonal_pairs);
            w.u64(s.essential_pairs);

            w.u64(res.diagram.pairs.size());
            for(const PersistencePair& p: res.diagram.pairs) {
                w.u8(std::uint8_t(p.dim));
                w.f64(p.birth);
                w.f64(p.death);
                w.u64(p.birth_cell);
                w.u8(p.death_cell.has_value());
                w.u64(p.death_cell.value_or(0));
            }

            w.u64(res.columns.size());
            for(const FinalColumn& c: res.columns) {
                w.key(c.owner);
                w.key(c.low);
            }
        }

        PipelineResult read_result(ByteReader& r)
        {
            PipelineResult res;
            RunStats& s = res.stats;
            s.n_ranks = int(r.u32());
            for(int& b: s.blocks)
                b = int(r.u32());
            s.rounds.resize(r.u64());
            for(int& x: s.rounds)
                x = int(r.u32());
            s.ranks.resize(r.u64());
            for(RankStats& rs: s.ranks)
                rs = read_rank_stats(r);
            s.finite_pairs = r.u64();
            s.diagonal_pairs = r.u64();
            s.essential_pairs = r.u64();

            res.diagram.pairs.resize(r.u64());
            for(PersistencePair& p: res.diagram.pairs) {
                p.dim = r.u8();
                p.birth = r.f64();
                p.death = r.f64();
                p.birth_cell = r.u64();
                bool has_death = r.u8();
                Uid death = r.u64();
                if (has_death)
                    p.death_cell = death;
            }

            res.columns.resize(r.u64());
            for(FinalColumn& c: res.columns) {
                c.owner = r.key();
                c.low = r.key();
            }
            return res;
        }

        Bytes rank_main(Transport& t, const Grid& grid, const Cover& cover, const PipelineConfig& cfg)
        {
            RankStats rs;
            auto clock = Clock::now();

            const Block& block = cover.blocks().at(t.rank());
            BlockMatrices bm = build_local_matrices(block, cover, grid, cfg.max_dim);
            rs.times.setup = seconds_since(clock);

            rs.cleared_local = reduce_local(bm, cfg.clearing).cleared;
            rs.interior_columns = bm.interior.n_columns();
            rs.times.local_reduce = seconds_since(clock);

            if (cfg.sparsify)
                rs.non_ultrasparse = sparsify(bm).non_ultrasparse;
            rs.times.sparsify = seconds_since(clock);

            auto owners = outgoing_owners(bm, cover);
            Splitters splitters = compute_splitters(t, owners, cfg.oversample, cfg.seed);
            RedistributionStats redist;
            GlobalState st;
            st.rank = t.rank();
            st.shape = grid.shape();
            st.splitters = splitters;
            st.chunk = redistribute_columns(std::move(bm), cover, splitters, t, cfg.clearing, &redist);
            rs.cleared_redistribution = redist.reduction.cleared;
            rs.times.redistribution = seconds_since(clock);

            GlobalStats gs = run_global_loop(st, t, cfg.max_dim, cfg.clearing);
            rs.times.global_loop = seconds_since(clock);

            rs.columns_sent = redist.columns_sent + gs.columns_sent;
            rs.routing_violations = gs.routing_violations;
            rs.cleared_global = gs.cleared;
            rs.pivot_swaps = gs.pivot_swaps;
            auto columns = final_columns(st.chunk);
            rs.final_columns = columns.size();

            Bytes report;
            ByteWriter w(report);
            write_rank_stats(w, rs);
            w.u64(gs.rounds.size());
            for(int x: gs.rounds)
                w.u32(std::uint32_t(x));
            w.u64(columns.size());
            for(const FinalColumn& c: columns) {
                w.key(c.owner);
                w.key(c.low);
            }

            auto gathered = t.gather(report, 0);
            if (t.rank() != 0)
                return {};

            PipelineResult res;
            res.stats.n_ranks = t.size();
            res.stats.blocks = cfg.blocks;
            std::vector<FinalColumn> all;
            for(int r = 0; r < t.size(); ++r) {
                ByteReader rd(gathered[r]);
                res.stats.ranks.push_back(read_rank_stats(rd));
                std::vector<int> rounds(rd.u64());
                for(int& x: rounds)
                    x = int(rd.u32());
                if (r == 0)
                    res.stats.rounds = rounds;
                else if (rounds != res.stats.rounds)
                    throw InternalError("ranks disagree on the number of rounds");
                std::size_t n = rd.u64();
                for(std::size_t i = 0; i < n; ++i) {
                    FinalColumn c;
                    c.owner = rd.key();
                    c.low = rd.key();
                    all.push_back(c);
                }
            }

            ExtractionStats es;
            res.diagram = extract_pairs(all, grid, cfg.max_dim, &es);
            res.stats.finite_pairs = es.finite;
            res.stats.diagonal_pairs = es.diagonal;
            res.stats.essential_pairs = es.essential;
            if (cfg.keep_columns)
                res.columns = std::move(all);

            Bytes out;
            ByteWriter ow(out);
            write_result(ow, res);
            return out;
        }

    } // namespace

    PipelineResult run_pipeline(const Grid& grid, const PipelineConfig& cfg)
    {
        if (cfg.max_dim < 0 or cfg.max_dim > max_cell_dim)
            throw ConfigError("max_dim must be in [0, 3], got " + std::to_string(cfg.max_dim));
        if (cfg.oversample < 1)
            throw ConfigError("oversample must be positive");
        Cover cover(grid.shape(), cfg.blocks);

        RunOptions options;
        options.transport = cfg.transport;
        options.timeout = cfg.timeout;
        auto results = run_ranks(cover.n_blocks(), [&](Transport& t) { return rank_main(t, grid, cover, cfg); }, options);

        ByteReader r(results.at(0));
        PipelineResult res = read_result(r);
        if (not r.done())
            throw ProtocolError("trailing bytes in the pipeline result");
        return res;
    }

} // namespace pcoh
