#include <doctest.h>

#include <map>
#include <random>
#include <thread>

#include "pcoh/errors.hpp"
#include "pcoh/runtime.hpp"
#include "support.hpp"

using namespace pcoh;

namespace {

    const TransportKind both[] = {TransportKind::InProcess, TransportKind::Process};

    const char* name(TransportKind k) { return k == TransportKind::InProcess ? "inproc" : "proc"; }

    RunOptions with(TransportKind k, std::chrono::milliseconds timeout = std::chrono::seconds(20))
    {
        RunOptions o;
        o.transport = k;
        o.timeout = timeout;
        return o;
    }

    Bytes encode(const std::vector<Message>& msgs)
    {
        Bytes out;
        for(const auto& m: msgs)
            encode_frame(m, out);
        return out;
    }

} // namespace

TEST_SUITE("runtime") {

TEST_CASE("frame layout is little-endian and round-trips")
{
    Message m = Message::column(1, 2, {0.5, 7}, {{3.0, 258}});
    Bytes b;
    encode_frame(m, b);
    REQUIRE(b.size() == 1 + 4 + 4 + 8 + 8 + 8 + 16);
    CHECK(b[0] == std::byte {0});
    CHECK(b[1] == std::byte {1});
    CHECK(b[5] == std::byte {2});
    CHECK(b[9] == std::byte {7});
    // 0.5 = 0x3fe0000000000000
    CHECK(b[17 + 7] == std::byte {0x3f});
    CHECK(b[17 + 6] == std::byte {0xe0});
    CHECK(b[25] == std::byte {1});
    // entry uid 258 = 0x0102
    CHECK(b[41] == std::byte {2});
    CHECK(b[42] == std::byte {1});

    auto back = decode_frames(b);
    REQUIRE(back.size() == 1);
    CHECK(back[0].kind == MessageKind::ColumnPayload);
    CHECK(back[0].source == 1);
    CHECK(back[0].destination == 2);
    CHECK(back[0].owner == CellKey {0.5, 7});
    CHECK(back[0].entries == Entries {{3.0, 258}});

    Message c = Message::clear(3, 0, {2, 9});
    auto both_frames = decode_frames(encode({m, c}));
    REQUIRE(both_frames.size() == 2);
    CHECK(both_frames[1].kind == MessageKind::ClearRequest);
    CHECK(both_frames[1].owner == CellKey {2, 9});
}

TEST_CASE("malformed frames are protocol errors")
{
    Bytes b = encode({Message::column(0, 1, {1, 1}, {{2, 2}, {1, 3}})});
    CHECK_THROWS_AS(decode_frames(std::span(b).first(b.size() - 1)), ProtocolError);
    CHECK_THROWS_AS(decode_frames(encode({Message::column(0, 1, {1, 1}, {})})), ProtocolError);
    CHECK_THROWS_AS(decode_frames(encode({Message::column(0, 1, {1, 1}, {{1, 3}, {2, 2}})})), ProtocolError);
    Bytes bad = b;
    bad[0] = std::byte {7};
    CHECK_THROWS_AS(decode_frames(bad), ProtocolError);
}

TEST_CASE("exchange delivers by source and keeps per-pair order")
{
    for(TransportKind kind: both) {
        CAPTURE(name(kind));
        auto results = run_ranks(4, [](Transport& t) {
            std::vector<std::vector<Message>> none(t.size());
            EXPECT(t.exchange(none).empty());

            std::vector<std::vector<Message>> out(t.size());
            if (t.rank() == 1)
                out[0].push_back(Message::column(1, 0, {1, 1}, {{0, 5}}));
            auto in = t.exchange(out);
            if (t.rank() == 0) {
                EXPECT(in.size() == 1);
                EXPECT(in[0].source == 1);
                EXPECT(in[0].entries == Entries {{0, 5}});
            } else {
                EXPECT(in.empty());
            }

            // random traffic: the payload records (source, destination, sequence number)
            std::mt19937_64 rng(100 + t.rank());
            std::vector<std::vector<Message>> traffic(t.size());
            Bytes sent;
            ByteWriter w(sent);
            for(int i = 0; i < 60; ++i) {
                int d = int(rng() % t.size());
                auto seq = Uid(traffic[d].size());
                traffic[d].push_back(Message::column(t.rank(), d, {double(t.rank()), Uid(d)}, {{double(i), seq}}));
                w.u32(d);
            }
            auto got = t.exchange(traffic);
            std::map<int, Uid> next;
            int last_source = -1;
            for(const auto& m: got) {
                EXPECT(int(m.source) >= last_source);
                last_source = int(m.source);
                EXPECT(m.destination == std::uint32_t(t.rank()));
                EXPECT(m.owner.uid == Uid(t.rank()));
                EXPECT(m.entries[0].uid == next[m.source]++);
            }
            Bytes received;
            ByteWriter rw(received);
            rw.u64(got.size());
            return received;
        }, with(kind));

        // conservation: everything sent arrives somewhere
        std::size_t total = 0;
        for(const auto& r: results) {
            ByteReader rd(r);
            total += rd.u64();
        }
        CHECK(total == 4 * 60);
    }
}

TEST_CASE("all-reduce sums")
{
    for(TransportKind kind: both) {
        CAPTURE(name(kind));
        run_ranks(5, [](Transport& t) {
            EXPECT(t.all_reduce_sum(0) == 0);
            EXPECT(t.all_reduce_sum(t.rank() == 2 ? 3 : 0) == 3);
            std::mt19937_64 rng(7);
            std::vector<std::int64_t> v(t.size());
            for(auto& x: v)
                x = std::int64_t(rng() % 1000) - 500;
            std::int64_t expected = 0;
            for(auto x: v)
                expected += x;
            EXPECT(t.all_reduce_sum(v[t.rank()]) == expected);
            t.barrier();
            auto all = t.all_gather(Bytes(std::size_t(t.rank()), std::byte {1}));
            for(int r = 0; r < t.size(); ++r)
                EXPECT(all[r].size() == std::size_t(r));
            auto at_root = t.gather(Bytes(1, std::byte(t.rank())), 0);
            if (t.rank() == 0) {
                EXPECT(at_root.size() == std::size_t(t.size()));
                for(int r = 0; r < t.size(); ++r)
                    EXPECT(at_root[r] == Bytes(1, std::byte(r)));
            } else {
                EXPECT(at_root.empty());
            }
            return Bytes {};
        }, with(kind));
    }
}

TEST_CASE("single rank")
{
    for(TransportKind kind: both) {
        auto r = run_ranks(1, [](Transport& t) {
            EXPECT(t.all_reduce_sum(4) == 4);
            std::vector<std::vector<Message>> out(1);
            out[0].push_back(Message::column(0, 0, {1, 1}, {{0, 0}}));
            EXPECT(t.exchange(out).size() == 1);
            return Bytes(3, std::byte {9});
        }, with(kind));
        CHECK(r == std::vector<Bytes> {Bytes(3, std::byte {9})});
    }
    CHECK_THROWS_AS(run_ranks(0, [](Transport&) { return Bytes {}; }), ConfigError);
}

TEST_CASE("failures abort the run and keep their kind")
{
    for(TransportKind kind: both) {
        CAPTURE(name(kind));
        auto start = std::chrono::steady_clock::now();
        try {
            run_ranks(4, [](Transport& t) {
                if (t.rank() == 2)
                    throw ConfigError("bad input on two");
                t.barrier();
                return Bytes {};
            }, with(kind));
            FAIL("expected an exception");
        } catch(const ConfigError& e) {
            CHECK(std::string(e.what()).find("rank 2") != std::string::npos);
            CHECK(std::string(e.what()).find("bad input on two") != std::string::npos);
        }

        CHECK_THROWS_AS(run_ranks(3, [](Transport& t) {
            if (t.rank() == 0)
                throw InternalError("broken");
            t.all_reduce_sum(1);
            return Bytes {};
        }, with(kind)), InternalError);
        CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(10));
    }
}

TEST_CASE("mismatched collectives are detected")
{
    for(TransportKind kind: both) {
        CAPTURE(name(kind));
        auto start = std::chrono::steady_clock::now();
        CHECK_THROWS_AS(run_ranks(3, [](Transport& t) {
            if (t.rank() == 1)
                t.barrier();
            else
                t.all_reduce_sum(1);
            return Bytes {};
        }, with(kind)), ProtocolError);

        // one rank calls a collective the others never reach
        CHECK_THROWS_AS(run_ranks(2, [](Transport& t) {
            if (t.rank() == 0)
                t.all_reduce_sum(1);
            return Bytes {};
        }, with(kind, std::chrono::milliseconds(1500))), ProtocolError);
        CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(10));
    }
}

TEST_CASE("destinations outside the rank range are configuration errors")
{
    CHECK_THROWS_AS(run_ranks(2, [](Transport& t) {
        std::vector<std::vector<Message>> out(t.size());
        out[1].push_back(Message::column(0, 5, {1, 1}, {{0, 0}}));
        t.exchange(out);
        return Bytes {};
    }), ConfigError);
}

} // TEST_SUITE
