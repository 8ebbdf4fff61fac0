#include <doctest.h>

#include <map>

#include "pcoh/column.hpp"
#include "pcoh/diagram.hpp"
#include "pcoh/reduction.hpp"
#include "support.hpp"

using namespace pcoh;

namespace {

    Entries random_entries(std::mt19937_64& rng, int n_rows, double density)
    {
        std::bernoulli_distribution take(density);
        Entries e;
        for(int r = n_rows - 1; r >= 0; --r)
            if (take(rng))
                e.push_back({double(r / 3), Uid(r)});      // keys in matrix order: descending
        return e;
    }

    // Reduction with columns picked in random order: any collision (a, b) with a
    // to the left of b is resolved by adding a to b, until none is left.
    std::map<Uid, Uid> generic_reduction(ColumnStore store, std::mt19937_64& rng)
    {
        std::vector<CellKey> owners;
        for(const auto& [o, c]: store)
            owners.push_back(o);
        Entries scratch;
        while(true) {
            std::shuffle(owners.begin(), owners.end(), rng);
            bool changed = false;
            for(const CellKey& b: owners) {
                Entries& cb = store[b];
                if (cb.empty())
                    continue;
                for(const CellKey& a: owners) {
                    const Entries& ca = store[a];
                    if (precedes(a, b) and not ca.empty() and ca.back() == cb.back()) {
                        add_to(cb, ca, scratch);
                        changed = true;
                        break;
                    }
                }
            }
            if (not changed)
                break;
        }
        std::map<Uid, Uid> result;
        for(const auto& [o, c]: store)
            if (not c.empty())
                result[c.back().uid] = o.uid;
        return result;
    }

} // namespace

TEST_SUITE("reduction") {

TEST_CASE("low is the last entry in matrix order")
{
    Column c {{1, 0}, {{9, 1}, {4, 6}}};
    CHECK(*c.low() == CellKey {4, 6});
    CHECK_FALSE(Column {}.low().has_value());
    CHECK(*Column {{1, 0}, {{4, 6}}}.low() == CellKey {4, 6});
}

TEST_CASE("column addition over Z/2")
{
    Column a {{1, 1}, {{9, 1}, {4, 6}}};
    Column b {{1, 2}, {{4, 6}}};
    CHECK(add_columns(a, b).entries == Entries {{9, 1}});
    CHECK(add_columns(a, b).owner == a.owner);
    CHECK(add_columns(a, a).entries.empty());
    CHECK(add_columns(Column {{0, 0}, {{9, 1}}}, Column {{0, 1}, {{4, 6}, {2, 2}}}).entries == Entries {{9, 1}, {4, 6}, {2, 2}});

    std::mt19937_64 rng(2);
    for(int i = 0; i < 200; ++i) {
        Column x {{0, 0}, random_entries(rng, 20, 0.3)};
        Column y {{0, 1}, random_entries(rng, 20, 0.3)};
        Column z {{0, 2}, random_entries(rng, 20, 0.3)};
        CHECK(is_strictly_sorted(add_columns(x, y).entries));
        CHECK(add_columns(x, y).entries == add_columns(y, x).entries);
        CHECK(add_columns(add_columns(x, y), z).entries == add_columns(x, add_columns(y, z)).entries);
        CHECK(add_columns(x, Column {}).entries == x.entries);
    }
}

TEST_CASE("two identical columns: the earlier keeps the pivot")
{
    ReducedChunk chunk;
    CellKey left {5, 1}, right {3, 2}, row {7, 9};
    chunk.columns[0][left] = {row};
    chunk.columns[0][right] = {row};
    auto stats = reduce_chunk(chunk, false);
    CHECK(stats.additions == 1);
    CHECK(chunk.columns[0].size() == 1);
    CHECK(chunk.columns[0].count(left) == 1);
    CHECK(chunk.pivots[0].at(row) == left);
    CHECK(is_reduced(chunk));
}

TEST_CASE("path of three vertices agrees with the homology oracle")
{
    Grid g({3, 1, 1}, {0, 1, 2});
    ReducedChunk chunk = testing::full_coboundary(g);
    reduce_chunk(chunk, true);
    auto columns = final_columns(chunk);
    Diagram d = extract_pairs(columns, g, 3);
    CHECK(diagrams_equal(d, oracle_homology_diagram(g)));
    REQUIRE(d.size() == 1);
    CHECK(d.pairs[0].birth == 0);
    CHECK(d.pairs[0].death == infinity);
}

TEST_CASE("reduced chunks have unique lows and each addition moves the low up")
{
    std::mt19937_64 rng(21);
    for(int trial = 0; trial < 40; ++trial) {
        ColumnStore store;
        for(int j = 0; j < 25; ++j) {
            Entries e = random_entries(rng, 30, 0.2);
            if (not e.empty())
                store[{double(100 + j), Uid(1000 + j)}] = e;
        }

        // replay the standard reduction by hand to watch every low
        PivotTable pivots;
        ColumnStore copy = store;
        Entries scratch;
        for(auto& [owner, col]: copy)
            while(not col.empty()) {
                auto p = pivots.find(col.back());
                if (p == pivots.end()) {
                    pivots[col.back()] = owner;
                    break;
                }
                CellKey before = col.back();
                add_to(col, copy.at(p->second), scratch);
                if (not col.empty())
                    CHECK(precedes(col.back(), before));
            }

        ReducedChunk chunk;
        chunk.columns[1] = store;
        reduce_chunk(chunk, false);
        CHECK(is_reduced(chunk));
        for(const auto& [low, owner]: pivots)
            CHECK(chunk.pivots[1].at(low) == owner);
    }
}

TEST_CASE("pairing does not depend on the order of column operations")
{
    std::mt19937_64 rng(4);
    for(int trial = 0; trial < 30; ++trial) {
        ColumnStore store;
        for(int j = 0; j < 15; ++j) {
            Entries e = random_entries(rng, 18, 0.25);
            if (not e.empty())
                store[{double(50 - j), Uid(j)}] = e;
        }
        ReducedChunk chunk;
        chunk.columns[0] = store;
        reduce_chunk(chunk, false);
        CHECK(testing::pairing(chunk) == generic_reduction(store, rng));
    }
}

TEST_CASE("clearing leaves the pairing unchanged")
{
    std::mt19937_64 rng(9);
    for(int trial = 0; trial < 20; ++trial) {
        Grid g = testing::random_grid(rng, {4, 4, 4}, 10);
        ReducedChunk with = testing::full_coboundary(g), without = with;
        auto s_with = reduce_chunk(with, true);
        auto s_without = reduce_chunk(without, false);
        CHECK(s_with.cleared > 0);
        CHECK(s_without.cleared == 0);
        CHECK(is_reduced(with));
        CHECK(is_reduced(without));
        CHECK(testing::pairing(with) == testing::pairing(without));
    }
}

} // TEST_SUITE
