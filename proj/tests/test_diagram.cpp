#include <doctest.h>

#include <set>

#include "pcoh/diagram.hpp"
#include "pcoh/errors.hpp"
#include "support.hpp"

using namespace pcoh;

namespace {

    Diagram points(std::initializer_list<std::tuple<int, double, double>> list)
    {
        Diagram d;
        for(auto [dim, b, e]: list)
            d.pairs.push_back({dim, b, e, 0, std::nullopt});
        return d;
    }

} // namespace

TEST_SUITE("diagram") {

TEST_CASE("constant grid has one essential class")
{
    Grid g({3, 2, 2}, std::vector<double>(12, 7.0));
    for(const Diagram& d: {oracle_cohomology_diagram(g), oracle_homology_diagram(g)}) {
        REQUIRE(d.size() == 1);
        CHECK(d.pairs[0].dim == 0);
        CHECK(d.pairs[0].birth == 7);
        CHECK(d.pairs[0].essential());
    }
}

TEST_CASE("two vertices: the edge pairs with the later vertex on the diagonal")
{
    Grid g({2, 1, 1}, {0, 1});
    ExtractionStats stats;
    ReducedChunk chunk = testing::full_coboundary(g);
    reduce_chunk(chunk, true);
    auto columns = final_columns(chunk);
    Diagram d = extract_pairs(columns, g, 3, &stats);
    CHECK(diagrams_equal(d, points({{0, 0, infinity}})));
    CHECK(stats.diagonal == 1);
    CHECK(stats.essential == 1);
    CHECK(diagrams_equal(oracle_homology_diagram(g), d));
}

TEST_CASE("path of three vertices in homology")
{
    Grid g({3, 1, 1}, {0, 1, 2});
    CHECK(diagrams_equal(oracle_homology_diagram(g), points({{0, 0, infinity}})));
}

TEST_CASE("a valley vertex dies when its edge appears")
{
    Grid g({3, 1, 1}, {0, 2, 1});
    Diagram expected = points({{0, 0, infinity}, {0, 1, 2}});
    CHECK(diagrams_equal(oracle_homology_diagram(g), expected));
    CHECK(diagrams_equal(oracle_cohomology_diagram(g), expected));
}

TEST_CASE("a ring around a high centre is a loop filled at the centre's value")
{
    Grid g({3, 3, 1}, {0, 0, 0, 0, 5, 0, 0, 0, 0});
    Diagram expected = points({{0, 0, infinity}, {1, 0, 5}});
    CHECK(diagrams_equal(oracle_homology_diagram(g), expected));
    CHECK(diagrams_equal(oracle_cohomology_diagram(g), expected));
    // without squares the ring never fills, and three of the four spokes close new loops
    Diagram graph = points({{0, 0, infinity}, {1, 0, infinity}, {1, 5, infinity}, {1, 5, infinity}, {1, 5, infinity}});
    CHECK(diagrams_equal(oracle_cohomology_diagram(g, 1), graph));
    CHECK(diagrams_equal(oracle_homology_diagram(g, 1), graph));
}

TEST_CASE("single vertex grid")
{
    Grid g({1, 1, 1}, {3});
    CHECK(diagrams_equal(oracle_cohomology_diagram(g), points({{0, 3, infinity}})));
    CHECK(diagrams_equal(oracle_homology_diagram(g), points({{0, 3, infinity}})));
}

TEST_CASE("a solid box has a single essential class at the minimum")
{
    std::mt19937_64 rng(81);
    for(int trial = 0; trial < 20; ++trial) {
        Grid g = testing::random_grid(rng, {4, 4, 4}, trial % 2 ? 4 : 255);
        Diagram d = oracle_cohomology_diagram(g);
        int essentials = 0;
        for(const auto& p: d.pairs)
            if (p.essential()) {
                ++essentials;
                CHECK(p.dim == 0);
                CHECK(p.birth == *std::min_element(g.values().begin(), g.values().end()));
            }
        CHECK(essentials == 1);
    }
}

TEST_CASE("cohomology and homology oracles agree")
{
    std::mt19937_64 rng(83);
    for(int trial = 0; trial < 50; ++trial) {
        Grid g = testing::random_tied_grid(rng, {4, 4, 4});
        auto cmp = diagrams_equal(oracle_cohomology_diagram(g), oracle_homology_diagram(g));
        CHECK_MESSAGE(cmp.equal, cmp.difference);
    }
    for(int max_dim = 0; max_dim <= 3; ++max_dim) {
        Grid g = testing::random_grid(rng, testing::random_dims(rng, 1, 5), 6);
        auto cmp = diagrams_equal(oracle_cohomology_diagram(g, max_dim), oracle_homology_diagram(g, max_dim));
        CHECK_MESSAGE(cmp.equal, cmp.difference);
    }
}

TEST_CASE("pairs form a partial matching with deaths after births")
{
    std::mt19937_64 rng(89);
    for(int trial = 0; trial < 10; ++trial) {
        Grid g = testing::random_grid(rng, testing::random_dims(rng, 2, 5), 30);
        Diagram d = oracle_cohomology_diagram(g);
        std::set<Uid> seen;
        for(const auto& p: d.pairs) {
            CHECK(p.death > p.birth);
            CHECK(seen.insert(p.birth_cell).second);
            CHECK(g.shape().cell_dim(p.birth_cell) == p.dim);
            if (p.death_cell) {
                CHECK(seen.insert(*p.death_cell).second);
                CHECK(g.shape().cell_dim(*p.death_cell) == p.dim + 1);
            }
        }
    }
}

TEST_CASE("extraction rejects unreduced or inconsistent input")
{
    Grid g({3, 1, 1}, {0, 1, 2});
    CellKey v0 = cell_key(Cell {{0, 0, 0}}, g), v1 = cell_key(Cell {{2, 0, 0}}, g);
    CellKey e0 = cell_key(Cell {{1, 0, 0}}, g), e1 = cell_key(Cell {{3, 0, 0}}, g);
    std::vector<FinalColumn> collision {{v0, e0}, {v1, e0}};
    CHECK_THROWS_AS(extract_pairs(collision, g, 3), InternalError);
    std::vector<FinalColumn> positive_with_column {{v0, e0}, {e0, e1}};
    CHECK_THROWS_AS(extract_pairs(positive_with_column, g, 3), InternalError);
    std::vector<FinalColumn> wrong_dim {{v0, v1}};
    CHECK_THROWS_AS(extract_pairs(wrong_dim, g, 3), InternalError);
}

TEST_CASE("diagram comparison is multiset equality")
{
    Diagram a = points({{0, 1, 2}, {0, 1, 2}, {1, 0, infinity}});
    CHECK(diagrams_equal(a, a));
    Diagram permuted = points({{1, 0, infinity}, {0, 1, 2}, {0, 1, 2}});
    CHECK(diagrams_equal(a, permuted));
    Diagram fewer = points({{0, 1, 2}, {1, 0, infinity}});
    auto cmp = diagrams_equal(a, fewer);
    CHECK_FALSE(cmp.equal);
    CHECK(cmp.difference.find("(1, 2)") != std::string::npos);
    CHECK_FALSE(diagrams_equal(points({{0, 1, 2}}), points({{1, 1, 2}})));
}

} // TEST_SUITE
