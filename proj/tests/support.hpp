#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcoh/filtration.hpp"
#include "pcoh/reduction.hpp"

// Assertion for code running inside rank programs: forked ranks cannot report to the
// test framework, so a failed expectation throws and fails the whole run instead.
#define EXPECT(...) ::testing::expect((__VA_ARGS__), #__VA_ARGS__, __FILE__, __LINE__)

namespace testing {

    inline void expect(bool ok, const char* what, const char* file, int line)
    {
        if (not ok)
            throw std::runtime_error(std::string(file) + ":" + std::to_string(line) + ": expected " + what);
    }


    using pcoh::Coords;
    using pcoh::Grid;

    // small integer values so that ties are everywhere
    inline Grid random_grid(std::mt19937_64& rng, Coords dims, int max_value = 255)
    {
        std::uniform_int_distribution<int> value(0, max_value);
        std::vector<double> values(std::size_t(dims[0]) * dims[1] * dims[2]);
        for(double& v: values)
            v = value(rng);
        return Grid(dims, std::move(values));
    }

    inline Coords random_dims(std::mt19937_64& rng, int lo, int hi)
    {
        std::uniform_int_distribution<int> d(lo, hi);
        return {d(rng), d(rng), d(rng)};
    }

    // u8 samples drawn from a handful of levels, or from the full range
    inline Grid random_tied_grid(std::mt19937_64& rng, Coords dims)
    {
        std::uniform_int_distribution<int> pick(0, 2);
        int levels[] = {3, 12, 255};
        return random_grid(rng, dims, levels[pick(rng)]);
    }

    // uniform noise blurred by a few box-filter passes, quantized to distinct-ish doubles
    inline Grid smoothed_field(Coords dims, std::uint64_t seed, int passes = 3)
    {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0, 1);
        std::size_t n = std::size_t(dims[0]) * dims[1] * dims[2];
        std::vector<double> v(n), w(n);
        for(double& x: v)
            x = u(rng);
        auto at = [&](int x, int y, int z) { return std::size_t(x) + std::size_t(dims[0]) * (std::size_t(y) + std::size_t(dims[1]) * z); };
        for(int pass = 0; pass < passes; ++pass)
            for(int axis = 0; axis < 3; ++axis) {
                for(int z = 0; z < dims[2]; ++z)
                    for(int y = 0; y < dims[1]; ++y)
                        for(int x = 0; x < dims[0]; ++x) {
                            Coords c {x, y, z};
                            double sum = 0;
                            int count = 0;
                            for(int d = -1; d <= 1; ++d) {
                                Coords q = c;
                                q[axis] += d;
                                if (q[axis] < 0 or q[axis] >= dims[axis])
                                    continue;
                                sum += v[at(q[0], q[1], q[2])];
                                ++count;
                            }
                            w[at(x, y, z)] = sum / count;
                        }
                std::swap(v, w);
            }
        return Grid(dims, std::move(v));
    }

    // unreduced coboundary matrix of the whole complex, zero columns left out
    inline pcoh::ReducedChunk full_coboundary(const Grid& g, int max_dim = 3)
    {
        pcoh::ReducedChunk chunk;
        for(const auto& [cell, key]: pcoh::enumerate_cells(g, max_dim)) {
            if (cell.dim() >= max_dim)
                continue;
            pcoh::Entries col;
            for(const pcoh::Cell& tau: pcoh::cofacets(cell, g.shape()))
                col.push_back(pcoh::cell_key(tau, g));
            std::sort(col.begin(), col.end(), pcoh::MatrixOrder());
            if (not col.empty())
                chunk.columns[cell.dim()].emplace(key, std::move(col));
        }
        return chunk;
    }

    // low -> owner over all dimensions, the pairing a reduced matrix defines
    inline std::map<pcoh::Uid, pcoh::Uid> pairing(const pcoh::ReducedChunk& chunk)
    {
        std::map<pcoh::Uid, pcoh::Uid> result;
        for(const auto& store: chunk.columns)
            for(const auto& [owner, col]: store)
                if (not col.empty())
                    result[col.back().uid] = owner.uid;
        return result;
    }

} // namespace testing
