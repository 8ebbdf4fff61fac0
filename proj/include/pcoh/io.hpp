#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pcoh/diagram.hpp"
#include "pcoh/filtration.hpp"
#include "pcoh/pipeline.hpp"

namespace pcoh {

    enum class SampleType { U8, U16, F32, F64 };

    SampleType parse_sample_type(std::string_view name);
    std::size_t sample_width(SampleType type);

    // Raw little-endian samples, x fastest. The file size must match the dims exactly.
    Grid read_grid(const std::filesystem::path& path, const Coords& dims, SampleType type);

    void write_grid(const std::filesystem::path& path, const Grid& grid, SampleType type);

    // shortest text that reads back to the same double; "inf" for infinity
    std::string format_value(double x);

    // one "dim birth death" line per pair in canonical order
    std::string format_diagram(const Diagram& d);
    void write_diagram(const Diagram& d, const std::filesystem::path& path);

    // Key-value lines, then a per-rank table. Lines starting with "time" and the
    // rank_times table carry wall-clock measurements; everything else is deterministic.
    std::string format_stats(const RunStats& s);
    void write_stats(const RunStats& s, const std::filesystem::path& path);

} // namespace pcoh
