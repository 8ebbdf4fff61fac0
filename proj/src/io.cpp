#include "pcoh/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pcoh/errors.hpp"

namespace pcoh {

    SampleType parse_sample_type(std::string_view name)
    {
        if (name == "u8")
            return SampleType::U8;
        if (name == "u16")
            return SampleType::U16;
        if (name == "f32")
            return SampleType::F32;
        if (name == "f64")
            return SampleType::F64;
        throw ConfigError("unknown sample type '" + std::string(name) + "', expected u8, u16, f32 or f64");
    }

    std::size_t sample_width(SampleType type)
    {
        switch(type) {
            case SampleType::U8: return 1;
            case SampleType::U16: return 2;
            case SampleType::F32: return 4;
            case SampleType::F64: return 8;
        }
        return 0;
    }

    namespace {

        std::uint64_t load_le(const unsigned char* p, std::size_t width)
        {
            std::uint64_t x = 0;
            for(std::size_t i = 0; i < width; ++i)
                x |= std::uint64_t(p[i]) << (8 * i);
            return x;
        }

        void store_le(std::string& out, std::uint64_t x, std::size_t width)
        {
            for(std::size_t i = 0; i < width; ++i)
                out.push_back(char((x >> (8 * i)) & 0xff));
        }

    } // namespace

    Grid read_grid(const std::filesystem::path& path, const Coords& dims, SampleType type)
    {
        for(int k = 0; k < 3; ++k)
            if (dims[k] < 1)
                throw ConfigError("grid dimensions must be positive");

        std::ifstream in(path, std::ios::binary);
        if (not in)
            throw ConfigError("cannot open " + path.string());
        std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

        std::size_t width = sample_width(type);
        std::size_t n = std::size_t(dims[0]) * dims[1] * dims[2];
        if (data.size() != n * width)
            throw ConfigError(path.string() + ": expected " + std::to_string(n * width) + " bytes for " + std::to_string(dims[0]) + "x"
                              + std::to_string(dims[1]) + "x" + std::to_string(dims[2]) + " samples, found " + std::to_string(data.size()));

        std::vector<double> values(n);
        auto bytes = reinterpret_cast<const unsigned char*>(data.data());
        for(std::size_t i = 0; i < n; ++i) {
            std::uint64_t raw = load_le(bytes + i * width, width);
            switch(type) {
                case SampleType::U8:
                case SampleType::U16: values[i] = double(raw); break;
                case SampleType::F32: values[i] = double(std::bit_cast<float>(std::uint32_t(raw))); break;
                case SampleType::F64: values[i] = std::bit_cast<double>(raw); break;
            }
        }
        return Grid(dims, std::move(values));
    }

    void write_grid(const std::filesystem::path& path, const Grid& grid, SampleType type)
    {
        std::size_t width = sample_width(type);
        std::string out;
        out.reserve(grid.values().size() * width);
        for(double v: grid.values()) {
            switch(type) {
                case SampleType::U8: store_le(out, std::uint64_t(v), 1); break;
                case SampleType::U16: store_le(out, std::uint64_t(v), 2); break;
                case SampleType::F32: store_le(out, std::bit_cast<std::uint32_t>(float(v)), 4); break;
                case SampleType::F64: store_le(out, std::bit_cast<std::uint64_t>(v), 8); break;
            }
        }
        std::ofstream f(path, std::ios::binary);
        f.write(out.data(), std::streamsize(out.size()));
        if (not f)
            throw ConfigError("cannot write " + path.string());
    }

    std::string format_value(double x)
    {
        if (std::isinf(x))
            return x > 0 ? "inf" : "-inf";
        char buf[64];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
        return std::string(buf, end);
    }

    std::string format_diagram(const Diagram& d)
    {
        Diagram sorted = d;
        sorted.canonicalize();
        std::string out;
        for(const PersistencePair& p: sorted.pairs) {
            out += std::to_string(p.dim);
            out += ' ';
            out += format_value(p.birth);
            out += ' ';
            out += format_value(p.death);
            out += '\n';
        }
        return out;
    }

    namespace {

        void write_text(const std::string& text, const std::filesystem::path& path)
        {
            std::ofstream f(path, std::ios::binary);
            if (not f)
                throw ConfigError("cannot open " + path.string() + " for writing");
            f << text;
            f.flush();
            if (not f)
                throw ConfigError("failed writing " + path.string());
        }

    } // namespace

    void write_diagram(const Diagram& d, const std::filesystem::path& path) { write_text(format_diagram(d), path); }

    std::string format_stats(const RunStats& s)
    {
        std::ostringstream out;
        RankStats sum;
        for(const RankStats& r: s.ranks) {
            sum.interior_columns += r.interior_columns;
            sum.columns_sent += r.columns_sent;
            sum.non_ultrasparse += r.non_ultrasparse;
            sum.routing_violations += r.routing_violations;
            sum.cleared_local += r.cleared_local;
            sum.cleared_redistribution += r.cleared_redistribution;
            sum.cleared_global += r.cleared_global;
            sum.pivot_swaps += r.pivot_swaps;
        }

        out << "ranks " << s.n_ranks << '\n';
        out << "blocks " << s.blocks[0] << ' ' << s.blocks[1] << ' ' << s.blocks[2] << '\n';
        out << "rounds";
        for(int r: s.rounds)
            out << ' ' << r;
        out << '\n';
        out << "finite_pairs " << s.finite_pairs << '\n';
        out << "diagonal_pairs " << s.diagonal_pairs << '\n';
        out << "essential_pairs " << s.essential_pairs << '\n';
        out << "final_columns " << s.total_final_columns() << '\n';
        out << "imbalance " << format_value(s.imbalance()) << '\n';
        out << "interior_columns " << sum.interior_columns << '\n';
        out << "columns_sent " << sum.columns_sent << '\n';
        out << "pivot_swaps " << sum.pivot_swaps << '\n';
        out << "cleared_local " << sum.cleared_local << '\n';
        out << "cleared_redistribution " << sum.cleared_redistribution << '\n';
        out << "cleared_global " << sum.cleared_global << '\n';
        out << "non_ultrasparse " << sum.non_ultrasparse << '\n';
        out << "routing_violations " << sum.routing_violations << '\n';

        PhaseTimes t = s.max_times();
        out << "time_setup " << t.setup << '\n';
        out << "time_local_reduce " << t.local_reduce << '\n';
        out << "time_sparsify " << t.sparsify << '\n';
        out << "time_redistribution " << t.redistribution << '\n';
        out << "time_global_loop " << t.global_loop << '\n';
        out << "time_reduction " << t.reduction() << '\n';

        out << "\nrank final_columns interior_columns columns_sent cleared_local cleared_redistribution cleared_global pivot_swaps\n";
        for(std::size_t i = 0; i < s.ranks.size(); ++i) {
            const RankStats& r = s.ranks[i];
            out << i << ' ' << r.final_columns << ' ' << r.interior_columns << ' ' << r.columns_sent << ' ' << r.cleared_local << ' '
                << r.cleared_redistribution << ' ' << r.cleared_global << ' ' << r.pivot_swaps << '\n';
        }

        out << "\nrank_times local_reduce sparsify redistribution global_loop\n";
        for(std::size_t i = 0; i < s.ranks.size(); ++i) {
            const PhaseTimes& pt = s.ranks[i].times;
            out << i << ' ' << pt.local_reduce << ' ' << pt.sparsify << ' ' << pt.redistribution << ' ' << pt.global_loop << '\n';
        }
        return out.str();
    }

    void write_stats(const RunStats& s, const std::filesystem::path& path) { write_text(format_stats(s), path); }

} // namespace pcoh
