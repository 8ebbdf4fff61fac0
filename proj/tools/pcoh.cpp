// Persistence diagram of a raw scalar volume, computed on several ranks.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pcoh/errors.hpp"
#include "pcoh/io.hpp"
#include "pcoh/pipeline.hpp"

namespace {

    pcoh::Coords parse_triple(const std::string& text, const char* what)
    {
        pcoh::Coords c;
        std::istringstream in(text);
        char comma;
        if (not (in >> c[0] >> comma >> c[1] >> comma >> c[2]) or not in.eof())
            throw pcoh::ConfigError(std::string(what) + " must look like X,Y,Z, got '" + text + "'");
        return c;
    }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app {"Persistence diagrams of lower-star filtrations on 3D grids"};

    std::string input, dims_text, dtype = "f64", blocks_text, transport = "inproc", output, stats_path;
    int ranks = 1, max_dim = 3;
    bool no_clearing = false, no_sparsify = false;
    std::uint64_t seed = 0;

    app.add_option("--input", input, "raw little-endian samples, x fastest")->required();
    app.add_option("--dims", dims_text, "vertex counts X,Y,Z")->required();
    app.add_option("--dtype", dtype, "u8, u16, f32 or f64")->capture_default_str();
    app.add_option("--ranks", ranks, "number of ranks")->capture_default_str();
    app.add_option("--blocks", blocks_text, "blocks per axis X,Y,Z; the product must equal --ranks");
    app.add_option("--max-dim", max_dim, "highest cell dimension in the complex")->capture_default_str();
    app.add_option("--transport", transport, "inproc or proc")->capture_default_str();
    app.add_flag("--no-clearing", no_clearing, "disable clearing");
    app.add_flag("--no-sparsify", no_sparsify, "skip ultrasparsification");
    app.add_option("--seed", seed, "seed for splitter sampling")->capture_default_str();
    app.add_option("--output", output, "diagram file (stdout if omitted)");
    app.add_option("--stats", stats_path, "run statistics file");

    try {
        app.parse(argc, argv);
    } catch(const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        pcoh::Coords dims = parse_triple(dims_text, "--dims");
        pcoh::SampleType type = pcoh::parse_sample_type(dtype);

        pcoh::PipelineConfig cfg;
        cfg.max_dim = max_dim;
        cfg.clearing = not no_clearing;
        cfg.sparsify = not no_sparsify;
        cfg.seed = seed;
        if (transport == "inproc")
            cfg.transport = pcoh::TransportKind::InProcess;
        else if (transport == "proc")
            cfg.transport = pcoh::TransportKind::Process;
        else
            throw pcoh::ConfigError("unknown transport '" + transport + "', expected inproc or proc");

        if (blocks_text.empty())
            cfg.blocks = pcoh::auto_blocks(ranks, dims);
        else {
            cfg.blocks = parse_triple(blocks_text, "--blocks");
            if (cfg.n_ranks() != ranks)
                throw pcoh::ConfigError("--blocks " + blocks_text + " gives " + std::to_string(cfg.n_ranks()) + " blocks for "
                                        + std::to_string(ranks) + " ranks");
        }

        pcoh::Grid grid = pcoh::read_grid(input, dims, type);
        pcoh::PipelineResult res = pcoh::run_pipeline(grid, cfg);

        if (output.empty())
            std::cout << pcoh::format_diagram(res.diagram);
        else
            pcoh::write_diagram(res.diagram, output);
        if (not stats_path.empty())
            pcoh::write_stats(res.stats, stats_path);
        return 0;
    } catch(const pcoh::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch(const pcoh::InternalError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    } catch(const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
