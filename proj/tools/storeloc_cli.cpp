// storeloc: infer store locations from purchase co-occurrence.
//
//   storeloc synth    --out-dir DIR            synthetic city with ground truth
//   storeloc infer    --transactions F --seeds F --output F
//   storeloc evaluate --transactions F --seeds F --report-csv F --report-table F
//   storeloc density  --transactions F --seeds F --output F
//   storeloc stats    --transactions F --seeds F
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "storeloc/errors.hpp"
#include "storeloc/io.hpp"
#include "storeloc/pipeline.hpp"
#include "storeloc/synth.hpp"

namespace fs = std::filesystem;
using namespace storeloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct CommonOptions {
    std::optional<double> origin_lat;
    std::optional<double> origin_lon;
    std::string region = "region";
    std::vector<double> r_edges = BinningScheme::defaults().r_edges;
    std::size_t m_bins = 20;
    PipelineConfig cfg;
    bool gradient = false;
    bool nn3_unweighted = false;
    std::string transactions;
    std::string seeds;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--transactions", o.transactions, "Transactions file (JSON lines)")->required();
    cmd->add_option("--seeds", o.seeds, "Known store locations (JSON lines)")->required();
    cmd->add_option("--origin-lat", o.origin_lat, "Projection origin latitude (default: seed centroid)");
    cmd->add_option("--origin-lon", o.origin_lon, "Projection origin longitude (default: seed centroid)");
    cmd->add_option("--region", o.region, "Region label used in reports");
    cmd->add_option("--theta", o.cfg.theta, "Sharing threshold");
    cmd->add_option("--min-customers", o.cfg.min_customers, "Minimum distinct customers per store");
    cmd->add_option("--r-edges", o.r_edges, "Distance bin edges in meters")->delimiter(',');
    cmd->add_option("--m-bins", o.m_bins, "Number of equal-width sharing bins");
    cmd->add_option("--floor", o.cfg.floor, "Minimum cell probability");
    cmd->add_option("--smoothing", o.cfg.smoothing, "Additive smoothing per cell");
    cmd->add_option("--grid-coarse", o.cfg.solver.grid_coarse, "Coarse grid pitch (m)");
    cmd->add_option("--grid-fine", o.cfg.solver.grid_fine, "Fine grid pitch (m)");
    cmd->add_option("--hull-margin", o.cfg.solver.hull_margin, "Search margin around the neighbors (m)");
    cmd->add_option("--gd-step", o.cfg.solver.gd_step, "Initial gradient step (scaled)");
    cmd->add_option("--gd-tol", o.cfg.solver.gd_tol, "Gradient step tolerance (m)");
    cmd->add_option("--gd-max-iter", o.cfg.solver.gd_max_iter, "Gradient iteration limit");
    cmd->add_flag("--gradient", o.gradient, "Use gradient descent instead of grid search");
    cmd->add_option("--workers", o.cfg.workers, "Worker threads (0 = all cores)");
}

PipelineConfig finish(CommonOptions& o) {
    PipelineConfig cfg = o.cfg;
    cfg.paths.transactions = o.transactions;
    cfg.paths.seeds = o.seeds;
    if (o.origin_lat.has_value() != o.origin_lon.has_value()) {
        throw ConfigError("--origin-lat and --origin-lon must be given together");
    }
    GeoPoint origin = o.origin_lat ? GeoPoint(*o.origin_lat, *o.origin_lon) : seed_centroid(cfg.paths.seeds);
    cfg.region = Region{origin, o.region};
    cfg.binning.r_edges = o.r_edges;
    cfg.binning.m_edges = BinningScheme::uniform_m_edges(o.m_bins);
    cfg.solver.use_gradient = o.gradient;
    cfg.nn3_weighted = !o.nn3_unweighted;
    return cfg;
}

void print_ingest(const PreparedData& d) {
    std::cerr << "transactions: " << d.transactions.records << " records, " << d.transactions.malformed
              << " malformed\n";
    std::cerr << "stores: " << d.graph.known().size() << " known, " << d.graph.unknown().size() << " unknown";
    if (d.n_seeds_dropped > 0) std::cerr << " (" << d.n_seeds_dropped << " seeds without enough customers)";
    std::cerr << '\n';
    for (std::size_t i : d.density.degenerate_rows()) {
        std::cerr << "warning: no known pairs in distance bin " << i << ", using a uniform row\n";
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Infer store locations from purchase co-occurrence"};
    app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags take precedence");
    app.require_subcommand(1);
    app.allow_config_extras(CLI::config_extras_mode::error);

    // synth
    SynthConfig synth;
    std::string layout = "uniform";
    double known_fraction = 0.5;
    std::uint64_t split_seed = 1;
    double synth_lat = 37.7749, synth_lon = -122.4194;
    std::string out_dir;
    std::size_t synth_workers = 1;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic city with ground truth");
    synth_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
    synth_cmd->add_option("--seed", synth.seed, "Generator seed");
    synth_cmd->add_option("--extent", synth.city_extent, "City square side (m)");
    synth_cmd->add_option("--stores", synth.n_stores, "Number of stores");
    synth_cmd->add_option("--chains", synth.n_chains, "Number of chains");
    synth_cmd->add_option("--customers", synth.n_customers, "Number of customers");
    synth_cmd->add_option("--decay", synth.decay_scale, "Visit probability decay scale (m)");
    synth_cmd->add_option("--visit-prob", synth.base_visit_prob, "Visit probability at zero distance");
    synth_cmd->add_option("--layout", layout, "Store layout")->check(CLI::IsMember({"uniform", "clustered"}));
    synth_cmd->add_option("--known-fraction", known_fraction, "Fraction of stores written as seeds");
    synth_cmd->add_option("--split-seed", split_seed, "Seed for the known/unknown split");
    synth_cmd->add_option("--origin-lat", synth_lat, "Latitude of the city center");
    synth_cmd->add_option("--origin-lon", synth_lon, "Longitude of the city center");
    synth_cmd->add_option("--workers", synth_workers, "Worker threads (0 = all cores)");

    CommonOptions infer_o, eval_o, dens_o, stats_o;
    std::string infer_out, infer_density;
    auto* infer_cmd = app.add_subcommand("infer", "Infer locations of stores missing from the seeds");
    add_common(infer_cmd, infer_o);
    infer_cmd->add_option("--output", infer_out, "Results file (JSON lines)")->required();
    infer_cmd->add_option("--density-out", infer_density, "Also write the density table");

    std::string report_csv, report_table;
    bool strict = false;
    auto* eval_cmd = app.add_subcommand("evaluate", "Leave-one-out evaluation over the seeds");
    add_common(eval_cmd, eval_o);
    eval_cmd->add_option("--report-csv", report_csv, "CSV report");
    eval_cmd->add_option("--report-table", report_table, "Aligned text report");
    eval_cmd->add_flag("--strict-loo", strict, "Re-estimate the density without the held-out store");
    eval_cmd->add_flag("--nn3-unweighted", eval_o.nn3_unweighted, "Unweighted NN-3 centroid");

    std::string density_out;
    auto* dens_cmd = app.add_subcommand("density", "Estimate and write the p(m|r) table");
    add_common(dens_cmd, dens_o);
    dens_cmd->add_option("--output", density_out, "Density table file")->required();

    std::string stats_table;
    auto* stats_cmd = app.add_subcommand("stats", "Descriptive statistics of the known stores");
    add_common(stats_cmd, stats_o);
    stats_cmd->add_option("--report-table", stats_table, "Aligned text table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (synth_cmd->parsed()) {
        synth.layout = parse_store_layout(layout);
        const SynthCity city = generate(synth, synth_workers);
        const KnownSplit split = split_known(city, known_fraction, split_seed);
        const Region region{GeoPoint(synth_lat, synth_lon), "synthetic"};
        fs::create_directories(out_dir);
        std::ofstream tx(fs::path(out_dir) / "transactions.jsonl", std::ios::binary);
        std::ofstream seeds(fs::path(out_dir) / "seeds.jsonl", std::ios::binary);
        std::ofstream truth(fs::path(out_dir) / "truth.jsonl", std::ios::binary);
        if (!tx || !seeds || !truth) throw DataError("cannot write to " + out_dir);
        write_transactions(tx, city.records);
        write_seeds(seeds, split.known, region);
        write_seeds(truth, city.truth, region);
        std::cerr << "synth: " << city.stores.size() << " stores, " << city.records.size() << " records, "
                  << split.known.size() << " seeds\n";
        return kExitOk;
    }

    if (infer_cmd->parsed()) {
        PipelineConfig cfg = finish(infer_o);
        cfg.paths.output = infer_out;
        cfg.paths.density_out = infer_density;
        const InferOutput out = run_infer(cfg);
        print_ingest(out.data);
        std::cerr << "resolved " << out.n_resolved << " of " << out.results.size() << " unknown stores\n";
        if (out.n_resolved == 0) std::cerr << "warning: no store could be resolved\n";
        return kExitOk;
    }

    if (eval_cmd->parsed()) {
        PipelineConfig cfg = finish(eval_o);
        cfg.strict_loo = strict;
        cfg.paths.report_csv = report_csv;
        cfg.paths.report_table = report_table;
        const EvalReport report = run_evaluate(cfg);
        write_report_table(std::cout, report);
        return kExitOk;
    }

    if (dens_cmd->parsed()) {
        PipelineConfig cfg = finish(dens_o);
        cfg.paths.density_out = density_out;
        const ConditionalDensity d = run_density(cfg);
        const auto mono = d.is_monotone_above(cfg.theta);
        std::cerr << "density: " << d.scheme().n_r() << " x " << d.scheme().n_m() << " bins, "
                  << (mono.monotone ? "monotone" : "NOT monotone") << " above theta\n";
        return kExitOk;
    }

    if (stats_cmd->parsed()) {
        PipelineConfig cfg = finish(stats_o);
        cfg.paths.report_table = stats_table;
        const DescriptiveStats s = run_stats(cfg);
        write_descriptive_table(std::cout, cfg.region.name, s);
        return kExitOk;
    }
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}
