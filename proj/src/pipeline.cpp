#include "storeloc/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "storeloc/errors.hpp"
#include "storeloc/parallel.hpp"

namespace storeloc {

void PipelineConfig::validate() const {
    if (!std::isfinite(theta) || theta < 0.0) throw ConfigError("theta must be finite and >= 0");
    try {
        binning.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    effective_solver().validate();
    if (!(floor > 0.0) || floor * static_cast<double>(binning.n_m()) >= 1.0) {
        throw ConfigError("floor must be positive and below 1 / number of m bins");
    }
    if (!(smoothing > 0.0) || !std::isfinite(smoothing)) throw ConfigError("smoothing must be positive");
}

SolverConfig PipelineConfig::effective_solver() const {
    SolverConfig s = solver;
    s.theta = theta;
    return s;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

void require_path(const std::filesystem::path& p, const char* what) {
    if (p.empty()) throw ConfigError(std::string("missing path: ") + what);
}

void maybe_write_density(const PipelineConfig& cfg, const ConditionalDensity& d) {
    if (cfg.paths.density_out.empty()) return;
    auto out = open_output(cfg.paths.density_out);
    write_density(out, d);
}

}  // namespace

PreparedData prepare(const PipelineConfig& cfg) {
    cfg.validate();
    require_path(cfg.paths.transactions, "transactions");
    require_path(cfg.paths.seeds, "seeds");

    PreparedData data;
    CustomerIndex index;
    data.transactions = load_transactions(cfg.paths.transactions, [&](const TransactionRecord& r) { index.add(r); });
    const auto sets = index.finish(cfg.min_customers);

    auto seeds = load_seed_locations(cfg.paths.seeds, cfg.region);
    data.n_seeds = seeds.size();
    std::map<StoreRef, PlanarPoint> admitted;
    for (const auto& s : sets) {
        auto it = seeds.find(s.store);
        if (it != seeds.end()) admitted.emplace(it->first, it->second);
    }
    data.n_seeds_dropped = seeds.size() - admitted.size();
    if (admitted.empty()) throw DataError("no known store has an admitted customer set");

    data.graph = build_graph(sets, admitted, cfg.theta, cfg.workers);
    const auto samples = data.graph.known_pair_samples();
    if (samples.empty()) throw DataError("density estimation needs at least two known stores");
    data.density = estimate(samples, cfg.binning, cfg.floor, cfg.smoothing);
    return data;
}

InferOutput run_infer(const PipelineConfig& cfg) {
    InferOutput out;
    out.data = prepare(cfg);
    const SharingGraph& g = out.data.graph;
    const SolverConfig solver = cfg.effective_solver();

    out.results.resize(g.unknown().size());
    parallel_for(g.unknown().size(), cfg.workers, [&](std::size_t j) {
        InferenceResult r = solve(g.unknown_neighbors(j), out.data.density, solver);
        r.store = g.unknown()[j];
        out.results[j] = std::move(r);
    });
    for (const auto& r : out.results) {
        if (r.location) ++out.n_resolved;
    }

    if (!cfg.paths.output.empty()) {
        auto file = open_output(cfg.paths.output);
        write_results(file, out.results, cfg.region);
    }
    maybe_write_density(cfg, out.data.density);
    return out;
}

EvalReport run_evaluate(const PipelineConfig& cfg) {
    const PreparedData data = prepare(cfg);
    EvalOptions opts;
    opts.strict = cfg.strict_loo;
    opts.nn3_weighted = cfg.nn3_weighted;
    opts.workers = cfg.workers;
    EvalReport report = leave_one_out(data.graph, data.density, cfg.effective_solver(), opts, cfg.region.name);

    if (!cfg.paths.report_csv.empty()) {
        auto file = open_output(cfg.paths.report_csv);
        write_report_csv(file, report);
    }
    if (!cfg.paths.report_table.empty()) {
        auto file = open_output(cfg.paths.report_table);
        write_report_table(file, report);
    }
    maybe_write_density(cfg, data.density);
    return report;
}

ConditionalDensity run_density(const PipelineConfig& cfg) {
    require_path(cfg.paths.density_out, "density output");
    PreparedData data = prepare(cfg);
    maybe_write_density(cfg, data.density);
    return std::move(data.density);
}

DescriptiveStats run_stats(const PipelineConfig& cfg) {
    const PreparedData data = prepare(cfg);
    const DescriptiveStats stats = descriptive_stats(data.graph);
    if (!cfg.paths.report_table.empty()) {
        auto file = open_output(cfg.paths.report_table);
        write_descriptive_table(file, cfg.region.name, stats);
    }
    return stats;
}

}  // namespace storeloc
