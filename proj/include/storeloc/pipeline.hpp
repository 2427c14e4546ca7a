#pragma once

// End-to-end runs over one region: ingest transactions and seeds, build the
// sharing graph, estimate p(m | r) from known-known pairs, then infer,
// evaluate, or report.

#include <cstddef>
#include <filesystem>
#include <vector>

#include "storeloc/density.hpp"
#include "storeloc/evaluation.hpp"
#include "storeloc/geometry.hpp"
#include "storeloc/io.hpp"
#include "storeloc/sharing_graph.hpp"
#include "storeloc/solver.hpp"

namespace storeloc {

struct PipelinePaths {
    std::filesystem::path transactions;
    std::filesystem::path seeds;
    std::filesystem::path output;        // infer results
    std::filesystem::path density_out;   // density table (optional for infer/evaluate)
    std::filesystem::path report_csv;    // evaluate
    std::filesystem::path report_table;  // evaluate, stats
};

struct PipelineConfig {
    Region region{GeoPoint(0.0, 0.0), "region"};
    double theta = kDefaultTheta;  // overrides solver.theta
    BinningScheme binning = BinningScheme::defaults();
    SolverConfig solver;
    std::size_t min_customers = kDefaultMinCustomers;
    double floor = kDefaultFloor;
    double smoothing = kDefaultSmoothing;
    bool strict_loo = false;
    bool nn3_weighted = true;
    std::size_t workers = 1;
    PipelinePaths paths;

    // Throws ConfigError.
    void validate() const;
    SolverConfig effective_solver() const;
};

struct PreparedData {
    SharingGraph graph;
    ConditionalDensity density;
    LoadStats transactions;
    std::size_t n_seeds = 0;
    // Seeds whose store has no admitted customer set.
    std::size_t n_seeds_dropped = 0;
};

// Shared front half of every run. Throws DataError with no usable known
// stores or when the density cannot be estimated.
PreparedData prepare(const PipelineConfig& cfg);

struct InferOutput {
    std::vector<InferenceResult> results;  // sorted by store key
    std::size_t n_resolved = 0;
    PreparedData data;
};

// Solves every unknown store and writes paths.output (and density_out when
// set). Results do not depend on cfg.workers.
InferOutput run_infer(const PipelineConfig& cfg);

// Leave-one-out over the seeds; writes report_csv and report_table when set.
EvalReport run_evaluate(const PipelineConfig& cfg);

// Estimates and writes the density table to paths.density_out.
ConditionalDensity run_density(const PipelineConfig& cfg);

// Descriptive statistics of the known stores; writes report_table when set.
DescriptiveStats run_stats(const PipelineConfig& cfg);

}  // namespace storeloc
