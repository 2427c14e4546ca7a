#pragma once

// Leave-one-out benchmark over stores with known locations: every known store
// is hidden in turn and re-located from the others by the nearest-neighbor
// baselines and by the maximum-likelihood solver.

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "storeloc/density.hpp"
#include "storeloc/sharing_graph.hpp"
#include "storeloc/solver.hpp"

namespace storeloc {

enum class EvalMethod { nn1, nn3, maxlike };

std::string_view to_string(EvalMethod m);     // "nn1", "nn3", "maxlike"
std::string_view display_name(EvalMethod m);  // "NN-1", "NN-3", "MaxLike"
std::optional<EvalMethod> parse_eval_method(std::string_view s);

struct MethodMetrics {
    double median_error_m = std::numeric_limits<double>::quiet_NaN();
    double mean_error_m = std::numeric_limits<double>::quiet_NaN();
    std::size_t n_evaluated = 0;
    std::size_t n_unresolved = 0;
};

struct DescriptiveStats {
    std::size_t n_stores = 0;
    double median_nn_dist_m = 0.0;
    double mean_nn_dist_m = 0.0;
    double mean_jmin_nn = 0.0;
};

// Displacement error per method for one held-out store; nullopt when the
// method could not place it.
struct StoreEvaluation {
    StoreRef store;
    std::map<EvalMethod, std::optional<double>> error_m;
};

struct EvalReport {
    std::string region;
    std::map<EvalMethod, MethodMetrics> per_method;
    std::map<std::string, std::map<EvalMethod, MethodMetrics>> per_chain;
    DescriptiveStats descriptive;
    std::vector<StoreEvaluation> stores;
};

struct EvalOptions {
    std::set<EvalMethod> methods{EvalMethod::nn1, EvalMethod::nn3, EvalMethod::maxlike};
    // Re-estimate the density without the held-out store's pairs.
    bool strict = false;
    // NN-3 as the m-weighted centroid (true) or the plain centroid (false).
    bool nn3_weighted = true;
    std::size_t workers = 1;
};

// Location of the neighbor with the largest m; ties go to the smaller store
// key. nullopt for an empty set.
std::optional<PlanarPoint> nn1(const NeighborSet& neighbors);
// Centroid of the (up to) three neighbors with the largest m.
std::optional<PlanarPoint> nn3(const NeighborSet& neighbors, bool weighted = true);

// Neighbor set of a store in the graph: against the known stores for an
// unknown target, against the other known stores for a known target.
NeighborSet neighbors_of(const StoreRef& target, const SharingGraph& graph);
std::optional<PlanarPoint> nn1(const StoreRef& target, const SharingGraph& graph);
std::optional<PlanarPoint> nn3(const StoreRef& target, const SharingGraph& graph, bool weighted = true);

// Mean of the two middle order statistics for even lengths. Throws
// std::invalid_argument on an empty list.
double median(std::span<const double> values);

// Throws DataError with fewer than two known stores.
DescriptiveStats descriptive_stats(const SharingGraph& graph);

// Throws DataError with fewer than two known stores (three in strict mode).
EvalReport leave_one_out(const SharingGraph& graph, const ConditionalDensity& d, const SolverConfig& cfg,
                         const EvalOptions& options = {}, std::string region = {});

// One row per method and one per chain x method.
void write_report_csv(std::ostream& out, const EvalReport& report);
// Aligned text tables: methods, MaxLike by chain, all methods by chain, and
// descriptive statistics.
void write_report_table(std::ostream& out, const EvalReport& report);
void write_descriptive_table(std::ostream& out, const std::string& region, const DescriptiveStats& stats);

}  // namespace storeloc
