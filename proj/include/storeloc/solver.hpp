#pragma once

// Per-store maximum-likelihood location solve. The objective for an unknown
// store at q is  sum_i -ln p(m_i | dist(p_i, q))  over its neighbor set.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "storeloc/density.hpp"
#include "storeloc/geometry.hpp"
#include "storeloc/sharing_graph.hpp"

namespace storeloc {

enum class SolveMethod { grid, gradient, single_neighbor, unresolved };

std::string_view to_string(SolveMethod m);

struct SolverConfig {
    double theta = kDefaultTheta;
    double grid_coarse = 50.0;   // m
    double grid_fine = 5.0;      // m
    double hull_margin = 100.0;  // m
    // Initial gradient step, in units of the squared mean neighbor distance
    // from the start point.
    double gd_step = 1.0;
    double gd_tol = 0.5;  // m
    std::size_t gd_max_iter = 1000;
    bool use_gradient = false;

    // Throws ConfigError.
    void validate() const;
};

struct InferenceResult {
    StoreRef store;
    std::optional<PlanarPoint> location;
    double objective = 0.0;
    std::size_t n_neighbors = 0;
    SolveMethod method = SolveMethod::unresolved;
    bool converged = true;
    std::size_t iterations = 0;

    friend bool operator==(const InferenceResult&, const InferenceResult&) = default;
};

// Piecewise-constant objective; the neighbor set must be non-empty.
double objective(const PlanarPoint& q, const NeighborSet& neighbors, const ConditionalDensity& d);
// Same sum using the interpolated log-density.
double objective_smooth(const PlanarPoint& q, const NeighborSet& neighbors, const ConditionalDensity& d);

// Gradient of objective_smooth:  sum_i s_i (p_i - q) / r_i  with s_i the slope
// of the smooth log-density at r_i. Terms with r_i < 1 m contribute nothing.
PlanarPoint objective_gradient(const PlanarPoint& q, const NeighborSet& neighbors, const ConditionalDensity& d);

// Sum m_i p_i / sum m_i.
PlanarPoint weighted_centroid(const NeighborSet& neighbors);

// Coarse-to-fine grid search over the neighbors' bounding box expanded by
// hull_margin. Equal objective values are ordered by the m-weighted sum of
// squared distances to the neighbors, then by y, then by x.
InferenceResult solve_grid(const NeighborSet& neighbors, const ConditionalDensity& d, const SolverConfig& cfg);

// Gradient descent on the smooth objective with step halving. When trace is
// given it receives the objective after every accepted iterate, starting
// with q0.
InferenceResult solve_gradient(const NeighborSet& neighbors, const ConditionalDensity& d, const SolverConfig& cfg,
                               const PlanarPoint& q0, std::vector<double>* trace = nullptr);
InferenceResult solve_gradient(const NeighborSet& neighbors, const ConditionalDensity& d, const SolverConfig& cfg);

// Dispatches on cfg.use_gradient.
InferenceResult solve(const NeighborSet& neighbors, const ConditionalDensity& d, const SolverConfig& cfg);

// Convex hull in counterclockwise order without collinear vertices. A single
// distinct point yields one vertex, collinear input yields the two endpoints.
std::vector<PlanarPoint> convex_hull(std::span<const PlanarPoint> points);

// 0 inside or on the hull, otherwise the distance to the nearest edge.
double distance_to_hull(const PlanarPoint& q, std::span<const PlanarPoint> hull);

}  // namespace storeloc
