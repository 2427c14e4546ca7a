#include "storeloc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "storeloc/errors.hpp"

namespace storeloc {

std::string_view to_string(SolveMethod m) {
    switch (m) {
        case SolveMethod::grid: return "grid";
        case SolveMethod::gradient: return "gradient";
        case SolveMethod::single_neighbor: return "single_neighbor";
        case SolveMethod::unresolved: return "unresolved";
    }
    return "unknown";
}

void SolverConfig::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!std::isfinite(theta) || theta < 0.0) throw ConfigError("solver: theta must be finite and >= 0");
    if (!positive(grid_coarse) || !positive(grid_fine)) throw ConfigError("solver: grid pitches must be positive");
    if (grid_fine > grid_coarse) throw ConfigError("solver: grid_fine must not exceed grid_coarse");
    if (!std::isfinite(hull_margin) || hull_margin < 0.0) throw ConfigError("solver: hull_margin must be >= 0");
    if (!positive(gd_step) || !positive(gd_tol)) throw ConfigError("solver: gradient step and tolerance must be positive");
    if (gd_max_iter == 0) throw ConfigError("solver: gd_max_iter must be positive");
}

namespace {

void require_neighbors(const NeighborSet& neighbors) {
    if (neighbors.empty()) throw std::invalid_argument("objective: empty neighbor set");
}

InferenceResult unresolved() {
    return {};
}

InferenceResult single_neighbor(const Neighbor& n, const ConditionalDensity& d) {
    InferenceResult r;
    r.location = n.location;
    r.objective = -d.log_prob(n.m, 0.0);
    r.n_neighbors = 1;
    r.method = SolveMethod::single_neighbor;
    return r;
}

double weighted_ssd(const PlanarPoint& q, const NeighborSet& neighbors) {
    double s = 0.0;
    for (const auto& n : neighbors) {
        const double dx = n.location.x - q.x;
        const double dy = n.location.y - q.y;
        s += n.m * (dx * dx + dy * dy);
    }
    return s;
}

// Lexicographic (objective, weighted ssd, y, x) minimum over scanned points.
struct GridBest {
    PlanarPoint point;
    double f = std::numeric_limits<double>::infinity();
    double ssd = std::numeric_limits<double>::infinity();

    void offer(const PlanarPoint& q, double fq, const NeighborSet& neighbors) {
        if (fq > f) return;
        const double s = weighted_ssd(q, neighbors);
        if (std::tie(fq, s, q.y, q.x) < std::tie(f, ssd, point.y, point.x)) {
            point = q;
            f = fq;
            ssd = s;
        }
    }
};

}  // namespace

double objective(const PlanarPoint& q, const NeighborSet& neighbors, const ConditionalDensity& d) {
    require_neighbors(neighbors);
    double f = 0.0;
    for (const auto& n : neighbors) f -= d.log_prob(n.m, dist(n.location, q));
    return f;
}

double objective_smooth(const PlanarPoint& q, const NeighborSet& neighbors, const ConditionalDensity& d) {
    require_neighbors(neighbors);
    double f = 0.0;
    for (const auto& n : neighbors) f -= d.log_prob_smooth(n.m, dist(n.location, q));
    return f;
}

PlanarPoint objective_gradient(const PlanarPoint& q, const NeighborSet& neighbors, const ConditionalDensity& d) {
    PlanarPoint g;
    for (const auto& n : neighbors) {
        const double r = dist(n.location, q);
        if (r < 1.0) continue;
        const double s = d.d_log_prob_dr(n.m, r);
        g.x += s * (n.location.x - q.x) / r;
        g.y += s * (n.location.y - q.y) / r;
    }
    return g;
}

PlanarPoint weighted_centroid(const NeighborSet& neighbors) {
    require_neighbors(neighbors);
    double w = 0.0;
    PlanarPoint c;
    for (const auto& n : neighbors) {
        c.x += n.m * n.location.x;
        c.y += n.m * n.location.y;
        w += n.m;
    }
    if (!(w > 0.0)) {
        // all weights zero: plain centroid
        c = {};
        for (const auto& n : neighbors) {
            c.x += n.location.x;
            c.y += n.location.y;
        }
        w = static_cast<double>(neighbors.size());
    }
    return {c.x / w, c.y / w};
}

InferenceResult solve_grid(const NeighborSet& neighbors, const ConditionalDensity& d, const SolverConfig& cfg) {
    if (neighbors.empty()) return unresolved();
    if (neighbors.size() == 1) return single_neighbor(neighbors.front(), d);

    double x0 = neighbors.front().location.x, x1 = x0;
    double y0 = neighbors.front().location.y, y1 = y0;
    for (const auto& n : neighbors) {
        x0 = std::min(x0, n.location.x);
        x1 = std::max(x1, n.location.x);
        y0 = std::min(y0, n.location.y);
        y1 = std::max(y1, n.location.y);
    }
    x0 -= cfg.hull_margin;
    y0 -= cfg.hull_margin;
    x1 += cfg.hull_margin;
    y1 += cfg.hull_margin;

    const auto nx = static_cast<long>(std::ceil((x1 - x0) / cfg.grid_coarse));
    const auto ny = static_cast<long>(std::ceil((y1 - y0) / cfg.grid_coarse));
    GridBest coarse;
    for (long iy = 0; iy <= ny; ++iy) {
        for (long ix = 0; ix <= nx; ++ix) {
            const PlanarPoint q{x0 + static_cast<double>(ix) * cfg.grid_coarse,
                                y0 + static_cast<double>(iy) * cfg.grid_coarse};
            coarse.offer(q, objective(q, neighbors, d), neighbors);
        }
    }

    const auto k = static_cast<long>(std::ceil(cfg.grid_coarse / cfg.grid_fine - 1e-9));
    GridBest fine = coarse;
    const PlanarPoint c = coarse.point;
    for (long iy = -k; iy <= k; ++iy) {
        for (long ix = -k; ix <= k; ++ix) {
            const PlanarPoint q{c.x + static_cast<double>(ix) * cfg.grid_fine,
                                c.y + static_cast<double>(iy) * cfg.grid_fine};
            fine.offer(q, objective(q, neighbors, d), neighbors);
        }
    }

    InferenceResult r;
    r.location = fine.point;
    r.objective = fine.f;
    r.n_neighbors = neighbors.size();
    r.method = SolveMethod::grid;
    return r;
}

InferenceResult solve_gradient(const NeighborSet& neighbors, const ConditionalDensity& d, const SolverConfig& cfg,
                               const PlanarPoint& q0, std::vector<double>* trace) {
    if (neighbors.empty()) return unresolved();
    if (neighbors.size() == 1) return single_neighbor(neighbors.front(), d);
    if (!is_finite(q0)) throw std::invalid_argument("solve_gradient: non-finite start point");

    double scale = 0.0;
    for (const auto& n : neighbors) scale += dist(n.location, q0);
    scale = std::max(1.0, scale / static_cast<double>(neighbors.size()));
    double eta = cfg.gd_step * scale * scale;

    PlanarPoint q = q0;
    double f = objective_smooth(q, neighbors, d);
    if (trace) trace->assign(1, f);

    InferenceResult r;
    r.n_neighbors = neighbors.size();
    r.method = SolveMethod::gradient;
    r.converged = false;

    std::size_t it = 0;
    while (it < cfg.gd_max_iter) {
        ++it;
        const PlanarPoint g = objective_gradient(q, neighbors, d);
        const double gnorm = std::hypot(g.x, g.y);
        if (eta * gnorm < cfg.gd_tol) {
            r.converged = true;
            break;
        }
        bool accepted = false;
        while (eta * gnorm >= cfg.gd_tol) {
            const PlanarPoint cand{q.x - eta * g.x, q.y - eta * g.y};
            const double fc = objective_smooth(cand, neighbors, d);
            if (fc < f) {
                q = cand;
                f = fc;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) {
            // no decrease at any step longer than the tolerance
            r.converged = true;
            break;
        }
        if (trace) trace->push_back(f);
    }

    r.location = q;
    r.objective = objective(q, neighbors, d);
    r.iterations = it;
    return r;
}

InferenceResult solve_gradient(const NeighborSet& neighbors, const ConditionalDensity& d, const SolverConfig& cfg) {
    if (neighbors.empty()) return unresolved();
    return solve_gradient(neighbors, d, cfg, weighted_centroid(neighbors));
}

InferenceResult solve(const NeighborSet& neighbors, const ConditionalDensity& d, const SolverConfig& cfg) {
    return cfg.use_gradient ? solve_gradient(neighbors, d, cfg) : solve_grid(neighbors, d, cfg);
}

namespace {

double cross(const PlanarPoint& o, const PlanarPoint& a, const PlanarPoint& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double segment_distance(const PlanarPoint& q, const PlanarPoint& a, const PlanarPoint& b) {
    const double vx = b.x - a.x;
    const double vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    if (len2 == 0.0) return dist(q, a);
    const double t = std::clamp(((q.x - a.x) * vx + (q.y - a.y) * vy) / len2, 0.0, 1.0);
    return dist(q, {a.x + t * vx, a.y + t * vy});
}

}  // namespace

std::vector<PlanarPoint> convex_hull(std::span<const PlanarPoint> points) {
    if (points.empty()) throw std::invalid_argument("convex_hull: no points");
    std::vector<PlanarPoint> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](const PlanarPoint& a, const PlanarPoint& b) {
        return std::tie(a.x, a.y) < std::tie(b.x, b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;

    // Andrew's monotone chain
    std::vector<PlanarPoint> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double distance_to_hull(const PlanarPoint& q, std::span<const PlanarPoint> hull) {
    if (hull.empty()) throw std::invalid_argument("distance_to_hull: empty hull");
    if (hull.size() == 1) return dist(q, hull[0]);
    if (hull.size() == 2) return segment_distance(q, hull[0], hull[1]);

    bool inside = true;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        if (cross(a, b, q) < 0) inside = false;
        best = std::min(best, segment_distance(q, a, b));
    }
    return inside ? 0.0 : best;
}

}  // namespace storeloc
