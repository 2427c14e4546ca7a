// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "storeloc/density.hpp"
#include "storeloc/evaluation.hpp"
#include "storeloc/io.hpp"
#include "storeloc/pipeline.hpp"
#include "storeloc/random.hpp"
#include "storeloc/sharing_graph.hpp"
#include "storeloc/solver.hpp"
#include "storeloc/synth.hpp"
#include "synth_shape.hpp"
#include "temp_dir.hpp"

using namespace storeloc;

namespace {

// Pinned tolerances and limits.
constexpr double kRowSumTol = 1e-9;
constexpr double kGradientRelTol = 1e-4;
constexpr double kHullSlack = 5.0 * 1.4142135623730951;  // grid_fine * sqrt(2)
constexpr double kBruteForcePitch = 1.0;
constexpr double kLambdaControl = 1e12;
constexpr double kMaxControlCorrelation = 0.1;
constexpr int kSeedsRequired = 8;
constexpr double kNeighborhoodFactor = 2.0;

struct Outcome {
    bool pass = true;
    std::string detail;
};

Outcome fail(std::string detail) { return {false, std::move(detail)}; }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c);
    return buf;
}

// 1: sharing indices against set arithmetic
Outcome sharing_oracle() {
    Rng rng(1001, 0);
    for (int t = 0; t < 100; ++t) {
        std::set<std::string> sa, sb;
        const auto universe = 10 + rng.below(500);
        const auto na = 1 + rng.below(200);
        const auto nb = 1 + rng.below(200);
        for (std::uint64_t i = 0; i < na; ++i) sa.insert("u" + std::to_string(rng.below(universe)));
        for (std::uint64_t i = 0; i < nb; ++i) sb.insert("u" + std::to_string(rng.below(universe)));
        CustomerIndex index;
        for (const auto& u : sa) index.add({u, "m", "a"});
        for (const auto& u : sb) index.add({u, "m", "b"});
        const auto sets = index.finish(1);
        if (sets.size() != 2) return fail("customer sets not built");
        const auto o = oracle::set_sharing(sa, sb);
        const double j = jaccard(sets[0], sets[1]);
        const double m = j_min(sets[0], sets[1]);
        if (j != o.jaccard || m != o.j_min) return fail("mismatch on pair " + std::to_string(t));
        if (m < j) return fail("j_min < jaccard on pair " + std::to_string(t));
    }
    return {true, "100 pairs exact"};
}

// 2: row-stochastic, floor-bounded, order-independent estimates
Outcome density_normalization() {
    std::vector<std::vector<std::pair<double, double>>> samples;
    Rng rng(1002, 0);
    for (int k = 0; k < 5; ++k) {
        std::vector<std::pair<double, double>> pairs;
        const auto n = 1 + rng.below(5000);
        for (std::uint64_t i = 0; i < n; ++i) {
            const double r = rng.uniform(0.0, 15000.0);
            pairs.emplace_back(std::min(1.0, std::exp(-r / 2000.0) * rng.uniform() * 1.2), r);
        }
        samples.push_back(std::move(pairs));
    }
    samples.push_back({{1.0, 0.0}});
    for (auto& pairs : samples) {
        for (double floor : {1e-6, 1e-3}) {
            const auto d = estimate(pairs, BinningScheme::defaults(), floor);
            const auto& s = d.scheme();
            for (std::size_t i = 0; i < s.n_r(); ++i) {
                double sum = 0.0;
                for (std::size_t j = 0; j < s.n_m(); ++j) {
                    if (d.prob(i, j) < floor) return fail("cell below floor");
                    sum += d.prob(i, j);
                }
                if (std::abs(sum - 1.0) > kRowSumTol) return fail(fmt("row sum off by %.3g", sum - 1.0));
            }
            auto a = pairs;
            auto b = pairs;
            Rng shuffle(1002, 1);
            for (std::size_t i = a.size(); i > 1; --i) std::swap(a[i - 1], a[shuffle.below(i)]);
            for (std::size_t i = b.size(); i > 1; --i) std::swap(b[i - 1], b[shuffle.below(i)]);
            const auto da = estimate(a, s, floor);
            const auto db = estimate(b, s, floor);
            if (!std::equal(da.table().begin(), da.table().end(), db.table().begin(), db.table().end()) ||
                !std::equal(da.table().begin(), da.table().end(), d.table().begin(), d.table().end())) {
                return fail("shuffled samples gave a different table");
            }
        }
    }
    return {true, "6 samples x 2 floors"};
}

ConditionalDensity synthetic_density(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    const auto city = generate(cfg, 0);
    const auto sets = build_customer_sets(city.records, kDefaultMinCustomers);
    std::map<StoreRef, PlanarPoint> known;
    for (const auto& s : sets) known[s.store] = city.truth.at(s.store);
    const auto g = build_graph(sets, known, kDefaultTheta, 0);
    return estimate(g.known_pair_samples(), BinningScheme::defaults());
}

// 3: analytic gradient against central differences
Outcome gradient_fidelity() {
    const auto d = synthetic_density(1003);
    const auto& s = d.scheme();
    Rng rng(1003, 0);
    int done = 0;
    double worst = 0.0;
    while (done < 200) {
        NeighborSet nbrs;
        const auto n = 1 + rng.below(6);
        for (std::uint64_t i = 0; i < n; ++i) {
            nbrs.push_back({{rng.uniform(-6000, 6000), rng.uniform(-6000, 6000)}, rng.uniform(0.15, 1.0), i});
        }
        const PlanarPoint q{rng.uniform(-6000, 6000), rng.uniform(-6000, 6000)};
        bool off_knot = true;
        for (const auto& nb : nbrs) {
            const double r = dist(nb.location, q);
            if (r < 2.0) off_knot = false;
            for (std::size_t i = 0; i < s.n_r(); ++i) off_knot &= std::abs(r - s.r_center(i)) > 1.0;
        }
        if (!off_knot) continue;
        ++done;
        const double h = 1e-2;
        const PlanarPoint g = objective_gradient(q, nbrs, d);
        const double fx = (objective_smooth({q.x + h, q.y}, nbrs, d) - objective_smooth({q.x - h, q.y}, nbrs, d)) / (2 * h);
        const double fy = (objective_smooth({q.x, q.y + h}, nbrs, d) - objective_smooth({q.x, q.y - h}, nbrs, d)) / (2 * h);
        const double fd_norm = std::hypot(fx, fy);
        const double err = std::hypot(g.x - fx, g.y - fy);
        if (fd_norm == 0.0) {
            if (std::hypot(g.x, g.y) != 0.0) return fail("nonzero gradient in a flat zone");
            continue;
        }
        worst = std::max(worst, err / fd_norm);
        if (err > kGradientRelTol * fd_norm) return fail(fmt("relative error %.3g", err / fd_norm));
    }
    return {true, fmt("200 configurations, worst relative error %.2g", worst)};
}

NeighborSet random_set(Rng& rng, double half) {
    NeighborSet nbrs;
    const auto n = 3 + rng.below(6);
    for (std::uint64_t i = 0; i < n; ++i) {
        nbrs.push_back({{rng.uniform(-half, half), rng.uniform(-half, half)}, rng.uniform(0.1500001, 1.0), i});
    }
    return nbrs;
}

// 4: optimum inside the hull of the neighbors
Outcome hull_property() {
    const auto d = oracle::monotone_density(kDefaultTheta);
    if (!d.is_monotone_above(kDefaultTheta).monotone) return fail("reference density is not monotone");
    const SolverConfig cfg;
    Rng rng(1004, 0);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const auto nbrs = random_set(rng, 3000.0);
        std::vector<PlanarPoint> pts;
        for (const auto& n : nbrs) pts.push_back(n.location);
        const auto r = solve_grid(nbrs, d, cfg);
        if (!r.location) return fail("no location");
        const double dh = distance_to_hull(*r.location, convex_hull(pts));
        worst = std::max(worst, dh);
        if (dh > kHullSlack) return fail(fmt("instance %.0f: %.2f m outside the hull", t, dh));
    }
    return {true, fmt("50 sets, worst distance %.2f m", worst)};
}

// 5: coarse-to-fine grid against an exhaustive 1 m search
Outcome grid_optimality() {
    const auto d = oracle::monotone_density(kDefaultTheta);
    const SolverConfig cfg;
    Rng rng(1005, 0);
    double worst_gap = 0.0;
    for (int t = 0; t < 20; ++t) {
        const auto nbrs = random_set(rng, 800.0);
        double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
        for (const auto& n : nbrs) {
            x0 = std::min(x0, n.location.x);
            x1 = std::max(x1, n.location.x);
            y0 = std::min(y0, n.location.y);
            y1 = std::max(y1, n.location.y);
        }
        const auto best = oracle::brute_force(nbrs, d, x0 - cfg.hull_margin, x1 + cfg.hull_margin,
                                              y0 - cfg.hull_margin, y1 + cfg.hull_margin, kBruteForcePitch);
        double bound = 0.0;
        for (double dy = -cfg.grid_fine; dy <= cfg.grid_fine; dy += kBruteForcePitch) {
            for (double dx = -cfg.grid_fine; dx <= cfg.grid_fine; dx += kBruteForcePitch) {
                bound = std::max(bound, oracle::cell_objective({best.point.x + dx, best.point.y + dy}, nbrs, d) - best.f);
            }
        }
        const auto r = solve_grid(nbrs, d, cfg);
        const double gap = r.objective - best.f;
        worst_gap = std::max(worst_gap, gap);
        if (gap > bound + 1e-9) return fail(fmt("instance %.0f: gap %.4f exceeds bound %.4f", t, gap, bound));
    }
    return {true, fmt("20 instances, worst objective gap %.4f", worst_gap)};
}

// 6: exactly one neighbor above theta
Outcome single_neighbor_collapse() {
    std::size_t cases = 0;
    for (std::uint64_t seed : {1006u, 1007u, 1008u}) {
        SynthConfig sc;
        sc.seed = seed;
        const auto city = generate(sc, 0);
        const auto split = split_known(city, 0.5, seed);
        const auto sets = build_customer_sets(city.records, kDefaultMinCustomers);
        std::map<StoreRef, PlanarPoint> known;
        for (const auto& s : sets) {
            if (split.known.count(s.store)) known[s.store] = split.known.at(s.store);
        }
        for (double theta : {0.15, 0.4, 0.6}) {
            const auto g = build_graph(sets, known, theta, 0);
            const auto d = estimate(g.known_pair_samples(), BinningScheme::defaults());
            SolverConfig grid;
            grid.theta = theta;
            SolverConfig grad = grid;
            grad.use_gradient = true;
            for (std::size_t j = 0; j < g.unknown().size(); ++j) {
                const auto nbrs = g.unknown_neighbors(j);
                if (nbrs.size() != 1) continue;
                ++cases;
                for (const auto& cfg : {grid, grad}) {
                    const auto r = solve(nbrs, d, cfg);
                    if (!r.location || !(*r.location == g.known()[nbrs[0].known_index].location)) {
                        return fail("store " + to_string(g.unknown()[j]) + " did not collapse");
                    }
                }
            }
        }
    }
    if (cases == 0) return fail("no single-neighbor stores found");
    return {true, std::to_string(cases) + " single-neighbor stores, grid and gradient"};
}

// 7: results independent of the worker count
Outcome worker_determinism() {
    TempDir tmp;
    SynthConfig sc;
    sc.seed = 1009;
    const auto city = generate(sc, 0);
    const auto split = split_known(city, 0.5, 1009);
    const Region region{GeoPoint(37.7749, -122.4194), "synthetic"};
    {
        std::ofstream out(tmp.file("tx.jsonl"));
        write_transactions(out, city.records);
    }
    {
        std::ofstream out(tmp.file("seeds.jsonl"));
        write_seeds(out, split.known, region);
    }
    std::vector<std::string> outputs;
    for (std::size_t workers : {1u, 4u, 8u}) {
        for (bool gradient : {false, true}) {
            PipelineConfig cfg;
            cfg.region = region;
            cfg.workers = workers;
            cfg.solver.use_gradient = gradient;
            cfg.paths.transactions = tmp.file("tx.jsonl");
            cfg.paths.seeds = tmp.file("seeds.jsonl");
            cfg.paths.output = tmp.file("out_" + std::to_string(workers) + (gradient ? "_gd" : "") + ".jsonl");
            run_infer(cfg);
            outputs.push_back(slurp(cfg.paths.output));
        }
    }
    for (std::size_t i = 2; i < outputs.size(); ++i) {
        if (outputs[i] != outputs[i % 2]) return fail("result files differ across worker counts");
    }
    if (outputs[0].empty()) return fail("empty result file");
    return {true, "1, 4 and 8 workers byte-identical (grid and gradient)"};
}

// 8: distance decay of sharing in generated data
Outcome synthetic_shape() {
    SynthConfig sc;
    const auto shape = oracle::pair_shape(generate(sc, 0));
    if (shape.near_pairs == 0 || shape.far_pairs == 0) return fail("empty distance band");
    if (!(shape.near_mean > shape.far_mean)) return fail(fmt("near %.3f <= far %.3f", shape.near_mean, shape.far_mean));
    if (!(shape.correlation < 0.0)) return fail(fmt("correlation %.3f not negative", shape.correlation));
    sc.decay_scale = kLambdaControl;
    const auto control = oracle::pair_shape(generate(sc, 0));
    if (!(std::abs(control.correlation) < kMaxControlCorrelation)) {
        return fail(fmt("control correlation %.3f", control.correlation));
    }
    return {true, fmt("near %.3f > far %.3f, corr %.3f", shape.near_mean, shape.far_mean, shape.correlation) +
                      fmt(", control corr %.3f", control.correlation)};
}

std::vector<EvalReport> g_reports;
std::vector<std::size_t> g_report_stores;

// 9: MaxLike against the nearest-neighbor baseline over 10 cities
Outcome method_ordering() {
    int beats_nn1 = 0;
    int precise = 0;
    std::ostringstream detail;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SynthConfig sc;
        sc.seed = seed;
        const auto city = generate(sc, 0);
        const auto split = split_known(city, 0.5, seed);
        const auto sets = build_customer_sets(city.records, kDefaultMinCustomers);
        std::map<StoreRef, PlanarPoint> known;
        for (const auto& s : sets) {
            if (split.known.count(s.store)) known[s.store] = split.known.at(s.store);
        }
        const auto g = build_graph(sets, known, kDefaultTheta, 0);
        const auto d = estimate(g.known_pair_samples(), BinningScheme::defaults());
        EvalOptions opts;
        opts.workers = 0;
        auto report = leave_one_out(g, d, SolverConfig{}, opts, "seed" + std::to_string(seed));
        const double ml = report.per_method.at(EvalMethod::maxlike).median_error_m;
        const double n1 = report.per_method.at(EvalMethod::nn1).median_error_m;
        const double nn_dist = report.descriptive.mean_nn_dist_m;
        beats_nn1 += ml <= n1;
        precise += ml <= kNeighborhoodFactor * nn_dist;
        detail << (seed > 1 ? " " : "") << static_cast<long>(std::lround(ml)) << "/" << static_cast<long>(std::lround(n1));
        g_report_stores.push_back(g.known().size());
        g_reports.push_back(std::move(report));
    }
    const bool ok = beats_nn1 >= kSeedsRequired && precise >= kSeedsRequired;
    return {ok, "MaxLike<=NN-1 in " + std::to_string(beats_nn1) + "/10, <=2x NN distance in " +
                    std::to_string(precise) + "/10 (median m, MaxLike/NN-1: " + detail.str() + ")"};
}

// 10: every store counted once per method; median against a sort oracle
Outcome bookkeeping() {
    if (g_reports.empty()) return fail("no reports to check");
    for (std::size_t k = 0; k < g_reports.size(); ++k) {
        for (const auto& [m, x] : g_reports[k].per_method) {
            if (x.n_evaluated + x.n_unresolved != g_report_stores[k]) return fail("count mismatch");
        }
        std::size_t chain_total = 0;
        for (const auto& [chain, per] : g_reports[k].per_chain) {
            const auto& x = per.at(EvalMethod::maxlike);
            chain_total += x.n_evaluated + x.n_unresolved;
        }
        if (chain_total != g_report_stores[k]) return fail("per-chain counts do not add up");
    }
    // a graph with an isolated known store
    const std::vector<CustomerSet> sets{CustomerSet::from_users({"c", "a"}, {1, 2, 3}),
                                        CustomerSet::from_users({"c", "b"}, {1, 2, 3}),
                                        CustomerSet::from_users({"c", "z"}, {7, 8, 9})};
    const std::map<StoreRef, PlanarPoint> known{{{"c", "a"}, {0, 0}}, {{"c", "b"}, {300, 0}}, {{"c", "z"}, {0, 900}}};
    const auto g = build_graph(sets, known, kDefaultTheta);
    const auto report = leave_one_out(g, estimate(g.known_pair_samples(), BinningScheme::defaults()), SolverConfig{});
    for (const auto& [m, x] : report.per_method) {
        if (x.n_evaluated != 2 || x.n_unresolved != 1) return fail("isolated store not counted as unresolved");
    }

    Rng rng(1010, 0);
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> v(1 + rng.below(500));
        for (auto& x : v) x = rng.uniform(-1e6, 1e6);
        if (rng.bernoulli(0.2) && v.size() > 1) v[1] = v[0];
        if (median(v) != oracle::sorted_median(v)) return fail("median mismatch on list " + std::to_string(t));
    }
    return {true, std::to_string(g_reports.size() + 1) + " reports, 1000 median lists"};
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0 = no limit
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "sharing index oracle", 1.0, sharing_oracle},
        {2, "density normalization", 1.0, density_normalization},
        {3, "gradient fidelity", 5.0, gradient_fidelity},
        {4, "hull property", 30.0, hull_property},
        {5, "grid optimality", 120.0, grid_optimality},
        {6, "single-neighbor collapse", 0.0, single_neighbor_collapse},
        {7, "worker determinism", 0.0, worker_determinism},
        {8, "synthetic sharing shape", 60.0, synthetic_shape},
        {9, "method ordering", 600.0, method_ordering},
        {10, "evaluation bookkeeping", 0.0, bookkeeping},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_s > 0.0 && secs > c.limit_s) {
            o.pass = false;
            o.detail += fmt(" [over time limit %.0f s]", c.limit_s);
        }
        failures += !o.pass;
        std::printf("%s  %2d  %-26s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
