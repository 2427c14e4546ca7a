#include "storeloc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "storeloc/errors.hpp"
#include "storeloc/parallel.hpp"

namespace storeloc {

std::string_view to_string(EvalMethod m) {
    switch (m) {
        case EvalMethod::nn1: return "nn1";
        case EvalMethod::nn3: return "nn3";
        case EvalMethod::maxlike: return "maxlike";
    }
    return "unknown";
}

std::string_view display_name(EvalMethod m) {
    switch (m) {
        case EvalMethod::nn1: return "NN-1";
        case EvalMethod::nn3: return "NN-3";
        case EvalMethod::maxlike: return "MaxLike";
    }
    return "unknown";
}

std::optional<EvalMethod> parse_eval_method(std::string_view s) {
    for (auto m : {EvalMethod::nn1, EvalMethod::nn3, EvalMethod::maxlike}) {
        if (s == to_string(m)) return m;
    }
    return std::nullopt;
}

namespace {

// Descending m, then ascending store key.
NeighborSet ranked(const NeighborSet& neighbors) {
    NeighborSet out = neighbors;
    std::stable_sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.m != b.m) return a.m > b.m;
        return a.known_index < b.known_index;
    });
    return out;
}

}  // namespace

std::optional<PlanarPoint> nn1(const NeighborSet& neighbors) {
    if (neighbors.empty()) return std::nullopt;
    return ranked(neighbors).front().location;
}

std::optional<PlanarPoint> nn3(const NeighborSet& neighbors, bool weighted) {
    if (neighbors.empty()) return std::nullopt;
    NeighborSet top = ranked(neighbors);
    top.resize(std::min<std::size_t>(3, top.size()));
    if (!weighted) {
        for (auto& n : top) n.m = 1.0;
    }
    return weighted_centroid(top);
}

NeighborSet neighbors_of(const StoreRef& target, const SharingGraph& graph) {
    if (auto j = graph.find_unknown(target)) return graph.unknown_neighbors(*j);
    if (auto i = graph.find_known(target)) return graph.known_neighbors(*i);
    return {};
}

std::optional<PlanarPoint> nn1(const StoreRef& target, const SharingGraph& graph) {
    return nn1(neighbors_of(target, graph));
}

std::optional<PlanarPoint> nn3(const StoreRef& target, const SharingGraph& graph, bool weighted) {
    return nn3(neighbors_of(target, graph), weighted);
}

double median(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("median of an empty list");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

DescriptiveStats descriptive_stats(const SharingGraph& graph) {
    const auto& known = graph.known();
    if (known.size() < 2) throw DataError("descriptive statistics need at least two known stores");
    std::vector<double> nn_dist(known.size());
    double jmin_sum = 0.0;
    for (std::size_t i = 0; i < known.size(); ++i) {
        std::size_t best = i;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < known.size(); ++k) {
            if (k == i) continue;
            const double dk = dist(known[i].location, known[k].location);
            if (dk < best_d) {
                best_d = dk;
                best = k;
            }
        }
        nn_dist[i] = best_d;
        jmin_sum += graph.known_sharing(i, best);
    }
    DescriptiveStats s;
    s.n_stores = known.size();
    s.median_nn_dist_m = median(nn_dist);
    s.mean_nn_dist_m = std::accumulate(nn_dist.begin(), nn_dist.end(), 0.0) / static_cast<double>(known.size());
    s.mean_jmin_nn = jmin_sum / static_cast<double>(known.size());
    return s;
}

namespace {

MethodMetrics aggregate(const std::vector<std::optional<double>>& errors) {
    MethodMetrics m;
    std::vector<double> ok;
    for (const auto& e : errors) {
        if (e) {
            ok.push_back(*e);
        } else {
            ++m.n_unresolved;
        }
    }
    m.n_evaluated = ok.size();
    if (!ok.empty()) {
        m.median_error_m = median(ok);
        std::sort(ok.begin(), ok.end());
        m.mean_error_m = std::accumulate(ok.begin(), ok.end(), 0.0) / static_cast<double>(ok.size());
    }
    return m;
}

}  // namespace

EvalReport leave_one_out(const SharingGraph& graph, const ConditionalDensity& d, const SolverConfig& cfg,
                         const EvalOptions& options, std::string region) {
    const auto& known = graph.known();
    if (known.size() < 2) throw DataError("leave-one-out needs at least two known stores");
    if (options.strict && known.size() < 3) {
        throw DataError("strict leave-one-out needs at least three known stores");
    }
    cfg.validate();

    std::vector<StoreEvaluation> stores(known.size());
    parallel_for(known.size(), options.workers, [&](std::size_t i) {
        StoreEvaluation& ev = stores[i];
        ev.store = known[i].store;
        const PlanarPoint truth = known[i].location;
        const NeighborSet nbrs = graph.known_neighbors(i);
        auto score = [&](const std::optional<PlanarPoint>& p) -> std::optional<double> {
            if (!p) return std::nullopt;
            return dist(*p, truth);
        };
        for (EvalMethod m : options.methods) {
            switch (m) {
                case EvalMethod::nn1:
                    ev.error_m[m] = score(nn1(nbrs));
                    break;
                case EvalMethod::nn3:
                    ev.error_m[m] = score(nn3(nbrs, options.nn3_weighted));
                    break;
                case EvalMethod::maxlike: {
                    if (options.strict) {
                        const auto samples = graph.known_pair_samples(i);
                        const auto held_out = estimate(samples, d.scheme(), d.floor(), d.smoothing());
                        ev.error_m[m] = score(solve(nbrs, held_out, cfg).location);
                    } else {
                        ev.error_m[m] = score(solve(nbrs, d, cfg).location);
                    }
                    break;
                }
            }
        }
    });

    EvalReport report;
    report.region = std::move(region);
    for (EvalMethod m : options.methods) {
        std::vector<std::optional<double>> all;
        std::map<std::string, std::vector<std::optional<double>>> by_chain;
        for (const auto& ev : stores) {
            const auto& e = ev.error_m.at(m);
            all.push_back(e);
            by_chain[ev.store.merchant].push_back(e);
        }
        report.per_method[m] = aggregate(all);
        for (const auto& [chain, errs] : by_chain) report.per_chain[chain][m] = aggregate(errs);
    }
    report.descriptive = descriptive_stats(graph);
    report.stores = std::move(stores);
    return report;
}

namespace {

std::string fixed(double v, int precision) {
    if (std::isnan(v)) return "";
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

std::string cell(double v) {
    if (std::isnan(v)) return "-";
    return fixed(v, 0);
}

void write_metrics_row(std::ostream& out, const std::string& region, const std::string& scope,
                       const std::string& group, EvalMethod m, const MethodMetrics& x) {
    out << region << ',' << scope << ',' << group << ',' << to_string(m) << ',' << fixed(x.median_error_m, 3) << ','
        << fixed(x.mean_error_m, 3) << ',' << x.n_evaluated << ',' << x.n_unresolved << '\n';
}

void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& row : rows) {
        width.resize(std::max(width.size(), row.size()), 0);
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == 0) {
                line += row[c] + std::string(width[c] - row[c].size(), ' ');
            } else {
                line += "  " + std::string(width[c] - row[c].size(), ' ') + row[c];
            }
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << '\n';
    }
}

std::string region_label(const std::string& region) {
    return region.empty() ? std::string("region") : region;
}

}  // namespace

void write_report_csv(std::ostream& out, const EvalReport& report) {
    out << "region,scope,group,method,median_error_m,mean_error_m,n_evaluated,n_unresolved\n";
    const std::string region = region_label(report.region);
    for (const auto& [m, x] : report.per_method) write_metrics_row(out, region, "region", "all", m, x);
    for (const auto& [chain, per] : report.per_chain) {
        for (const auto& [m, x] : per) write_metrics_row(out, region, "chain", chain, m, x);
    }
}

void write_descriptive_table(std::ostream& out, const std::string& region, const DescriptiveStats& s) {
    out << "Descriptive statistics\n";
    print_table(out, {{"City", "n", "distance (median)", "distance (mean)", "customer sharing (J_min)"},
                      {region_label(region), std::to_string(s.n_stores), cell(s.median_nn_dist_m),
                       cell(s.mean_nn_dist_m), fixed(s.mean_jmin_nn, 3)}});
}

void write_report_table(std::ostream& out, const EvalReport& report) {
    const std::string region = region_label(report.region);

    out << "Median displacement error (m)\n";
    std::vector<std::vector<std::string>> rows{{"City"}};
    std::vector<std::string> row{region};
    for (const auto& [m, x] : report.per_method) {
        rows[0].emplace_back(display_name(m));
        row.push_back(cell(x.median_error_m));
    }
    rows.push_back(row);
    print_table(out, rows);

    if (report.per_method.count(EvalMethod::maxlike)) {
        out << "\nMedian displacement error (m) by chain, MaxLike\n";
        rows = {{"city/chain"}};
        row = {region};
        for (const auto& [chain, per] : report.per_chain) {
            rows[0].push_back(chain);
            row.push_back(cell(per.at(EvalMethod::maxlike).median_error_m));
        }
        rows.push_back(row);
        print_table(out, rows);
    }

    out << "\nMedian displacement error (m) by chain\n";
    rows = {{"chain"}};
    for (const auto& [m, x] : report.per_method) rows[0].emplace_back(display_name(m));
    rows[0].emplace_back("n");
    for (const auto& [chain, per] : report.per_chain) {
        row = {chain};
        std::size_t n = 0;
        for (const auto& [m, x] : per) {
            row.push_back(cell(x.median_error_m));
            n = x.n_evaluated + x.n_unresolved;
        }
        row.push_back(std::to_string(n));
        rows.push_back(row);
    }
    print_table(out, rows);

    out << "\nResolved / unresolved\n";
    rows = {{"method", "evaluated", "unresolved"}};
    for (const auto& [m, x] : report.per_method) {
        rows.push_back({std::string(display_name(m)), std::to_string(x.n_evaluated), std::to_string(x.n_unresolved)});
    }
    print_table(out, rows);

    out << '\n';
    write_descriptive_table(out, report.region, report.descriptive);
}

}  // namespace storeloc
