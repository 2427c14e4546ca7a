#include "storeloc/density.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "storeloc/errors.hpp"

namespace storeloc {

BinningScheme BinningScheme::defaults() {
    return {{0.0, 200.0, 500.0, 1000.0, 5000.0, 10000.0}, uniform_m_edges(20)};
}

std::vector<double> BinningScheme::uniform_m_edges(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_m_edges: need at least one bin");
    std::vector<double> edges(n + 1);
    for (std::size_t k = 0; k <= n; ++k) edges[k] = static_cast<double>(k) / static_cast<double>(n);
    return edges;
}

void BinningScheme::validate() const {
    auto ascending = [](const std::vector<double>& e) {
        for (std::size_t i = 1; i < e.size(); ++i) {
            if (!(e[i] > e[i - 1])) return false;
        }
        return std::all_of(e.begin(), e.end(), [](double v) { return std::isfinite(v); });
    };
    if (r_edges.size() < 2 || r_edges.front() != 0.0 || !ascending(r_edges)) {
        throw std::invalid_argument("binning: r_edges must be strictly ascending from 0 with at least one bin");
    }
    if (m_edges.size() < 2 || m_edges.front() != 0.0 || m_edges.back() != 1.0 || !ascending(m_edges)) {
        throw std::invalid_argument("binning: m_edges must be strictly ascending from 0 to 1");
    }
}

namespace {

std::size_t locate(const std::vector<double>& edges, double v) {
    // number of edges <= v, minus one, clamped to [0, n_bins - 1]
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    const std::size_t k = static_cast<std::size_t>(it - edges.begin());
    const std::size_t n_bins = edges.size() - 1;
    if (k == 0) return 0;
    return std::min(k - 1, n_bins - 1);
}

}  // namespace

std::size_t BinningScheme::r_bin(double r) const { return locate(r_edges, r); }
std::size_t BinningScheme::m_bin(double m) const { return locate(m_edges, m); }

void ConditionalDensity::finalize() {
    log_table_.resize(table_.size());
    std::transform(table_.begin(), table_.end(), log_table_.begin(), [](double p) { return std::log(p); });
}

ConditionalDensity ConditionalDensity::from_table(BinningScheme scheme, std::vector<double> table, double floor) {
    scheme.validate();
    if (!(floor > 0.0) || !std::isfinite(floor)) {
        throw std::invalid_argument("density floor must be positive");
    }
    const std::size_t n_r = scheme.n_r();
    const std::size_t n_m = scheme.n_m();
    if (table.size() != n_r * n_m) {
        throw std::invalid_argument("density table has the wrong number of cells");
    }
    for (std::size_t i = 0; i < n_r; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n_m; ++j) {
            const double p = table[i * n_m + j];
            if (!(p >= floor) || !std::isfinite(p)) {
                throw std::invalid_argument("density cell below floor at r bin " + std::to_string(i));
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw std::invalid_argument("density row " + std::to_string(i) + " does not sum to 1");
        }
    }
    ConditionalDensity d;
    d.scheme_ = std::move(scheme);
    d.table_ = std::move(table);
    d.counts_.assign(d.table_.size(), 0);
    d.floor_ = floor;
    d.finalize();
    return d;
}

ConditionalDensity estimate(std::span<const std::pair<double, double>> pairs,
                            const BinningScheme& scheme,
                            double floor,
                            double smoothing) {
    scheme.validate();
    if (pairs.empty()) throw std::invalid_argument("estimate: no (m, r) samples");
    if (!(floor > 0.0) || !std::isfinite(floor)) throw std::invalid_argument("estimate: floor must be positive");
    if (!(smoothing > 0.0) || !std::isfinite(smoothing)) {
        throw std::invalid_argument("estimate: smoothing must be positive");
    }
    const std::size_t n_r = scheme.n_r();
    const std::size_t n_m = scheme.n_m();
    if (floor * static_cast<double>(n_m) >= 1.0) {
        throw std::invalid_argument("estimate: floor too large for the number of m bins");
    }

    ConditionalDensity d;
    d.scheme_ = scheme;
    d.floor_ = floor;
    d.smoothing_ = smoothing;
    d.counts_.assign(n_r * n_m, 0);
    for (const auto& [m, r] : pairs) {
        if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("estimate: sharing value outside [0, 1]");
        if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("estimate: negative or non-finite distance");
        ++d.counts_[scheme.r_bin(r) * n_m + scheme.m_bin(m)];
    }

    d.table_.assign(n_r * n_m, 0.0);
    const double nm = static_cast<double>(n_m);
    for (std::size_t i = 0; i < n_r; ++i) {
        std::uint64_t total = 0;
        for (std::size_t j = 0; j < n_m; ++j) total += d.counts_[i * n_m + j];
        if (total == 0) {
            d.degenerate_rows_.push_back(i);
            std::fill_n(d.table_.begin() + static_cast<std::ptrdiff_t>(i * n_m), n_m, 1.0 / nm);
            continue;
        }
        // smallest cell is lambda / (total + n_m * lambda); keep it >= floor
        const double needed = floor * static_cast<double>(total) / (1.0 - nm * floor);
        const double lambda = std::max(smoothing, needed * (1.0 + 1e-9));
        const double denom = static_cast<double>(total) + nm * lambda;
        for (std::size_t j = 0; j < n_m; ++j) {
            d.table_[i * n_m + j] = (static_cast<double>(d.counts_[i * n_m + j]) + lambda) / denom;
        }
    }
    d.finalize();
    return d;
}

double ConditionalDensity::log_prob(double m, double r) const {
    return log_table_[scheme_.r_bin(r) * scheme_.n_m() + scheme_.m_bin(m)];
}

double ConditionalDensity::log_prob_smooth(double m, double r) const {
    const std::size_t n_r = scheme_.n_r();
    const std::size_t n_m = scheme_.n_m();
    const std::size_t j = scheme_.m_bin(m);
    if (r <= scheme_.r_center(0)) return log_table_[j];
    if (r >= scheme_.r_center(n_r - 1)) return log_table_[(n_r - 1) * n_m + j];
    std::size_t k = 1;
    while (scheme_.r_center(k) <= r) ++k;
    const double c0 = scheme_.r_center(k - 1);
    const double c1 = scheme_.r_center(k);
    const double v0 = log_table_[(k - 1) * n_m + j];
    const double v1 = log_table_[k * n_m + j];
    const double t = (r - c0) / (c1 - c0);
    return v0 + t * (v1 - v0);
}

double ConditionalDensity::d_log_prob_dr(double m, double r) const {
    const std::size_t n_r = scheme_.n_r();
    const std::size_t n_m = scheme_.n_m();
    const std::size_t j = scheme_.m_bin(m);
    if (r < scheme_.r_center(0) || r >= scheme_.r_center(n_r - 1)) return 0.0;
    std::size_t k = 1;
    while (scheme_.r_center(k) <= r) ++k;
    const double c0 = scheme_.r_center(k - 1);
    const double c1 = scheme_.r_center(k);
    return (log_table_[k * n_m + j] - log_table_[(k - 1) * n_m + j]) / (c1 - c0);
}

MonotonicityReport ConditionalDensity::is_monotone_above(double theta) const {
    MonotonicityReport report;
    const std::size_t n_r = scheme_.n_r();
    const std::size_t n_m = scheme_.n_m();
    for (std::size_t j = 0; j < n_m; ++j) {
        if (scheme_.m_edges[j] < theta) continue;
        for (std::size_t i = 1; i < n_r; ++i) {
            if (prob(i, j) > prob(i - 1, j)) report.violations.emplace_back(j, i);
        }
    }
    report.monotone = report.violations.empty();
    return report;
}

namespace {

constexpr const char* kDensityMagic = "storeloc-density";
constexpr int kDensityVersion = 1;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        throw DataError("density file: bad number '" + token + "'");
    }
    return v;
}

template <typename T>
void write_list(std::ostream& out, const std::string& key, std::span<const T> values) {
    out << key << ' ' << values.size();
    for (const T& v : values) {
        if constexpr (std::is_floating_point_v<T>) {
            out << ' ' << format_double(v);
        } else {
            out << ' ' << v;
        }
    }
    out << '\n';
}

void expect_key(std::istream& in, const std::string& key) {
    std::string got;
    if (!(in >> got) || got != key) {
        throw DataError("density file: expected '" + key + "', got '" + got + "'");
    }
}

std::vector<double> read_doubles(std::istream& in, std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) {
        std::string tok;
        if (!(in >> tok)) throw DataError("density file: truncated");
        v = parse_double(tok);
    }
    return out;
}

std::vector<double> read_list(std::istream& in, const std::string& key) {
    expect_key(in, key);
    std::size_t n = 0;
    if (!(in >> n)) throw DataError("density file: missing length for " + key);
    return read_doubles(in, n);
}

}  // namespace

void write_density(std::ostream& out, const ConditionalDensity& d) {
    const auto& s = d.scheme();
    out << kDensityMagic << ' ' << kDensityVersion << '\n';
    out << "floor " << format_double(d.floor()) << '\n';
    out << "smoothing " << format_double(d.smoothing()) << '\n';
    write_list<double>(out, "r_edges", s.r_edges);
    write_list<double>(out, "m_edges", s.m_edges);
    out << "table " << s.n_r() << ' ' << s.n_m() << '\n';
    for (std::size_t i = 0; i < s.n_r(); ++i) {
        for (std::size_t j = 0; j < s.n_m(); ++j) {
            out << (j ? " " : "") << format_double(d.prob(i, j));
        }
        out << '\n';
    }
    out << "counts " << s.n_r() << ' ' << s.n_m() << '\n';
    const auto counts = d.counts();
    for (std::size_t i = 0; i < s.n_r(); ++i) {
        for (std::size_t j = 0; j < s.n_m(); ++j) {
            out << (j ? " " : "") << counts[i * s.n_m() + j];
        }
        out << '\n';
    }
}

ConditionalDensity read_density(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != kDensityMagic) {
        throw DataError("density file: missing header");
    }
    if (version != kDensityVersion) {
        throw DataError("density file: unsupported version " + std::to_string(version));
    }
    expect_key(in, "floor");
    const double floor = read_doubles(in, 1)[0];
    expect_key(in, "smoothing");
    const double smoothing = read_doubles(in, 1)[0];
    BinningScheme scheme;
    scheme.r_edges = read_list(in, "r_edges");
    scheme.m_edges = read_list(in, "m_edges");
    try {
        scheme.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("density file: ") + e.what());
    }

    std::size_t n_r = 0, n_m = 0;
    expect_key(in, "table");
    if (!(in >> n_r >> n_m) || n_r != scheme.n_r() || n_m != scheme.n_m()) {
        throw DataError("density file: table shape does not match edges");
    }
    auto table = read_doubles(in, n_r * n_m);
    ConditionalDensity d;
    try {
        d = ConditionalDensity::from_table(std::move(scheme), std::move(table), floor);
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("density file: ") + e.what());
    }
    d.smoothing_ = smoothing;

    expect_key(in, "counts");
    if (!(in >> n_r >> n_m) || n_r != d.scheme_.n_r() || n_m != d.scheme_.n_m()) {
        throw DataError("density file: counts shape does not match edges");
    }
    for (auto& c : d.counts_) {
        if (!(in >> c)) throw DataError("density file: truncated counts");
    }
    for (std::size_t i = 0; i < n_r; ++i) {
        std::uint64_t total = 0;
        for (std::size_t j = 0; j < n_m; ++j) total += d.counts_[i * n_m + j];
        if (total == 0) d.degenerate_rows_.push_back(i);
    }
    return d;
}

}  // namespace storeloc
