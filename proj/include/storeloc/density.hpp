#pragma once

// Empirical conditional distribution p(m | r) of customer sharing m given
// store distance r, estimated as a smoothed two-dimensional frequency table.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace storeloc {

inline constexpr double kDefaultFloor = 1e-6;
inline constexpr double kDefaultSmoothing = 1.0;

// Bin edges for distance (meters) and sharing (ratio). A value on an interior
// edge belongs to the higher bin; r >= r_max falls into the last r bin and
// m = 1 into the last m bin.
struct BinningScheme {
    std::vector<double> r_edges;
    std::vector<double> m_edges;

    // {0, 200, 500, 1000, 5000, 10000} m and 20 equal m bins over [0, 1].
    static BinningScheme defaults();
    // n equal-width m bins with edges computed as k / n.
    static std::vector<double> uniform_m_edges(std::size_t n);

    // Throws std::invalid_argument when the edge lists are malformed.
    void validate() const;

    std::size_t n_r() const { return r_edges.size() - 1; }
    std::size_t n_m() const { return m_edges.size() - 1; }
    double r_max() const { return r_edges.back(); }

    std::size_t r_bin(double r) const;
    std::size_t m_bin(double m) const;
    double r_center(std::size_t i) const { return 0.5 * (r_edges[i] + r_edges[i + 1]); }

    friend bool operator==(const BinningScheme&, const BinningScheme&) = default;
};

struct MonotonicityReport {
    bool monotone = true;
    // (m bin, r bin) cells whose probability exceeds the cell one r bin closer.
    std::vector<std::pair<std::size_t, std::size_t>> violations;
};

class ConditionalDensity {
public:
    // Builds a density from an explicit row-stochastic table (row-major,
    // n_r x n_m). Rows must sum to 1 within 1e-9 and every cell must be at
    // least floor.
    static ConditionalDensity from_table(BinningScheme scheme, std::vector<double> table, double floor);

    const BinningScheme& scheme() const { return scheme_; }
    double floor() const { return floor_; }
    double smoothing() const { return smoothing_; }
    std::span<const double> table() const { return table_; }
    std::span<const std::uint64_t> counts() const { return counts_; }
    // r bins that had no samples and were set to the uniform distribution.
    const std::vector<std::size_t>& degenerate_rows() const { return degenerate_rows_; }

    double prob(std::size_t r_bin, std::size_t m_bin) const { return table_[r_bin * scheme_.n_m() + m_bin]; }

    // Piecewise-constant lookup of ln p(m | r).
    double log_prob(double m, double r) const;

    // ln p(m | r) linearly interpolated in r between r-bin centers, constant
    // beyond the outermost centers.
    double log_prob_smooth(double m, double r) const;

    // Slope of log_prob_smooth in r; at a knot, the slope of the segment to
    // its right.
    double d_log_prob_dr(double m, double r) const;

    MonotonicityReport is_monotone_above(double theta) const;

private:
    friend ConditionalDensity read_density(std::istream&);
    friend ConditionalDensity estimate(std::span<const std::pair<double, double>>, const BinningScheme&,
                                       double, double);

    BinningScheme scheme_;
    std::vector<double> table_;
    std::vector<std::uint64_t> counts_;
    std::vector<double> log_table_;
    double floor_ = kDefaultFloor;
    double smoothing_ = kDefaultSmoothing;
    std::vector<std::size_t> degenerate_rows_;

    void finalize();
};

// Estimates the table from (m, r) samples. Each row is
// (counts + lambda) / sum(counts + lambda); lambda starts at `smoothing` and
// is raised per row when needed so that every cell is at least `floor`.
// Throws std::invalid_argument on an empty sample or out-of-domain values.
ConditionalDensity estimate(std::span<const std::pair<double, double>> pairs,
                            const BinningScheme& scheme,
                            double floor = kDefaultFloor,
                            double smoothing = kDefaultSmoothing);

// Text format: a versioned header with floor and edges, then the row-major
// probability matrix and the raw counts. Doubles are written in shortest
// round-trip form.
void write_density(std::ostream& out, const ConditionalDensity& d);
ConditionalDensity read_density(std::istream& in);

}  // namespace storeloc
