#pragma once

// Line-delimited JSON records.
//   transactions: {"user_id", "merchant", "store_id"}
//   seeds:        {"merchant", "store_id", "lat", "lon"}
//   results:      {"merchant", "store_id", "lat", "lon", "objective", "n_neighbors", "method"}

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "storeloc/geometry.hpp"
#include "storeloc/sharing_graph.hpp"
#include "storeloc/solver.hpp"

namespace storeloc {

// Ingestion aborts when more than this fraction of non-blank lines is malformed.
inline constexpr double kMaxMalformedFraction = 0.10;

struct LoadStats {
    std::size_t lines = 0;  // non-blank lines
    std::size_t records = 0;
    std::size_t malformed = 0;
    std::vector<std::string> diagnostics;  // first few malformed lines
};

std::optional<TransactionRecord> parse_transaction_line(std::string_view line);

// Streams records to sink one line at a time. Throws DataError when the file
// cannot be opened or too many lines are malformed; in the latter case the
// sink has already seen the valid records.
LoadStats load_transactions(const std::filesystem::path& path,
                            const std::function<void(const TransactionRecord&)>& sink);
std::vector<TransactionRecord> load_transactions(const std::filesystem::path& path, LoadStats* stats = nullptr);

// Projects every seed into the region plane. Rows for the same store must
// agree within 1 m. Throws DataError naming the line or store.
std::map<StoreRef, PlanarPoint> load_seed_locations(const std::filesystem::path& path, const Region& region);

// Mean latitude/longitude of a seeds file, used as a default projection
// origin. Throws DataError on an empty or unreadable file.
GeoPoint seed_centroid(const std::filesystem::path& path);

struct ResultRow {
    StoreRef store;
    std::optional<GeoPoint> location;
    std::optional<double> objective;
    std::size_t n_neighbors = 0;
    std::string method;
};

std::vector<ResultRow> load_results(const std::filesystem::path& path);

void write_transactions(std::ostream& out, std::span<const TransactionRecord> records);
void write_seeds(std::ostream& out, const std::map<StoreRef, PlanarPoint>& seeds, const Region& region);
// Rows sorted by store key; unresolved stores carry null coordinates.
void write_results(std::ostream& out, std::span<const InferenceResult> results, const Region& region);

}  // namespace storeloc
