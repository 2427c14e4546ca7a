#include "storeloc/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "storeloc/errors.hpp"

namespace storeloc {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxDiagnostics = 10;

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::optional<std::string> text_field(const json& obj, const char* key, bool allow_integer) {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (it->is_string()) {
        auto s = it->get<std::string>();
        if (s.empty()) return std::nullopt;
        return s;
    }
    if (allow_integer && it->is_number_integer()) return it->dump();
    return std::nullopt;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

}  // namespace

std::optional<TransactionRecord> parse_transaction_line(std::string_view line) {
    const json obj = json::parse(line.begin(), line.end(), nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) return std::nullopt;
    auto user = text_field(obj, "user_id", true);
    auto merchant = text_field(obj, "merchant", false);
    auto store = text_field(obj, "store_id", true);
    if (!user || !merchant || !store) return std::nullopt;
    return TransactionRecord{std::move(*user), std::move(*merchant), std::move(*store)};
}

LoadStats load_transactions(const std::filesystem::path& path,
                            const std::function<void(const TransactionRecord&)>& sink) {
    auto in = open_input(path);
    LoadStats stats;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        ++stats.lines;
        if (auto rec = parse_transaction_line(line)) {
            ++stats.records;
            sink(*rec);
        } else {
            ++stats.malformed;
            if (stats.diagnostics.size() < kMaxDiagnostics) {
                stats.diagnostics.push_back(path.string() + ":" + std::to_string(line_no) + ": malformed transaction");
            }
        }
    }
    if (stats.lines > 0 &&
        static_cast<double>(stats.malformed) > kMaxMalformedFraction * static_cast<double>(stats.lines)) {
        std::string msg = path.string() + ": " + std::to_string(stats.malformed) + " of " +
                          std::to_string(stats.lines) + " lines malformed";
        for (const auto& d : stats.diagnostics) msg += "\n  " + d;
        throw DataError(msg);
    }
    return stats;
}

std::vector<TransactionRecord> load_transactions(const std::filesystem::path& path, LoadStats* stats) {
    std::vector<TransactionRecord> out;
    auto s = load_transactions(path, [&](const TransactionRecord& r) { out.push_back(r); });
    if (stats) *stats = std::move(s);
    return out;
}

std::map<StoreRef, PlanarPoint> load_seed_locations(const std::filesystem::path& path, const Region& region) {
    auto in = open_input(path);
    std::map<StoreRef, PlanarPoint> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
        const json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) throw DataError(where + "not a JSON object");
        auto merchant = text_field(obj, "merchant", false);
        auto store_id = text_field(obj, "store_id", true);
        if (!merchant || !store_id) throw DataError(where + "missing merchant or store_id");
        auto lat = obj.find("lat");
        auto lon = obj.find("lon");
        if (lat == obj.end() || lon == obj.end() || !lat->is_number() || !lon->is_number()) {
            throw DataError(where + "missing numeric lat/lon");
        }
        PlanarPoint p;
        try {
            p = project(GeoPoint(lat->get<double>(), lon->get<double>()), region);
        } catch (const std::invalid_argument& e) {
            throw DataError(where + e.what());
        }
        StoreRef key{std::move(*merchant), std::move(*store_id)};
        auto [it, inserted] = out.emplace(key, p);
        if (!inserted && dist(it->second, p) > 1.0) {
            throw DataError(where + "conflicting locations for store " + to_string(key));
        }
    }
    return out;
}

GeoPoint seed_centroid(const std::filesystem::path& path) {
    // projection about (0, 0) is only used to read and validate the rows
    const Region probe{GeoPoint(0.0, 0.0), ""};
    const auto seeds = load_seed_locations(path, probe);
    if (seeds.empty()) throw DataError(path.string() + ": no seed locations");
    double lat = 0.0, lon = 0.0;
    for (const auto& [store, p] : seeds) {
        const GeoPoint g = unproject(p, probe);
        lat += g.lat();
        lon += g.lon();
    }
    const auto n = static_cast<double>(seeds.size());
    return GeoPoint(lat / n, lon / n);
}

std::vector<ResultRow> load_results(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<ResultRow> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        try {
            const json obj = json::parse(line);
            ResultRow row;
            row.store = {obj.at("merchant").get<std::string>(), obj.at("store_id").get<std::string>()};
            if (!obj.at("lat").is_null()) {
                row.location = GeoPoint(obj.at("lat").get<double>(), obj.at("lon").get<double>());
            }
            if (!obj.at("objective").is_null()) row.objective = obj.at("objective").get<double>();
            row.n_neighbors = obj.at("n_neighbors").get<std::size_t>();
            row.method = obj.at("method").get<std::string>();
            out.push_back(std::move(row));
        } catch (const std::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_transactions(std::ostream& out, std::span<const TransactionRecord> records) {
    for (const auto& r : records) {
        out << nlohmann::ordered_json{{"user_id", r.user_id}, {"merchant", r.merchant}, {"store_id", r.store_id}}.dump() << '\n';
    }
}

void write_seeds(std::ostream& out, const std::map<StoreRef, PlanarPoint>& seeds, const Region& region) {
    for (const auto& [store, p] : seeds) {
        const GeoPoint g = unproject(p, region);
        out << nlohmann::ordered_json{{"merchant", store.merchant}, {"store_id", store.store_id}, {"lat", g.lat()}, {"lon", g.lon()}}
                   .dump()
            << '\n';
    }
}

void write_results(std::ostream& out, std::span<const InferenceResult> results, const Region& region) {
    std::vector<const InferenceResult*> sorted;
    for (const auto& r : results) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const InferenceResult* a, const InferenceResult* b) { return a->store < b->store; });
    for (const InferenceResult* r : sorted) {
        nlohmann::ordered_json row;
        row["merchant"] = r->store.merchant;
        row["store_id"] = r->store.store_id;
        if (r->location) {
            const GeoPoint g = unproject(*r->location, region);
            row["lat"] = g.lat();
            row["lon"] = g.lon();
            row["objective"] = r->objective;
        } else {
            row["lat"] = nullptr;
            row["lon"] = nullptr;
            row["objective"] = nullptr;
        }
        row["n_neighbors"] = r->n_neighbors;
        row["method"] = std::string(to_string(r->method));
        out << row.dump() << '\n';
    }
}

}  // namespace storeloc
