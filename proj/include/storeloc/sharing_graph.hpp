#pragma once

// Customer sets per store and the thresholded customer-sharing graph between
// stores with known locations and stores with unknown locations.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "storeloc/geometry.hpp"

namespace storeloc {

inline constexpr std::size_t kDefaultMinCustomers = 20;
inline constexpr double kDefaultTheta = 0.15;

struct TransactionRecord {
    std::string user_id;
    std::string merchant;
    std::string store_id;

    bool valid() const { return !user_id.empty() && !merchant.empty() && !store_id.empty(); }
};

// (merchant, store_id) is the store key. Ordering is lexicographic on
// merchant, then store_id.
struct StoreRef {
    std::string merchant;
    std::string store_id;

    friend auto operator<=>(const StoreRef&, const StoreRef&) = default;
    friend bool operator==(const StoreRef&, const StoreRef&) = default;
};

std::string to_string(const StoreRef& s);

using UserId = std::uint32_t;

// Distinct customers of one store, as sorted unique interned user ids.
struct CustomerSet {
    StoreRef store;
    std::vector<UserId> users;

    static CustomerSet from_users(StoreRef store, std::vector<UserId> users);
};

struct IngestStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

// Streaming builder for customer sets. Memory grows with the number of
// distinct (store, user) memberships, not with the number of records.
class CustomerIndex {
public:
    // Returns false (and counts a rejection) for a record with an empty field.
    bool add(const TransactionRecord& record);

    // One set per store with at least min_customers distinct users, ordered by
    // store key.
    std::vector<CustomerSet> finish(std::size_t min_customers) const;

    const IngestStats& stats() const { return stats_; }
    std::size_t n_users() const { return user_ids_.size(); }
    std::size_t n_stores() const { return members_.size(); }

private:
    std::unordered_map<std::string, UserId> user_ids_;
    std::map<StoreRef, std::unordered_set<UserId>> members_;
    IngestStats stats_;
};

std::vector<CustomerSet> build_customer_sets(std::span<const TransactionRecord> records,
                                             std::size_t min_customers,
                                             IngestStats* stats = nullptr);

// Both require non-empty sets.
double jaccard(const CustomerSet& a, const CustomerSet& b);
double j_min(const CustomerSet& a, const CustomerSet& b);

struct KnownStore {
    StoreRef store;
    PlanarPoint location;
};

// A known store whose sharing with some target is at or above the threshold.
struct Neighbor {
    PlanarPoint location;
    double m = 0.0;
    std::size_t known_index = 0;
};
using NeighborSet = std::vector<Neighbor>;

struct SharingEntry {
    std::size_t known = 0;
    std::size_t unknown = 0;
    double m = 0.0;
};

// Sparse known x unknown sharing matrix, thresholded at theta, plus the
// unthresholded sharing between every pair of known stores (the sample used
// for density estimation). Known and unknown lists are sorted by store key,
// so a smaller index always means a smaller key. Immutable once built.
class SharingGraph {
public:
    SharingGraph() = default;

    const std::vector<KnownStore>& known() const { return known_; }
    const std::vector<StoreRef>& unknown() const { return unknown_; }
    double theta() const { return theta_; }

    // Entries with m >= theta, sorted by (known, unknown).
    const std::vector<SharingEntry>& entries() const { return entries_; }
    std::optional<double> entry(std::size_t known, std::size_t unknown) const;

    std::optional<std::size_t> find_known(const StoreRef& s) const;
    std::optional<std::size_t> find_unknown(const StoreRef& s) const;

    // Sharing between two distinct known stores, unthresholded.
    double known_sharing(std::size_t a, std::size_t b) const;

    // Known stores with m >= theta against unknown store j, by known index.
    NeighborSet unknown_neighbors(std::size_t j) const;

    // Other known stores with m >= theta against known store i. This is the
    // neighbor set used when i is held out.
    NeighborSet known_neighbors(std::size_t i) const;

    // (m, r) for every known-known pair, optionally skipping pairs that
    // involve one store.
    std::vector<std::pair<double, double>> known_pair_samples(
        std::optional<std::size_t> exclude = std::nullopt) const;

private:
    friend SharingGraph build_graph(std::span<const CustomerSet>,
                                    const std::map<StoreRef, PlanarPoint>&, double,
                                    std::size_t);

    std::size_t pair_index(std::size_t a, std::size_t b) const;

    std::vector<KnownStore> known_;
    std::vector<StoreRef> unknown_;
    double theta_ = kDefaultTheta;
    std::vector<SharingEntry> entries_;
    std::vector<std::vector<std::pair<std::size_t, double>>> unknown_adj_;
    std::vector<double> known_m_;  // strict upper triangle, row-major
};

// Partitions sets into known/unknown by presence in known_locations and
// computes j_min for all known-unknown and known-known pairs. theta must be a
// finite non-negative number; a theta above 1 yields an empty entry map.
// Every key of known_locations must name a store in sets.
SharingGraph build_graph(std::span<const CustomerSet> sets,
                         const std::map<StoreRef, PlanarPoint>& known_locations,
                         double theta,
                         std::size_t workers = 1);

}  // namespace storeloc
