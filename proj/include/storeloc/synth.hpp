#pragma once

// Synthetic cities with ground truth. Customers live uniformly over a square
// and visit each store independently with a probability that decays
// exponentially with home-to-store distance, so customer sharing between
// stores falls off with their separation.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "storeloc/geometry.hpp"
#include "storeloc/sharing_graph.hpp"

namespace storeloc {

enum class StoreLayout { uniform, clustered };

std::string_view to_string(StoreLayout l);
StoreLayout parse_store_layout(std::string_view s);  // throws ConfigError

struct SynthConfig {
    std::uint64_t seed = 1;
    double city_extent = 10000.0;  // side of the square, m
    std::size_t n_stores = 200;
    std::size_t n_chains = 4;
    std::size_t n_customers = 5000;
    double decay_scale = 800.0;  // m
    double base_visit_prob = 0.9;
    StoreLayout layout = StoreLayout::uniform;
    // Per-chain multipliers on decay_scale, cycled when there are more chains.
    std::vector<double> chain_decay = {1.0, 0.8, 1.2, 1.5};

    // Throws ConfigError.
    void validate() const;
};

struct SynthStore {
    StoreRef store;
    PlanarPoint location;
};

struct SynthCity {
    std::vector<SynthStore> stores;
    std::vector<TransactionRecord> records;
    std::map<StoreRef, PlanarPoint> truth;
};

// coffee, fast_food, pharmacy, supermarket, then chain_5, chain_6, ...
std::vector<std::string> chain_names(std::size_t n);

// Square is centered on the planar origin. Store placement uses stream 0;
// customer u uses stream u + 1, so the output does not depend on `workers`.
SynthCity generate(const SynthConfig& cfg, std::size_t workers = 1);

struct KnownSplit {
    std::map<StoreRef, PlanarPoint> known;
    std::vector<StoreRef> unknown;  // sorted by store key
};

// Seeded partition with round(known_fraction * n) known stores. Throws
// ConfigError for a fraction outside (0, 1) and DataError when fewer than two
// stores would be known.
KnownSplit split_known(const SynthCity& city, double known_fraction, std::uint64_t seed);

}  // namespace storeloc
