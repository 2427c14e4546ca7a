#include "storeloc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "storeloc/errors.hpp"
#include "storeloc/parallel.hpp"
#include "storeloc/random.hpp"

namespace storeloc {

std::string_view to_string(StoreLayout l) {
    return l == StoreLayout::uniform ? "uniform" : "clustered";
}

StoreLayout parse_store_layout(std::string_view s) {
    if (s == "uniform") return StoreLayout::uniform;
    if (s == "clustered") return StoreLayout::clustered;
    throw ConfigError("unknown store layout: " + std::string(s));
}

void SynthConfig::validate() const {
    if (n_stores == 0 || n_chains == 0 || n_customers == 0) throw ConfigError("synth: counts must be positive");
    if (!(city_extent > 0.0) || !std::isfinite(city_extent)) throw ConfigError("synth: city_extent must be positive");
    if (!(decay_scale > 0.0)) throw ConfigError("synth: decay_scale must be positive");
    if (!(base_visit_prob > 0.0 && base_visit_prob <= 1.0)) throw ConfigError("synth: base_visit_prob must be in (0, 1]");
    if (chain_decay.empty()) throw ConfigError("synth: chain_decay must not be empty");
    for (double c : chain_decay) {
        if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("synth: chain decay multipliers must be positive");
    }
}

std::vector<std::string> chain_names(std::size_t n) {
    static const char* const kNamed[] = {"coffee", "fast_food", "pharmacy", "supermarket"};
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(i < 4 ? std::string(kNamed[i]) : "chain_" + std::to_string(i + 1));
    }
    return out;
}

namespace {

constexpr std::size_t kClusterCount = 8;

std::string padded(const char* prefix, std::size_t i, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, i);
    return buf;
}

}  // namespace

SynthCity generate(const SynthConfig& cfg, std::size_t workers) {
    cfg.validate();
    const double half = cfg.city_extent / 2.0;
    const auto names = chain_names(cfg.n_chains);

    SynthCity city;
    Rng layout_rng(cfg.seed, 0);
    std::vector<PlanarPoint> centers;
    if (cfg.layout == StoreLayout::clustered) {
        for (std::size_t c = 0; c < kClusterCount; ++c) {
            const double x = layout_rng.uniform(-half, half);
            const double y = layout_rng.uniform(-half, half);
            centers.push_back({x, y});
        }
    }
    const double sigma = cfg.city_extent / 20.0;
    for (std::size_t i = 0; i < cfg.n_stores; ++i) {
        PlanarPoint p;
        if (cfg.layout == StoreLayout::uniform) {
            p.x = layout_rng.uniform(-half, half);
            p.y = layout_rng.uniform(-half, half);
        } else {
            const PlanarPoint& c = centers[layout_rng.below(kClusterCount)];
            do {
                p.x = layout_rng.normal(c.x, sigma);
                p.y = layout_rng.normal(c.y, sigma);
            } while (std::abs(p.x) > half || std::abs(p.y) > half);
        }
        StoreRef ref{names[i % cfg.n_chains], padded("", i + 1, 4)};
        city.truth.emplace(ref, p);
        city.stores.push_back({std::move(ref), p});
    }

    std::vector<double> scale(cfg.n_stores);
    for (std::size_t i = 0; i < cfg.n_stores; ++i) {
        scale[i] = cfg.decay_scale * cfg.chain_decay[(i % cfg.n_chains) % cfg.chain_decay.size()];
    }

    std::vector<std::vector<std::size_t>> visits(cfg.n_customers);
    parallel_for(cfg.n_customers, workers, [&](std::size_t u) {
        Rng rng(cfg.seed, u + 1);
        const PlanarPoint home{rng.uniform(-half, half), rng.uniform(-half, half)};
        for (std::size_t i = 0; i < cfg.n_stores; ++i) {
            const double p = cfg.base_visit_prob * std::exp(-dist(home, city.stores[i].location) / scale[i]);
            if (rng.bernoulli(p)) visits[u].push_back(i);
        }
    });

    for (std::size_t u = 0; u < cfg.n_customers; ++u) {
        const std::string user = padded("u", u + 1, 6);
        for (std::size_t i : visits[u]) {
            city.records.push_back({user, city.stores[i].store.merchant, city.stores[i].store.store_id});
        }
    }
    return city;
}

KnownSplit split_known(const SynthCity& city, double known_fraction, std::uint64_t seed) {
    if (!(known_fraction > 0.0 && known_fraction < 1.0)) {
        throw ConfigError("known fraction must lie in (0, 1)");
    }
    const std::size_t n = city.stores.size();
    const auto n_known = static_cast<std::size_t>(std::llround(known_fraction * static_cast<double>(n)));
    if (n_known < 2) throw DataError("split leaves fewer than two known stores");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed, 0x5eed);
    for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }

    KnownSplit split;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& s = city.stores[order[k]];
        if (k < n_known) {
            split.known.emplace(s.store, s.location);
        } else {
            split.unknown.push_back(s.store);
        }
    }
    std::sort(split.unknown.begin(), split.unknown.end());
    return split;
}

}  // namespace storeloc
