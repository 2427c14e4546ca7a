#include "storeloc/sharing_graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "storeloc/errors.hpp"
#include "storeloc/parallel.hpp"

namespace storeloc {

std::string to_string(const StoreRef& s) {
    return s.merchant + "/" + s.store_id;
}

CustomerSet CustomerSet::from_users(StoreRef store, std::vector<UserId> users) {
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
    return {std::move(store), std::move(users)};
}

bool CustomerIndex::add(const TransactionRecord& record) {
    if (!record.valid()) {
        ++stats_.rejected;
        return false;
    }
    auto [it, inserted] = user_ids_.try_emplace(record.user_id, static_cast<UserId>(user_ids_.size()));
    auto& members = members_[StoreRef{record.merchant, record.store_id}];
    members.insert(it->second);
    ++stats_.accepted;
    return true;
}

std::vector<CustomerSet> CustomerIndex::finish(std::size_t min_customers) const {
    std::vector<CustomerSet> out;
    for (const auto& [store, members] : members_) {
        if (members.empty() || members.size() < min_customers) continue;
        out.push_back(CustomerSet::from_users(store, {members.begin(), members.end()}));
    }
    return out;
}

std::vector<CustomerSet> build_customer_sets(std::span<const TransactionRecord> records,
                                             std::size_t min_customers,
                                             IngestStats* stats) {
    CustomerIndex index;
    for (const auto& r : records) index.add(r);
    if (stats) *stats = index.stats();
    return index.finish(min_customers);
}

namespace {

std::size_t intersection_size(const std::vector<UserId>& a, const std::vector<UserId>& b) {
    std::size_t n = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

void require_nonempty(const CustomerSet& a, const CustomerSet& b) {
    if (a.users.empty() || b.users.empty()) {
        throw std::invalid_argument("sharing index requires non-empty customer sets");
    }
}

}  // namespace

double jaccard(const CustomerSet& a, const CustomerSet& b) {
    require_nonempty(a, b);
    const std::size_t inter = intersection_size(a.users, b.users);
    const std::size_t uni = a.users.size() + b.users.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double j_min(const CustomerSet& a, const CustomerSet& b) {
    require_nonempty(a, b);
    const std::size_t inter = intersection_size(a.users, b.users);
    return static_cast<double>(inter) / static_cast<double>(std::min(a.users.size(), b.users.size()));
}

std::optional<double> SharingGraph::entry(std::size_t known, std::size_t unknown) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{known, unknown},
                               [](const SharingEntry& e, const std::pair<std::size_t, std::size_t>& key) {
                                   return std::pair{e.known, e.unknown} < key;
                               });
    if (it != entries_.end() && it->known == known && it->unknown == unknown) return it->m;
    return std::nullopt;
}

std::optional<std::size_t> SharingGraph::find_known(const StoreRef& s) const {
    auto it = std::lower_bound(known_.begin(), known_.end(), s,
                               [](const KnownStore& k, const StoreRef& key) { return k.store < key; });
    if (it != known_.end() && it->store == s) return static_cast<std::size_t>(it - known_.begin());
    return std::nullopt;
}

std::optional<std::size_t> SharingGraph::find_unknown(const StoreRef& s) const {
    auto it = std::lower_bound(unknown_.begin(), unknown_.end(), s);
    if (it != unknown_.end() && *it == s) return static_cast<std::size_t>(it - unknown_.begin());
    return std::nullopt;
}

std::size_t SharingGraph::pair_index(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    const std::size_t n = known_.size();
    // rows 0..a-1 hold (n-1) + (n-2) + ... + (n-a) entries
    return a * (2 * n - a - 1) / 2 + (b - a - 1);
}

double SharingGraph::known_sharing(std::size_t a, std::size_t b) const {
    if (a == b || a >= known_.size() || b >= known_.size()) {
        throw std::out_of_range("known_sharing: invalid store pair");
    }
    return known_m_[pair_index(a, b)];
}

NeighborSet SharingGraph::unknown_neighbors(std::size_t j) const {
    NeighborSet out;
    for (const auto& [k, m] : unknown_adj_.at(j)) {
        out.push_back({known_[k].location, m, k});
    }
    return out;
}

NeighborSet SharingGraph::known_neighbors(std::size_t i) const {
    if (i >= known_.size()) throw std::out_of_range("known_neighbors: index out of range");
    NeighborSet out;
    for (std::size_t k = 0; k < known_.size(); ++k) {
        if (k == i) continue;
        const double m = known_m_[pair_index(i, k)];
        if (m >= theta_) out.push_back({known_[k].location, m, k});
    }
    return out;
}

std::vector<std::pair<double, double>> SharingGraph::known_pair_samples(
    std::optional<std::size_t> exclude) const {
    std::vector<std::pair<double, double>> out;
    out.reserve(known_m_.size());
    for (std::size_t a = 0; a < known_.size(); ++a) {
        if (exclude && *exclude == a) continue;
        for (std::size_t b = a + 1; b < known_.size(); ++b) {
            if (exclude && *exclude == b) continue;
            out.emplace_back(known_m_[pair_index(a, b)], dist(known_[a].location, known_[b].location));
        }
    }
    return out;
}

SharingGraph build_graph(std::span<const CustomerSet> sets,
                         const std::map<StoreRef, PlanarPoint>& known_locations,
                         double theta,
                         std::size_t workers) {
    if (!std::isfinite(theta) || theta < 0.0) {
        throw ConfigError("theta must be a finite non-negative ratio");
    }

    std::vector<const CustomerSet*> ordered;
    ordered.reserve(sets.size());
    for (const auto& s : sets) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const CustomerSet* a, const CustomerSet* b) { return a->store < b->store; });
    for (std::size_t i = 1; i < ordered.size(); ++i) {
        if (ordered[i - 1]->store == ordered[i]->store) {
            throw std::invalid_argument("build_graph: duplicate store " + to_string(ordered[i]->store));
        }
    }

    SharingGraph g;
    g.theta_ = theta;
    std::vector<const CustomerSet*> known_sets;
    std::vector<const CustomerSet*> unknown_sets;
    for (const CustomerSet* s : ordered) {
        auto it = known_locations.find(s->store);
        if (it != known_locations.end()) {
            g.known_.push_back({s->store, it->second});
            known_sets.push_back(s);
        } else {
            g.unknown_.push_back(s->store);
            unknown_sets.push_back(s);
        }
    }
    if (g.known_.size() != known_locations.size()) {
        for (const auto& [store, loc] : known_locations) {
            if (!g.find_known(store)) {
                throw std::invalid_argument("build_graph: known location for store without customers: " +
                                            to_string(store));
            }
        }
    }

    const std::size_t p = known_sets.size();
    const std::size_t q = unknown_sets.size();

    // Row i of known-known holds pairs (i, i+1..p-1).
    g.known_m_.assign(p * (p > 0 ? p - 1 : 0) / 2, 0.0);
    parallel_for(p, workers, [&](std::size_t a) {
        for (std::size_t b = a + 1; b < p; ++b) {
            g.known_m_[g.pair_index(a, b)] = j_min(*known_sets[a], *known_sets[b]);
        }
    });

    std::vector<std::vector<std::pair<std::size_t, double>>> rows(p);
    parallel_for(p, workers, [&](std::size_t a) {
        for (std::size_t j = 0; j < q; ++j) {
            const double m = j_min(*known_sets[a], *unknown_sets[j]);
            if (m >= theta) rows[a].emplace_back(j, m);
        }
    });

    g.unknown_adj_.resize(q);
    for (std::size_t a = 0; a < p; ++a) {
        for (const auto& [j, m] : rows[a]) {
            g.entries_.push_back({a, j, m});
            g.unknown_adj_[j].emplace_back(a, m);
        }
    }
    return g;
}

}  // namespace storeloc
