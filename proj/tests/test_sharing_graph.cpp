#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "oracles.hpp"
#include "storeloc/errors.hpp"
#include "storeloc/random.hpp"
#include "storeloc/sharing_graph.hpp"
#include "storeloc/synth.hpp"

using namespace storeloc;

namespace {

CustomerSet make_set(const std::string& id, std::vector<UserId> users) {
    return CustomerSet::from_users({"m", id}, std::move(users));
}

std::map<StoreRef, std::set<std::string>> scan_records(const std::vector<TransactionRecord>& records) {
    std::map<StoreRef, std::set<std::string>> out;
    for (const auto& r : records) out[{r.merchant, r.store_id}].insert(r.user_id);
    return out;
}

std::map<StoreRef, PlanarPoint> admitted(const std::map<StoreRef, PlanarPoint>& known,
                                         const std::vector<CustomerSet>& sets) {
    std::map<StoreRef, PlanarPoint> out;
    for (const auto& s : sets) {
        if (auto it = known.find(s.store); it != known.end()) out.insert(*it);
    }
    return out;
}

}  // namespace

TEST_CASE("duplicate purchases collapse to one membership") {
    const std::vector<TransactionRecord> recs{{"u1", "A", "1"}, {"u1", "A", "1"}, {"u2", "A", "1"}};
    const auto sets = build_customer_sets(recs, 1);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].store == StoreRef{"A", "1"});
    CHECK(sets[0].users.size() == 2);
}

TEST_CASE("stores below the admission floor are dropped") {
    const std::vector<TransactionRecord> recs{{"u1", "A", "1"}};
    CHECK(build_customer_sets(recs, 2).empty());
    CHECK(build_customer_sets(std::vector<TransactionRecord>{}, 1).empty());
}

TEST_CASE("malformed records are rejected and counted") {
    const std::vector<TransactionRecord> recs{{"u1", "A", "1"}, {"", "A", "1"}, {"u2", "", "1"}, {"u3", "A", ""}};
    IngestStats stats;
    const auto sets = build_customer_sets(recs, 1, &stats);
    CHECK(stats.accepted == 1);
    CHECK(stats.rejected == 3);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].users.size() == 1);
}

TEST_CASE("customer sets match a per-store scan of the records") {
    Rng rng(21, 0);
    std::vector<TransactionRecord> recs;
    for (int i = 0; i < 2000; ++i) {
        const std::string user = "u" + std::to_string(rng.below(100));
        const std::string store = std::to_string(rng.below(3));
        recs.push_back({user, "chain", store});
    }
    CustomerIndex index;
    for (const auto& r : recs) index.add(r);
    const auto sets = index.finish(1);
    const auto expected = scan_records(recs);
    REQUIRE(sets.size() == expected.size());
    for (const auto& s : sets) {
        CHECK(s.users.size() == expected.at(s.store).size());
        CHECK(std::is_sorted(s.users.begin(), s.users.end()));
    }
    // pairwise overlaps identify the same users as the string sets
    for (std::size_t a = 0; a < sets.size(); ++a) {
        for (std::size_t b = a + 1; b < sets.size(); ++b) {
            const auto o = oracle::set_sharing(expected.at(sets[a].store), expected.at(sets[b].store));
            CHECK(j_min(sets[a], sets[b]) == o.j_min);
            CHECK(jaccard(sets[a], sets[b]) == o.jaccard);
        }
    }
}

TEST_CASE("sharing index examples") {
    const auto a = make_set("a", {1, 2});
    const auto b = make_set("b", {2, 3, 4});
    CHECK(jaccard(a, b) == 0.25);
    CHECK(j_min(a, b) == 0.5);
    CHECK(jaccard(a, a) == 1.0);
    CHECK(j_min(a, a) == 1.0);
    const auto c = make_set("c", {7, 8});
    CHECK(jaccard(a, c) == 0.0);
    CHECK(j_min(a, c) == 0.0);
    const auto big = make_set("big", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    CHECK(j_min(a, big) == 1.0);
    CHECK_THROWS_AS(j_min(a, make_set("e", {})), std::invalid_argument);
    CHECK_THROWS_AS(jaccard(make_set("e", {}), a), std::invalid_argument);
}

TEST_CASE("sharing indices: bounds, symmetry and j_min >= jaccard on random sets") {
    Rng rng(22, 0);
    for (int t = 0; t < 500; ++t) {
        std::vector<UserId> ua, ub;
        const auto na = 1 + rng.below(40);
        const auto nb = 1 + rng.below(40);
        for (std::uint64_t i = 0; i < na; ++i) ua.push_back(static_cast<UserId>(rng.below(60)));
        for (std::uint64_t i = 0; i < nb; ++i) ub.push_back(static_cast<UserId>(rng.below(60)));
        const auto a = make_set("a", ua);
        const auto b = make_set("b", ub);
        const double j = jaccard(a, b);
        const double m = j_min(a, b);
        CHECK(j == jaccard(b, a));
        CHECK(m == j_min(b, a));
        CHECK(j >= 0.0);
        CHECK(m <= 1.0);
        CHECK(m >= j);
    }
}

TEST_CASE("build_graph thresholds and partitions") {
    const std::vector<CustomerSet> sets{make_set("1", {1, 2, 3}), make_set("2", {3, 4}), make_set("3", {9})};
    const std::map<StoreRef, PlanarPoint> known{{{"m", "1"}, {0, 0}}, {{"m", "2"}, {100, 0}}};

    SUBCASE("theta 0 keeps every pair") {
        const auto g = build_graph(sets, known, 0.0);
        CHECK(g.known().size() == 2);
        CHECK(g.unknown().size() == 1);
        CHECK(g.entries().size() == 2);
        CHECK(g.known_pair_samples().size() == 1);
        CHECK(g.known_sharing(0, 1) == 0.5);
        CHECK(g.entry(0, 0) == 0.0);
        CHECK(g.known_neighbors(0).size() == 1);
    }
    SUBCASE("an impossible threshold leaves no entries") {
        const auto g = build_graph(sets, known, 1.01);
        CHECK(g.entries().empty());
        CHECK(g.unknown_neighbors(0).empty());
        CHECK(g.known_neighbors(0).empty());
        // known-known sharing is kept for density estimation regardless
        CHECK(g.known_pair_samples().size() == 1);
    }
    SUBCASE("configuration errors") {
        CHECK_THROWS_AS(build_graph(sets, known, -0.1), ConfigError);
        CHECK_THROWS_AS(build_graph(sets, known, NAN), ConfigError);
        auto extra = known;
        extra[{"m", "missing"}] = {5, 5};
        CHECK_THROWS_AS(build_graph(sets, extra, 0.15), std::invalid_argument);
    }
}

TEST_CASE("synthetic 50-store graph matches a brute-force pairwise scan") {
    SynthConfig cfg;
    cfg.seed = 23;
    cfg.n_stores = 50;
    cfg.n_customers = 2000;
    const auto city = generate(cfg);
    const auto split = split_known(city, 0.5, 23);
    const auto sets = build_customer_sets(city.records, 1);
    const auto known = admitted(split.known, sets);
    const auto g = build_graph(sets, known, 0.15, 3);

    const auto scan = scan_records(city.records);
    std::set<std::pair<StoreRef, StoreRef>> expected;
    for (const auto& [ks, kloc] : known) {
        for (const auto& us : split.unknown) {
            if (!scan.count(us) || !scan.count(ks)) continue;
            if (oracle::set_sharing(scan.at(ks), scan.at(us)).j_min >= 0.15) expected.insert({ks, us});
        }
    }
    std::set<std::pair<StoreRef, StoreRef>> got;
    for (const auto& e : g.entries()) {
        got.insert({g.known()[e.known].store, g.unknown()[e.unknown]});
        CHECK(e.m >= 0.15);
        CHECK(e.m <= 1.0);
    }
    CHECK(got == expected);

    for (std::size_t a = 0; a < g.known().size(); ++a) {
        for (std::size_t b = a + 1; b < g.known().size(); ++b) {
            const auto o = oracle::set_sharing(scan.at(g.known()[a].store), scan.at(g.known()[b].store));
            CHECK(g.known_sharing(a, b) == o.j_min);
        }
    }
}

TEST_CASE("thresholding is monotone and construction ignores input order") {
    SynthConfig cfg;
    cfg.seed = 24;
    cfg.n_stores = 40;
    cfg.n_customers = 1500;
    const auto city = generate(cfg);
    const auto split = split_known(city, 0.4, 24);
    auto sets = build_customer_sets(city.records, 1);
    const auto known = admitted(split.known, sets);

    const auto lo = build_graph(sets, known, 0.1);
    const auto hi = build_graph(sets, known, 0.2);
    for (const auto& e : hi.entries()) {
        const auto m = lo.entry(e.known, e.unknown);
        REQUIRE(m.has_value());
        CHECK(*m == e.m);
    }
    CHECK(hi.entries().size() <= lo.entries().size());

    std::reverse(sets.begin(), sets.end());
    std::swap(sets[3], sets[17]);
    const auto shuffled = build_graph(sets, known, 0.1, 4);
    REQUIRE(shuffled.entries().size() == lo.entries().size());
    for (std::size_t i = 0; i < lo.entries().size(); ++i) {
        CHECK(shuffled.entries()[i].known == lo.entries()[i].known);
        CHECK(shuffled.entries()[i].unknown == lo.entries()[i].unknown);
        CHECK(shuffled.entries()[i].m == lo.entries()[i].m);
    }
    CHECK(shuffled.known_pair_samples() == lo.known_pair_samples());
}
