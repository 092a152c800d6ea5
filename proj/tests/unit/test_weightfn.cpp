#include "doctest.h"

#include <random>

#include "ultras/weightfn.hpp"

using namespace ultras;

namespace {

WeightFunction wf(const MonoidRef &m, std::map<StateId, Weight> entries) {
    return WeightFunction(m, entries);
}

// Small random weight functions for property checks.
WeightFunction random_wf(std::mt19937 &rng, const MonoidRef &m) {
    static const std::vector<StateId> pool{"p", "q", "r", "s", "t"};
    std::uniform_int_distribution<int> count(0, 4), val(0, 3);
    std::map<StateId, Weight> entries;
    int k = count(rng);
    for (int i = 0; i < k; ++i) {
        Weight w = m->kind() == Monoid::Kind::BoolOr ? Weight::boolean(val(rng) % 2 == 1)
                                                     : Weight::number(val(rng));
        entries[pool[static_cast<std::size_t>(val(rng)) % pool.size()]] = w;
    }
    return WeightFunction(m, entries);
}

}  // namespace

TEST_CASE("support and canonical form") {
    auto n = Monoid::nat_plus();
    auto f = wf(n, {{"x", Weight::number(2)}, {"y", Weight::number(3)}, {"z", Weight::number(0)}});
    CHECK(f.support() == std::set<StateId>{"x", "y"});
    CHECK(f.at("z") == Weight::number(0));
    CHECK(f.entries().size() == 2);  // the explicit zero is dropped
    CHECK(WeightFunction(n).support().empty());
    auto b = Monoid::bool_or();
    CHECK(wf(b, {{"p", Weight::boolean(true)}}).support() == std::set<StateId>{"p"});
}

TEST_CASE("total weight") {
    auto q = Monoid::nonneg_rational_plus();
    CHECK(wf(q, {{"x", Weight::number(1, 2)}, {"y", Weight::number(1, 2)}}).total_weight() ==
          Weight::number(1));
    CHECK(WeightFunction(q).total_weight() == Weight::number(0));
    auto n = Monoid::nat_plus();
    CHECK(wf(n, {{"x", Weight::number(2)}, {"y", Weight::number(3)}}).total_weight() == Weight::number(5));
}

TEST_CASE("restriction") {
    auto n = Monoid::nat_plus();
    auto f = wf(n, {{"x", Weight::number(2)}, {"y", Weight::number(3)}});
    CHECK(f.restrict_weight({"x"}) == Weight::number(2));
    CHECK(f.restrict_weight({}) == Weight::number(0));
    CHECK(f.restrict_weight({"x", "y", "z"}) == Weight::number(5));
}

TEST_CASE("pushforward sums over preimages") {
    auto n = Monoid::nat_plus();
    auto f = wf(n, {{"x", Weight::number(2)}, {"y", Weight::number(3)}});
    auto g = f.pushforward(std::map<StateId, StateId>{{"x", "z"}, {"y", "z"}});
    CHECK(g == wf(n, {{"z", Weight::number(5)}}));

    auto b = Monoid::bool_or();
    auto h = wf(b, {{"x", Weight::boolean(true)}, {"y", Weight::boolean(true)}});
    CHECK(h.pushforward(std::map<StateId, StateId>{{"x", "z"}, {"y", "z"}}) ==
          wf(b, {{"z", Weight::boolean(true)}}));

    CHECK_THROWS_AS(f.pushforward(std::map<StateId, StateId>{{"x", "z"}}), domain_error);
}

TEST_CASE("pushforward properties on random functions") {
    std::mt19937 rng(7);
    auto id = [](const StateId &s) { return s; };
    auto f1 = [](const StateId &s) { return s == "p" || s == "q" ? StateId("m") : s; };
    auto f2 = [](const StateId &s) { return s == "m" ? StateId("w") : StateId("v"); };
    for (const auto &m : {Monoid::nat_plus(), Monoid::bool_or(), Monoid::nonneg_rational_plus()}) {
        for (int i = 0; i < 200; ++i) {
            auto rho = random_wf(rng, m);
            CHECK(rho.pushforward(id) == rho);
            CHECK(rho.pushforward(f1).total_weight() == rho.total_weight());
            auto composed = rho.pushforward([&](const StateId &s) { return f2(f1(s)); });
            CHECK(composed == rho.pushforward(f1).pushforward(f2));
        }
    }
}

TEST_CASE("club selection") {
    auto n = Monoid::nat_plus();
    auto f = wf(n, {{"x", Weight::number(2)}});
    CHECK(f.select_by_club(Club::all_nonzero()) == std::set<StateId>{"x"});
    CHECK(f.select_by_club(Club::empty()).empty());

    auto m4 = Monoid::finite_table({"0", "a", "b", "1"}, "0",
                                   {{"a", "a", "1"},
                                    {"a", "b", "1"},
                                    {"a", "1", "1"},
                                    {"b", "b", "1"},
                                    {"b", "1", "1"},
                                    {"1", "1", "1"}});
    auto g = wf(m4, {{"x", Weight::table(1)}, {"y", Weight::table(2)}});
    auto clubs = m4->enumerate_clubs();
    REQUIRE(clubs.size() == 2);
    CHECK(g.select_by_club(clubs[1]) == std::set<StateId>{"x", "y"});
    CHECK_THROWS_AS(g.select_by_club(Club::subset({0})), domain_error);
}

TEST_CASE("selection distributes over sums with disjoint supports") {
    auto m4 = Monoid::finite_table({"0", "a", "b", "1"}, "0",
                                   {{"a", "a", "1"},
                                    {"a", "b", "1"},
                                    {"a", "1", "1"},
                                    {"b", "b", "1"},
                                    {"b", "1", "1"},
                                    {"1", "1", "1"}});
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> val(0, 3);
    for (int i = 0; i < 100; ++i) {
        std::map<StateId, Weight> e1, e2;
        // Disjoint supports by construction.
        for (const StateId &s : {"p", "q"})
            e1[s] = Weight::table(static_cast<std::uint32_t>(val(rng)));
        for (const StateId &s : {"r", "s"})
            e2[s] = Weight::table(static_cast<std::uint32_t>(val(rng)));
        WeightFunction rho(m4, e1), sigma(m4, e2);
        auto sum = rho.plus(sigma);
        for (const auto &club : m4->enumerate_clubs()) {
            auto from_sum = sum.select_by_club(club);
            auto separate = rho.select_by_club(club);
            auto other = sigma.select_by_club(club);
            separate.insert(other.begin(), other.end());
            CHECK(from_sum == separate);
        }
    }
}

TEST_CASE("selection stays within the support") {
    std::mt19937 rng(13);
    for (const auto &m : {Monoid::nat_plus(), Monoid::bool_or()}) {
        for (int i = 0; i < 100; ++i) {
            auto rho = random_wf(rng, m);
            auto sel = rho.select_by_club(Club::all_nonzero());
            for (const auto &s : sel)
                CHECK(rho.support().count(s));
        }
    }
}

TEST_CASE("serialization") {
    auto q = Monoid::nonneg_rational_plus_infinity();
    auto f = wf(q, {{"y", Weight::number(1, 2)}, {"x", Weight::infinity()}});
    CHECK(f.to_string() == "{x: inf, y: 1/2}");
    CHECK(WeightFunction(q).to_string() == "{}");
}
