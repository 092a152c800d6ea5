#include "doctest.h"

#include "ultras/monoid.hpp"

using namespace ultras;

namespace {

// The four-element monoid where any two non-zero elements sum to 1.
MonoidRef m4() {
    return Monoid::finite_table({"0", "a", "b", "1"}, "0",
                                {{"a", "a", "1"},
                                 {"a", "b", "1"},
                                 {"a", "1", "1"},
                                 {"b", "b", "1"},
                                 {"b", "1", "1"},
                                 {"1", "1", "1"}});
}

MonoidRef z2() { return Monoid::finite_table({"0", "1"}, "0", {{"1", "1", "0"}}); }

MonoidRef bool_table() { return Monoid::finite_table({"ff", "tt"}, "ff", {{"tt", "tt", "tt"}}); }

// Independent check of the club conditions, straight from the definition.
bool club_by_definition(const Monoid &m, const std::set<std::uint32_t> &c) {
    const auto n = static_cast<std::uint32_t>(m.table_size());
    for (std::uint32_t v = 0; v < n; ++v) {
        if (m.is_zero(Weight::table(v)) && c.count(v))
            return false;
        for (std::uint32_t w = 0; w < n; ++w) {
            std::uint32_t s = m.table_sum(v, w).table_index();
            if (c.count(v) && !c.count(s))
                return false;
            if (!c.count(v) && !c.count(w) && c.count(s))
                return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("addition in the built-in monoids") {
    auto b = Monoid::bool_or();
    CHECK(b->add(Weight::boolean(true), Weight::boolean(false)) == Weight::boolean(true));
    auto n = Monoid::nat_plus();
    CHECK(n->add(Weight::number(2), Weight::number(3)) == Weight::number(5));
    auto ri = Monoid::nonneg_rational_plus_infinity();
    CHECK(ri->add(Weight::infinity(), Weight::number(3)) == Weight::infinity());
    auto q = Monoid::nonneg_rational_plus();
    CHECK(q->add(Weight::number(1, 2), Weight::number(1, 2)) == Weight::number(1));
    auto mx = Monoid::nat_max();
    CHECK(mx->add(Weight::number(2), Weight::number(3)) == Weight::number(3));
}

TEST_CASE("carrier membership is enforced") {
    auto n = Monoid::nat_plus();
    CHECK_THROWS_AS(n->add(Weight::number(1, 2), Weight::number(1)), domain_error);
    CHECK_THROWS_AS(n->add(Weight::infinity(), Weight::number(1)), domain_error);
    auto t = m4();
    CHECK_THROWS_AS(t->add(Weight::number(1), Weight::table(0)), domain_error);
    CHECK_THROWS_AS(t->add(Weight::table(9), Weight::table(0)), domain_error);
}

TEST_CASE("finite tables are validated at construction") {
    // a+b deliberately not associative: (a+a)+b = 1+b = 1 vs a+(a+b) = a+0 = a
    CHECK_THROWS_WITH_AS(Monoid::finite_table({"0", "a", "b", "1"}, "0",
                                              {{"a", "a", "1"},
                                               {"a", "b", "0"},
                                               {"a", "1", "1"},
                                               {"b", "b", "1"},
                                               {"b", "1", "1"},
                                               {"1", "1", "1"}}),
                         doctest::Contains("associative"), domain_error);
    CHECK_THROWS_WITH_AS(Monoid::finite_table({"0", "a"}, "0", {}), doctest::Contains("incomplete"),
                         domain_error);
    CHECK_THROWS_AS(Monoid::finite_table({"0", "a"}, "z", {{"a", "a", "a"}}), domain_error);
    std::vector<std::string> huge;
    for (int i = 0; i < 65; ++i)
        huge.push_back("e" + std::to_string(i));
    CHECK_THROWS_WITH_AS(Monoid::finite_table(huge, "e0", {}), doctest::Contains("exceeds"), domain_error);
}

TEST_CASE("is_club on built-ins and tables") {
    CHECK(Monoid::nat_plus()->is_club(Club::all_nonzero()));
    CHECK(Monoid::nat_plus()->is_club(Club::empty()));
    CHECK(bool_table()->is_club(Club::subset({1})));  // {tt}
    CHECK_FALSE(bool_table()->is_club(Club::subset({0})));
    CHECK_FALSE(z2()->is_club(Club::subset({1})));
    CHECK_THROWS_AS(m4()->is_club(Club::subset({7})), domain_error);
}

TEST_CASE("enumerate_clubs matches the definition exhaustively") {
    for (const auto &m : {m4(), z2(), bool_table()}) {
        auto clubs = m->enumerate_clubs();
        std::set<std::set<std::uint32_t>> found;
        for (const auto &c : clubs) {
            CHECK(m->is_club(c));
            found.insert(c.elements());
        }
        // Cross-check against a direct scan of every subset.
        const auto n = m->table_size();
        std::size_t expected = 0;
        for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
            std::set<std::uint32_t> subset;
            for (std::uint32_t i = 0; i < n; ++i)
                if (mask & (1ull << i))
                    subset.insert(i);
            if (club_by_definition(*m, subset)) {
                ++expected;
                CHECK(found.count(subset));
            }
        }
        CHECK(clubs.size() == expected);
    }
}

TEST_CASE("known club inventories") {
    auto bool_clubs = bool_table()->enumerate_clubs();
    REQUIRE(bool_clubs.size() == 2);  // {} and {tt}
    CHECK(bool_clubs[1].elements() == std::set<std::uint32_t>{1});

    auto m4_clubs = m4()->enumerate_clubs();
    REQUIRE(m4_clubs.size() == 2);
    CHECK(m4()->format_club(m4_clubs[1]) == "{a,b,1}");

    CHECK(z2()->enumerate_clubs().size() == 1);  // only the empty club

    auto nat_clubs = Monoid::nat_plus()->enumerate_clubs();
    REQUIRE(nat_clubs.size() == 2);
    CHECK(nat_clubs[0].kind() == Club::Kind::Empty);
    CHECK(nat_clubs[1].kind() == Club::Kind::AllNonzero);
}

TEST_CASE("the club biconditional holds on every enumerated club") {
    for (const auto &m : {m4(), z2(), bool_table()}) {
        for (const auto &c : m->enumerate_clubs()) {
            for (std::uint32_t v = 0; v < m->table_size(); ++v) {
                CHECK_FALSE((m->is_zero(Weight::table(v)) && c.contains(*m, Weight::table(v))));
                for (std::uint32_t w = 0; w < m->table_size(); ++w) {
                    bool in_sum = c.contains(*m, m->table_sum(v, w));
                    bool either = c.contains(*m, Weight::table(v)) || c.contains(*m, Weight::table(w));
                    CHECK(in_sum == either);
                }
            }
        }
    }
}

TEST_CASE("positivity") {
    CHECK(Monoid::nat_plus()->is_positive());
    CHECK(Monoid::nonneg_rational_plus()->is_positive());
    CHECK_FALSE(z2()->is_positive());
    CHECK(m4()->is_positive());
    CHECK(bool_table()->is_positive());
}

TEST_CASE("positive finite tables have the all-nonzero club") {
    for (const auto &m : {m4(), bool_table()}) {
        REQUIRE(m->is_positive());
        std::set<std::uint32_t> nonzero;
        for (std::uint32_t i = 0; i < m->table_size(); ++i)
            if (!m->is_zero(Weight::table(i)))
                nonzero.insert(i);
        CHECK(m->is_club(Club::subset(nonzero)));
        CHECK(m->is_club(Club::all_nonzero()));
    }
    CHECK_FALSE(z2()->is_club(Club::all_nonzero()));
}

TEST_CASE("refinement") {
    CHECK_FALSE(m4()->is_refinement());
    CHECK(Monoid::nat_plus()->is_refinement());
    CHECK(bool_table()->is_refinement());  // brute force over all quadruples
    CHECK(z2()->is_refinement());          // groups refine: m11 = r1, m12 = r1+c1, ...
}

TEST_CASE("formatting and parsing round-trips") {
    auto q = Monoid::nonneg_rational_plus_infinity();
    CHECK(q->format(Weight::number(1, 2)) == "1/2");
    CHECK(q->format(Weight::number(5)) == "5");
    CHECK(q->format(Weight::infinity()) == "inf");
    CHECK(q->parse("3/4") == Weight::number(3, 4));
    CHECK(q->parse("inf") == Weight::infinity());
    CHECK_THROWS_AS(q->parse("x"), domain_error);
    CHECK_THROWS_AS(Monoid::nonneg_rational_plus()->parse("1/0"), domain_error);
    auto t = m4();
    CHECK(t->parse("a") == Weight::table(1));
    CHECK(t->format(Weight::table(3)) == "1");
}

TEST_CASE("built-in lookup by name") {
    CHECK(builtin_monoid("bool-or")->kind() == Monoid::Kind::BoolOr);
    CHECK(builtin_monoid("nonneg-rational-plus-infinity")->kind() ==
          Monoid::Kind::NonnegRationalPlusInfinity);
    CHECK(builtin_monoid("nat-max")->kind() == Monoid::Kind::NatMax);
    CHECK_THROWS_AS(builtin_monoid("strings"), domain_error);
}
