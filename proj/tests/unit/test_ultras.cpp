#include "doctest.h"

#include "ultras/ultras.hpp"

using namespace ultras;

namespace {

WeightFunction wf(const MonoidRef &m, std::map<StateId, Weight> entries) {
    return WeightFunction(m, entries);
}

// x --a--> {y: 5}, y terminal on a.
Ultras tiny_functional() {
    auto q = Monoid::nonneg_rational_plus();
    Ultras u(q, {"a"});
    u.add_state("x");
    u.add_state("y");
    u.add_transition("x", "a", wf(q, {{"y", Weight::number(5)}}));
    u.add_transition("y", "a", WeightFunction(q));
    return u;
}

}  // namespace

TEST_CASE("stuck and terminal are different shapes") {
    auto q = Monoid::nonneg_rational_plus();
    Ultras u(q, {"a"});
    u.add_state("stuck");
    u.add_state("terminal");
    u.add_transition("terminal", "a", WeightFunction(q));
    CHECK(u.is_stuck("stuck", "a"));
    CHECK_FALSE(u.is_stuck("terminal", "a"));
    CHECK(u.transitions("terminal", "a").size() == 1);
    CHECK(u.transitions("terminal", "a").begin()->empty());
}

TEST_CASE("is_functional") {
    CHECK(tiny_functional().is_functional());

    auto q = Monoid::nonneg_rational_plus();
    Ultras stuck(q, {"a"});
    stuck.add_state("x");
    CHECK_FALSE(stuck.is_functional());

    Ultras twice(q, {"a"});
    twice.add_state("x");
    twice.add_transition("x", "a", WeightFunction(q));
    twice.add_transition("x", "a", wf(q, {{"x", Weight::number(1)}}));
    CHECK_FALSE(twice.is_functional());

    Ultras open(q, {"a"});
    open.add_state("x");
    open.mark_boundary("y");
    CHECK_THROWS_WITH_AS(open.is_functional(), doctest::Contains("boundary"), domain_error);
}

TEST_CASE("validate catches dangling supports") {
    auto q = Monoid::nonneg_rational_plus();
    Ultras u(q, {"a"});
    u.add_state("x");
    u.add_transition("x", "a", wf(q, {{"ghost", Weight::number(1)}}));
    CHECK_THROWS_AS(u.validate(), domain_error);
    u.mark_boundary("ghost");
    CHECK_NOTHROW(u.validate());
}

TEST_CASE("segala, generative and reactive constraints") {
    auto q = Monoid::nonneg_rational_plus();
    Ultras u(q, {"a", "b"});
    u.add_state("x");
    u.add_state("p");
    u.add_state("q");
    u.add_transition("x", "a", wf(q, {{"p", Weight::number(1, 2)}, {"q", Weight::number(1, 2)}}));
    CHECK(u.is_segala());

    Ultras bad(q, {"a"});
    bad.add_state("x");
    bad.add_state("p");
    bad.add_transition("x", "a", wf(q, {{"p", Weight::number(3, 2)}}));
    CHECK_FALSE(bad.is_segala());

    Ultras empty_only(q, {"a"});
    empty_only.add_state("x");
    CHECK(empty_only.is_segala());  // vacuous

    // Generative: functional with totals in {0,1}.
    Ultras gen(q, {"a", "b"});
    gen.add_state("x");
    gen.add_state("y");
    for (const StateId &s : {"x", "y"}) {
        gen.add_transition(s, "b", WeightFunction(q));
        if (s == "x")
            gen.add_transition(s, "a", wf(q, {{"y", Weight::number(1)}}));
        else
            gen.add_transition(s, "a", WeightFunction(q));
    }
    CHECK(gen.is_generative());

    Ultras half(q, {"a"});
    half.add_state("x");
    half.add_state("y");
    half.add_transition("x", "a", wf(q, {{"y", Weight::number(1, 2)}}));
    half.add_transition("y", "a", WeightFunction(q));
    CHECK_FALSE(half.is_generative());

    // Reactive: per-(state,label) sums of totals in {0,1}.
    Ultras reactive(q, {"a"});
    reactive.add_state("x");
    reactive.add_state("y");
    reactive.add_transition("x", "a", wf(q, {{"y", Weight::number(1, 2)}}));
    reactive.add_transition("x", "a", wf(q, {{"x", Weight::number(1, 2)}}));
    reactive.add_transition("y", "a", WeightFunction(q));
    CHECK(reactive.is_reactive());

    CHECK_THROWS_AS(Ultras(Monoid::nat_plus(), {"a"}).is_segala(), domain_error);
}

TEST_CASE("wlts round trip") {
    Ultras u = tiny_functional();
    Wlts w = to_wlts(u);
    CHECK(w.weight("x", "a", "y") == Weight::number(5));
    CHECK(w.weight("y", "a", "x") == Weight::number(0));
    Ultras back = from_wlts(w);
    CHECK(back.states() == u.states());
    CHECK(back.all_transitions() == u.all_transitions());
    CHECK(to_wlts(back) == w);

    // An all-zero row becomes the terminal outcome, never a stuck pair.
    auto q = Monoid::nonneg_rational_plus();
    Wlts zero_row(q, {"a"});
    zero_row.add_state("s");
    Ultras lifted = from_wlts(zero_row);
    CHECK_FALSE(lifted.is_stuck("s", "a"));
    CHECK(lifted.transitions("s", "a").begin()->empty());

    Ultras stuck(q, {"a"});
    stuck.add_state("s");
    CHECK_THROWS_AS(to_wlts(stuck), domain_error);
}

TEST_CASE("homomorphism checking") {
    Ultras u = tiny_functional();
    std::map<StateId, StateId> identity{{"x", "x"}, {"y", "y"}};
    CHECK(check_homomorphism(u, u, identity));

    // Collapsing a stuck state onto a terminal state is not a homomorphism.
    auto q = Monoid::nonneg_rational_plus();
    Ultras mixed(q, {"a"});
    mixed.add_state("s");
    mixed.add_state("t");
    mixed.add_transition("t", "a", WeightFunction(q));
    Ultras target(q, {"a"});
    target.add_state("t");
    target.add_transition("t", "a", WeightFunction(q));
    CHECK_FALSE(check_homomorphism(mixed, target, {{"s", "t"}, {"t", "t"}}));

    CHECK_THROWS_AS(check_homomorphism(u, Ultras(Monoid::nat_plus(), {"a"}), identity), domain_error);
}

TEST_CASE("homomorphism requires a total map") {
    Ultras u = tiny_functional();
    CHECK_THROWS_WITH_AS(check_homomorphism(u, u, {{"x", "x"}}), doctest::Contains("undefined"),
                         domain_error);
}

TEST_CASE("text serialization is canonical") {
    Ultras u = tiny_functional();
    CHECK(u.to_text() == "monoid nonneg-rational-plus\n"
                         "labels a\n"
                         "states x y\n"
                         "x -[a]-> {y: 5}\n"
                         "y -[a]-> {}\n");
}
