#include "doctest.h"

#include <fstream>
#include <sstream>

#include "ultras/pepa.hpp"
#include "ultras/specfile.hpp"

using namespace ultras;

namespace {

std::string slurp(const std::string &name) {
    std::ifstream in(std::string(ULTRAS_DATA_DIR) + "/" + name);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("parsing the demo specification") {
    Specification spec = parse_spec_file(slurp("demo.spec"));
    CHECK(validate_specification(spec).empty());
    CHECK(spec.monoid->kind() == Monoid::Kind::NatPlus);
    CHECK(spec.labels == std::set<Label>{"a", "b"});
    REQUIRE(spec.rules.size() == 2);

    // Constants in targets resolve to nullary operators, not variables.
    const Rule &axiom = spec.rules[0];
    CHECK(axiom.target.kind() == ThetaTerm::Kind::Op);
    CHECK(validate_rule(spec, axiom).empty());

    const Rule &pick = spec.rules[1];
    REQUIRE(pick.clubs.size() == 1);
    CHECK(pick.clubs[0].club.kind() == Club::Kind::AllNonzero);
    CHECK(pick.clubs[0].yvar == "y1");

    Ultras u = induce(spec, {parse_term("f(c)", spec.process_sig)}, 50);
    CHECK(u.transitions("f(c)", "a").size() == 2);
}

TEST_CASE("spec round trip through the serializer") {
    Specification spec = parse_spec_file(slurp("demo.spec"));
    std::string text = serialize_specification(spec);
    Specification again = parse_spec_file(text);
    CHECK(serialize_specification(again) == text);
    CHECK(validate_specification(again).empty());
    // The reparsed specification derives the same system.
    Ultras u1 = induce(spec, {parse_term("f(c)", spec.process_sig)}, 50);
    Ultras u2 = induce(again, {parse_term("f(c)", again.process_sig)}, 50);
    CHECK(u1.all_transitions() == u2.all_transitions());
}

TEST_CASE("spec parse errors carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_spec_file("labels a\nbogus line\n"), doctest::Contains("line 2"),
                         parse_error);
    CHECK_THROWS_AS(parse_spec_file("labels a\n"), parse_error);  // no monoid
    CHECK_THROWS_WITH_AS(parse_spec_file("monoid nat-plus\nrule f -[a]-> bot when zz\n"),
                         doctest::Contains("unrecognised premise"), parse_error);
    CHECK_THROWS_WITH_AS(parse_spec_file("monoid nope\n"), doctest::Contains("line 1"), parse_error);
}

TEST_CASE("validation diagnostics for a bad specification") {
    Specification spec = parse_spec_file(slurp("bad.spec"));
    auto diags = validate_specification(spec);
    REQUIRE_FALSE(diags.empty());
    bool overlap = false;
    for (const auto &d : diags)
        overlap |= d.find("overlapping positive/negative premises") != std::string::npos;
    CHECK(overlap);
}

TEST_CASE("monoid table files") {
    MonoidRef m = parse_monoid_file(slurp("m4.table"));
    CHECK(m->table_size() == 4);
    CHECK(m->is_positive());
    CHECK_FALSE(m->is_refinement());
    CHECK_THROWS_AS(parse_monoid_file("monoid m { elems: 0 a; unit: 0; }"), parse_error);
    CHECK_THROWS_AS(parse_monoid_file("# nothing\n"), parse_error);
    CHECK(parse_monoid_file("monoid bool-or\n")->kind() == Monoid::Kind::BoolOr);
}

TEST_CASE("sgsos files translate and derive") {
    SgsosFile file = parse_sgsos_file(slurp("copy.sgsos"));
    REQUIRE(file.rules.size() == 2);
    CHECK(file.rules[0].targets.size() == 2);
    Specification spec = translations::translate_segala(file.process_sig, file.labels, file.rules);
    CHECK(validate_specification(spec).empty());
    Ultras u = induce(spec, {parse_term("copy(src)", spec.process_sig)}, 50);
    CHECK(u.is_segala());
    const auto &fns = u.transitions("copy(src)", "a");
    REQUIRE(fns.size() == 1);
    CHECK(fns.begin()->entries().size() == 4);  // product over the two scans

    // The emitted specification is in the spec-file format.
    Specification reparsed = parse_spec_file(serialize_specification(spec));
    Ultras u2 = induce(reparsed, {parse_term("copy(src)", reparsed.process_sig)}, 50);
    CHECK(u.all_transitions() == u2.all_transitions());
}

TEST_CASE("wgsos files translate and derive") {
    WgsosFile file = parse_wgsos_file(slurp("sum.wgsos"));
    REQUIRE(file.rules.size() == 3);
    CHECK(file.rules[2].beta.monomials.size() == 2);
    Specification spec =
        translations::translate_wgsos(file.monoid, file.process_sig, file.labels, file.rules);
    Ultras u = induce(spec, {parse_term("k(c0)", spec.process_sig)}, 50);
    CHECK(u.is_functional());
    Wlts w = to_wlts(u);
    CHECK(w.weight("k(c0)", "a", "pair2(p1,p2)") == Weight::number(5));

    Specification reparsed = parse_spec_file(serialize_specification(spec));
    CHECK(validate_specification(reparsed).empty());
    Ultras u2 = induce(reparsed, {parse_term("k(c0)", reparsed.process_sig)}, 50);
    CHECK(u.all_transitions() == u2.all_transitions());
}

TEST_CASE("system serializations are deterministic") {
    Specification spec = parse_spec_file(slurp("demo.spec"));
    Ultras u = induce(spec, {parse_term("f(c)", spec.process_sig)}, 50);
    CHECK(ultras_text(u) == ultras_text(u));
    std::string json = ultras_json(u);
    CHECK(json.find("\"monoid\"") != std::string::npos);
    CHECK(json.find("f(c)") != std::string::npos);
    std::string dot = ultras_dot(u);
    CHECK(dot.rfind("digraph", 0) == 0);
    CHECK(dot.find("\"f(c)\" -> \"d\"") != std::string::npos);
}

TEST_CASE("the stochastic rule set round-trips through the file format") {
    Specification spec = pepa::pepa_wfgsos_spec({"a"}, {mpq_class(2), mpq_class(3)}, {}, {});
    std::string text = serialize_specification(spec);
    Specification again = parse_spec_file(text);
    CHECK(validate_specification(again).empty());
    auto p = pepa::parse_pepa_term("(a,2).nil + (a,3).nil");
    Ultras u1 = induce(spec, {pepa::to_sigma_term(p)}, 50);
    Ultras u2 = induce(again, {pepa::to_sigma_term(p)}, 50);
    CHECK(u1.all_transitions() == u2.all_transitions());
}
