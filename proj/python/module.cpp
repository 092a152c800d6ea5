#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ultras/pepa.hpp"
#include "ultras/specfile.hpp"

namespace py = pybind11;
using namespace ultras;

namespace {

std::string render(const Ultras &u, const std::string &format) {
    if (format == "structured")
        return ultras_json(u);
    if (format == "graph")
        return ultras_dot(u);
    if (format == "text")
        return ultras_text(u);
    throw domain_error("unknown format '" + format + "'");
}

std::vector<Term> parse_roots(const std::vector<std::string> &roots, const Signature &sig) {
    std::vector<Term> out;
    for (const auto &r : roots)
        out.push_back(parse_term(r, sig));
    return out;
}

Specification load(const std::string &text) {
    Specification spec = parse_spec_file(text);
    auto diags = validate_specification(spec);
    if (!diags.empty())
        throw domain_error(diags.front());
    return spec;
}

py::object probe_to_py(ProbeResult r) {
    switch (r) {
    case ProbeResult::Holds:
        return py::bool_(true);
    case ProbeResult::Fails:
        return py::bool_(false);
    case ProbeResult::Inconclusive:
        return py::none();
    }
    return py::none();
}

}  // namespace

PYBIND11_MODULE(pyultras, m) {
    m.doc() = "monoid-weighted transition systems: rule-based derivation, bisimulation, minimization";
    m.attr("__version__") = "0.1.0";

    py::register_exception<parse_error>(m, "ParseError", PyExc_ValueError);
    py::register_exception<domain_error>(m, "DomainError", PyExc_ValueError);

    m.def(
        "check_spec", [](const std::string &text) { return validate_specification(parse_spec_file(text)); },
        py::arg("text"), "Validation diagnostics of a specification file (empty list = valid).");

    m.def(
        "derive",
        [](const std::string &spec_text, const std::vector<std::string> &roots, std::size_t budget,
           const std::string &format) {
            Specification spec = load(spec_text);
            return render(induce(spec, parse_roots(roots, spec.process_sig), budget), format);
        },
        py::arg("spec_text"), py::arg("roots"), py::arg("budget") = 1000, py::arg("format") = "text",
        "Derive the induced system from root terms.");

    m.def(
        "bisimilar",
        [](const std::string &spec1_text, const std::string &spec2_text, const std::string &root1,
           const std::string &root2, std::size_t budget) -> py::object {
            Specification s1 = load(spec1_text);
            Specification s2 = load(spec2_text);
            Term p = parse_term(root1, s1.process_sig);
            Term q = parse_term(root2, s2.process_sig);
            Ultras u1 = induce(s1, {p}, budget);
            Ultras u2 = induce(s2, {q}, budget);
            if (!u1.boundary().empty() || !u2.boundary().empty())
                return py::none();
            Partition part = largest_bisimulation(u1, u2);
            return py::bool_(
                part.same_block(TaggedState{0, p.to_string()}, TaggedState{1, q.to_string()}));
        },
        py::arg("spec1_text"), py::arg("spec2_text"), py::arg("root1"), py::arg("root2"),
        py::arg("budget") = 1000,
        "Whether the two roots are bisimilar; None when exploration was truncated.");

    m.def(
        "minimize",
        [](const std::string &spec_text, const std::vector<std::string> &roots, std::size_t budget,
           const std::string &format) {
            Specification spec = load(spec_text);
            Ultras u = induce(spec, parse_roots(roots, spec.process_sig), budget);
            u.require_fully_explored("minimize");
            return render(quotient(u, largest_bisimulation(u)), format);
        },
        py::arg("spec_text"), py::arg("roots"), py::arg("budget") = 1000, py::arg("format") = "text",
        "Derive and collapse to the bisimulation quotient.");

    m.def(
        "pepa_derive",
        [](const std::string &text, std::size_t budget, const std::string &format) {
            return render(pepa::derive_ctmc(pepa::parse_pepa_file(text).main, budget), format);
        },
        py::arg("text"), py::arg("budget") = 1000, py::arg("format") = "text",
        "Derive the stochastic system of a process file.");

    m.def(
        "pepa_bisimilar",
        [](const std::string &text1, const std::string &text2, std::size_t budget) {
            return probe_to_py(pepa::strong_equivalence(pepa::parse_pepa_file(text1).main,
                                                        pepa::parse_pepa_file(text2).main, budget));
        },
        py::arg("text1"), py::arg("text2"), py::arg("budget") = 1000,
        "Strong equivalence of two process files; None when truncated.");

    m.def(
        "apparent_rate",
        [](const std::string &term, const std::string &label) {
            mpq_class r = pepa::apparent_rate(pepa::parse_pepa_term(term), label);
            return Monoid::nonneg_rational_plus()->format(Weight::number(r));
        },
        py::arg("term"), py::arg("label"), "Total capacity of a process term to perform an action.");

    m.def(
        "translate_sgsos",
        [](const std::string &text) {
            SgsosFile file = parse_sgsos_file(text);
            return serialize_specification(
                translations::translate_segala(file.process_sig, file.labels, file.rules));
        },
        py::arg("text"), "Compile probabilistic rules into a specification file.");

    m.def(
        "translate_wgsos",
        [](const std::string &text) {
            WgsosFile file = parse_wgsos_file(text);
            return serialize_specification(
                translations::translate_wgsos(file.monoid, file.process_sig, file.labels, file.rules));
        },
        py::arg("text"), "Compile weighted rules into a specification file.");

    m.def(
        "monoid_report",
        [](const std::string &text) {
            MonoidRef mo = parse_monoid_file(text);
            py::dict out;
            out["kind"] = mo->kind_name();
            out["positive"] = mo->is_positive();
            out["refinement"] = mo->is_refinement();
            py::list clubs;
            for (const auto &club : mo->enumerate_clubs())
                clubs.append(club.kind() == Club::Kind::Empty ? "{}" : mo->format_club(club));
            out["clubs"] = clubs;
            return out;
        },
        py::arg("text"), "Positivity, refinement and club inventory of a monoid declaration.");
}
