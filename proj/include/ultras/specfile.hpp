#ifndef ULTRAS_SPECFILE_HPP
#define ULTRAS_SPECFILE_HPP

#include "ultras/translations.hpp"
#include "ultras/wfgsos.hpp"

namespace ultras {

// Line-oriented specification format, '#' starts a comment:
//   monoid nat-plus
//   monoid m4 { elems: 0 a b 1; unit: 0; add: (a a -> 1) ... }
//   labels a b tau
//   sig f/2 nil/0
//   wsig oplus/2 bot/0
//   interp bot = zero
//   interp leaf = point-mass(inf)
//   rule f(x1,x2) -[c]-> oplus(phi1,phi2) when x1 -[a]-> phi1, x2 -/[b],
//        total(phi1) = 2, club(phi1, nonzero) ∋ y1
// The full grammar is documented in the README.
Specification parse_spec_file(const std::string &text);

// Canonical re-emission; parses back to an equivalent specification.
std::string serialize_specification(const Specification &spec);

// A single monoid declaration (built-in name or explicit table).
MonoidRef parse_monoid_file(const std::string &text);

// Rule files for the two source formats.
struct SgsosFile {
    std::set<Label> labels;
    Signature process_sig;
    std::vector<translations::SegalaRule> rules;
};
SgsosFile parse_sgsos_file(const std::string &text);

struct WgsosFile {
    MonoidRef monoid;
    std::set<Label> labels;
    Signature process_sig;
    std::vector<translations::WgsosRule> rules;
};
WgsosFile parse_wgsos_file(const std::string &text);

// Deterministic system serializations.
std::string ultras_text(const Ultras &u);
std::string ultras_json(const Ultras &u);
std::string ultras_dot(const Ultras &u);

std::string club_text(const Monoid &m, const Club &c);

}  // namespace ultras

#endif
