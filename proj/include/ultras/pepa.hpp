#ifndef ULTRAS_PEPA_HPP
#define ULTRAS_PEPA_HPP

#include "ultras/wfgsos.hpp"

namespace ultras {
namespace pepa {

inline const Label kTau = "tau";

// Process grammar: nil, action prefix, choice, cooperation over a label
// set, hiding. Rates are strictly positive exact rationals.
class PepaTerm {
public:
    enum class Kind { Nil, Prefix, Choice, Coop, Hide };

    static PepaTerm nil();
    static PepaTerm prefix(Label action, mpq_class rate, PepaTerm body);
    static PepaTerm choice(PepaTerm left, PepaTerm right);
    static PepaTerm coop(PepaTerm left, std::set<Label> sync, PepaTerm right);
    static PepaTerm hide(PepaTerm body, std::set<Label> hidden);

    Kind kind() const { return node_->kind; }
    const Label &action() const { return node_->action; }
    const mpq_class &rate() const { return node_->rate; }
    const std::set<Label> &label_set() const { return node_->labelset; }
    const PepaTerm &left() const { return node_->children.at(0); }
    const PepaTerm &right() const { return node_->children.at(1); }
    const PepaTerm &body() const { return node_->children.at(0); }

    std::string to_string() const;
    // Parenthesised unless the node binds at least as tightly as a prefix body.
    std::string to_string_paren() const;

    std::set<Label> labels() const;
    std::set<mpq_class> rates() const;
    std::set<std::set<Label>> coop_sets() const;
    std::set<std::set<Label>> hide_sets() const;

    friend bool operator==(const PepaTerm &a, const PepaTerm &b) { return a.to_string() == b.to_string(); }
    friend bool operator<(const PepaTerm &a, const PepaTerm &b) { return a.to_string() < b.to_string(); }

private:
    struct Node {
        Kind kind;
        Label action;
        mpq_class rate;
        std::set<Label> labelset;
        std::vector<PepaTerm> children;
    };
    explicit PepaTerm(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

// Concrete syntax, precedence prefix > hide > coop > choice:
//   (a,2).nil + (b,1/2).nil     choice of prefixes
//   P <a,b> Q                   cooperation over {a,b}
//   P \ {a}                     hiding
// Previously defined names may be referenced via the definitions map.
PepaTerm parse_pepa_term(const std::string &text,
                         const std::map<std::string, PepaTerm> &definitions = {});

// "name = term" lines plus a final "main name"; '#' starts a comment.
struct PepaFile {
    std::map<std::string, PepaTerm> definitions;
    PepaTerm main;
};
PepaFile parse_pepa_file(const std::string &text);

// Total capacity of the process to perform the action (zero when
// disabled). The action must not be tau.
mpq_class apparent_rate(const PepaTerm &p, const Label &action);

// All derivations of the standard multi-transition semantics, cooperation
// weighted by the minimal rate law. Identical derivations from distinct
// rule instances are listed separately.
struct Derivation {
    Label action;
    mpq_class rate;
    PepaTerm target;
};
std::vector<Derivation> classic_sos(const PepaTerm &p);

// Process terms as terms of the derivation signature.
Term to_sigma_term(const PepaTerm &p);

// The rule-format specification covering the given finite universes of
// labels (tau is always included), prefix rates, cooperation sets and
// hiding sets.
Specification pepa_wfgsos_spec(std::set<Label> labels, const std::set<mpq_class> &rates,
                               const std::set<std::set<Label>> &coop_sets,
                               const std::set<std::set<Label>> &hide_sets);

// Specification sized for a given set of processes.
Specification spec_for_terms(const std::vector<PepaTerm> &terms);

// Derives the rule-format transition system from the process. The result
// is functional on the explored fragment; every rate is finite.
Ultras derive_ctmc(const PepaTerm &p, std::size_t budget);

// Independent route: breadth-first aggregation of classic_sos per
// (label, target), over the same label universe and state naming as
// derive_ctmc.
Ultras classic_ctmc(const PepaTerm &p, const std::set<Label> &labels, std::size_t budget);

// Bisimilarity of the two derived systems; Inconclusive on truncation.
ProbeResult strong_equivalence(const PepaTerm &p, const PepaTerm &q, std::size_t budget);

}  // namespace pepa
}  // namespace ultras

#endif
