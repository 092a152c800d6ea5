#ifndef ULTRAS_TRANSLATIONS_HPP
#define ULTRAS_TRANSLATIONS_HPP

#include "ultras/wfgsos.hpp"

namespace ultras {
namespace translations {

// GSOS rule for probability-distribution systems: label premises as usual,
// support selections binding process variables out of distribution
// variables, and a formal convex combination of target terms in which
// distribution variables may occur (occurrences scan independently).
struct SegalaRule {
    std::string name;
    std::string source_op;
    std::vector<std::string> arg_vars;
    Label conclusion;
    std::vector<Rule::Positive> positives;
    std::vector<Rule::Negative> negatives;
    struct Selection {
        std::string phi;
        std::string yvar;
    };
    std::vector<Selection> selections;
    struct Target {
        mpq_class prob;  // in (0,1], summing to 1 across the targets
        Term term;       // over process, selection and distribution variables
    };
    std::vector<Target> targets;
};

std::vector<std::string> validate_segala_rule(const Signature &process_sig, const std::set<Label> &labels,
                                              const SegalaRule &rule);

// Compiles the rules into the weight-function format over the non-negative
// rationals: selections become all-nonzero club premises, every target
// becomes a term-shaped product with coloured distribution occurrences and
// the convex weights become a pointwise linear combination.
Specification translate_segala(const Signature &process_sig, const std::set<Label> &labels,
                               const std::vector<SegalaRule> &rules);

// Weighted-GSOS rule: total-weight premises with constant weights,
// transition premises binding a target state and its weight variable, a
// multiadditive combination of the weight variables, and a plain term
// target.
struct WgsosRule {
    std::string name;
    std::string source_op;
    std::vector<std::string> arg_vars;
    Label conclusion;
    struct WeightPremise {
        int arg = 0;
        Label label;
        Weight total;
    };
    std::vector<WeightPremise> weight_premises;
    struct TransPremise {
        int arg = 0;
        Label label;
        std::string uvar;
        std::string yvar;
    };
    std::vector<TransPremise> trans_premises;
    Beta beta;    // slot k refers to trans_premises[k]
    Term target;  // every bound yvar occurs; variables drawn from args and yvars
};

std::vector<std::string> validate_wgsos_rule(const Signature &process_sig, const std::set<Label> &labels,
                                             const MonoidRef &monoid, const WgsosRule &rule);

// Compiles the rules into the weight-function format. Rules sharing
// source, label and weight-premise pattern merge into one rule whose
// target sums their contributions, so the induced system stays
// functional; operators without rules for a label get a zero-outcome
// default. Demands a positive monoid (support scanning selects by the
// all-nonzero club) and rejects rule sets whose weight premises disagree
// on the constrained (argument, label) slots for one (source, label).
Specification translate_wgsos(const MonoidRef &monoid, const Signature &process_sig,
                              const std::set<Label> &labels, const std::vector<WgsosRule> &rules);

// Direct inductive semantics, the cross-validation route: each transition
// weight is the monoid sum, over triggered rule instances with support
// bindings, of the combination applied to the bound weights.
Wlts wgsos_semantics(const MonoidRef &monoid, const Signature &process_sig, const std::set<Label> &labels,
                     const std::vector<WgsosRule> &rules, const std::vector<Term> &roots,
                     std::size_t budget);

}  // namespace translations
}  // namespace ultras

#endif
