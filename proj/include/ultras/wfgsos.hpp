#ifndef ULTRAS_WFGSOS_HPP
#define ULTRAS_WFGSOS_HPP

#include <optional>
#include <variant>

#include "ultras/bisim.hpp"
#include "ultras/term.hpp"
#include "ultras/ultras.hpp"

namespace ultras {

// A weight term: an operator of the weight signature applied to subterms,
// a process-term leaf, or a weight-function variable.
class ThetaTerm {
public:
    static ThetaTerm op(std::string name, std::vector<ThetaTerm> args);
    static ThetaTerm process(Term t);
    static ThetaTerm phi(std::string var);

    enum class Kind { Op, Process, Phi };
    Kind kind() const { return kind_; }
    const std::string &name() const { return name_; }  // op or phi-var name
    const std::vector<ThetaTerm> &args() const { return args_; }
    const Term &process_term() const { return proc_; }

    std::set<std::string> phi_variables() const;
    std::set<std::string> process_variables() const;
    std::string to_string() const;

private:
    Kind kind_ = Kind::Phi;
    std::string name_;
    std::vector<ThetaTerm> args_;
    Term proc_;
};

// Weighted sum of monomials; a monomial multiplies an optional constant
// coefficient with the weights observed at its slot indices. Evaluation
// needs a multiplicative structure only when a monomial has a coefficient
// or at least two factors.
struct BetaMonomial {
    std::optional<Weight> coeff;
    std::vector<int> slots;
};
struct Beta {
    std::vector<BetaMonomial> monomials;
};

Weight beta_eval(const Monoid &m, const Beta &beta, const std::vector<Weight> &slot_weights);
Weight weight_mul(const Monoid &m, const Weight &a, const Weight &b);

// Interpretation combinators for weight-signature operators.
struct CombConstZero {};                         // the constantly zero function
struct CombNormalizeTo { Weight total; };        // spread a fixed total uniformly over the support
struct CombPointwiseSum {};                      // binary pointwise monoid sum
struct CombWeightedSum { std::vector<Weight> coeffs; };  // pointwise linear combination
struct CombRateLaw {                             // bounded-capacity synchronisation
    std::string term_op;                         // binary constructor for combined targets
    enum class Combiner { Min, Product, Sum } combiner = Combiner::Min;
};
struct CombIdentity {};                          // pass-through (colouring operators)
struct CombUnion {};                             // union of the argument interpretation sets
struct CombTermShaped {                          // scan argument supports through a term shape
    Term shape;                                  // term over slot variables $1..$k (repeats share a scan)
    Beta beta;
};

using Combinator = std::variant<CombConstZero, CombNormalizeTo, CombPointwiseSum, CombWeightedSum,
                                CombRateLaw, CombIdentity, CombUnion, CombTermShaped>;

int combinator_arity(const Combinator &c);

// Per-operator combinator programs plus the process-leaf rule (a point
// mass of the given weight at the leaf's term).
struct Interpretation {
    std::map<std::string, Combinator> ops;
    std::optional<Weight> leaf_point_mass;
};

// One derivation rule: positive and negative label premises on the source
// arguments, total-weight premises and club-selection premises on the
// bound weight-function variables, and a weight-term target.
struct Rule {
    std::string name;
    std::string source_op;
    std::vector<std::string> arg_vars;
    Label conclusion;

    struct Positive {
        int arg = 0;
        Label label;
        std::string phi;
    };
    struct Negative {
        int arg = 0;
        Label label;
    };
    struct TotalPremise {
        std::string phi;
        Weight total;
    };
    struct ClubPremise {
        std::string phi;
        Club club;
        std::string yvar;
    };

    std::vector<Positive> positives;
    std::vector<Negative> negatives;
    std::vector<TotalPremise> totals;
    std::vector<ClubPremise> clubs;
    ThetaTerm target;
};

struct Specification {
    MonoidRef monoid;
    std::set<Label> labels;
    Signature process_sig;
    Signature weight_sig;
    std::vector<Rule> rules;  // kept in declaration order; results are canonical regardless
    Interpretation interp;
};

// Per-argument enabled labels and the observed totals matched against the
// rule's total-weight premises (positionally).
struct Trigger {
    std::vector<std::set<Label>> enabled;
    std::vector<Weight> totals;
};

bool rule_triggered(const Rule &r, const Trigger &t);

// Clause-by-clause well-formedness diagnostics (empty = valid).
std::vector<std::string> validate_rule(const Specification &spec, const Rule &r);
std::vector<std::string> validate_specification(const Specification &spec);

// Variable bindings for weight-term evaluation.
struct Env {
    std::map<std::string, Term> proc;
    std::map<std::string, WeightFunction> fns;
};

// Structural-recursion evaluation of a weight term into a finite set of
// weight functions over serialized process terms.
std::set<WeightFunction> interpret(const Specification &spec, const ThetaTerm &psi, const Env &env);

// Record of one rule firing, for the audit trail.
struct AuditEntry {
    StateId state;
    Label label;
    std::string rule;
    Trigger trigger;
};

// Memoizing structural-recursion engine over ground process terms.
class DerivationEngine {
public:
    explicit DerivationEngine(const Specification &spec);

    const std::map<Label, std::set<WeightFunction>> &one_step(const Term &ground);
    const std::vector<AuditEntry> &audit_log() const { return audit_; }
    const Specification &spec() const { return spec_; }

private:
    const Specification &spec_;
    std::map<StateId, std::map<Label, std::set<WeightFunction>>> memo_;
    std::vector<AuditEntry> audit_;
};

// Breadth-first closure of one_step from the roots, exploring states in
// sorted serialization order per layer. States beyond the budget stay in
// the boundary.
Ultras induce(const Specification &spec, const std::vector<Term> &roots, std::size_t budget);
Ultras induce(DerivationEngine &engine, const std::vector<Term> &roots, std::size_t budget);

// Substitution-respecting check of the interpretation: pushing the
// renaming through the evaluated functions equals evaluating the renamed
// term. Process variables in env bind to themselves unless renamed.
bool naturality_probe(const Specification &spec, const ThetaTerm &psi, const Env &env,
                      const std::map<std::string, std::string> &renaming);

enum class ProbeResult { Holds, Fails, Inconclusive };

// Bisimilarity of the two roots within the budget: Inconclusive when
// exploration was truncated.
ProbeResult bisimilar_within(const Specification &spec, const Term &p, const Term &q, std::size_t budget);

// Whether bisimilarity of p and q survives every listed one-hole context
// (hole variable "@"). Throws if p and q are not bisimilar to begin with.
ProbeResult congruence_probe(const Specification &spec, const Term &p, const Term &q,
                             const std::vector<Term> &contexts, std::size_t budget);

}  // namespace ultras

#endif
