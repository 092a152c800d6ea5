#ifndef ULTRAS_TERM_HPP
#define ULTRAS_TERM_HPP

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ultras/weight.hpp"

namespace ultras {

// Operator names with arities. Names may carry an angle-bracket payload
// ("coop<a,b>") which the term grammar treats as part of the name.
class Signature {
public:
    Signature() = default;
    explicit Signature(std::map<std::string, int> ops) : ops_(std::move(ops)) {}

    void declare(const std::string &name, int arity);
    bool has(const std::string &name) const { return ops_.count(name) > 0; }
    int arity(const std::string &name) const;
    const std::map<std::string, int> &operators() const { return ops_; }

private:
    std::map<std::string, int> ops_;
};

// First-order term: an operator applied to subterms, or a variable leaf.
// Serialization "f(a,g(b))" is canonical and injective, and doubles as the
// state identifier of ground terms.
class Term {
public:
    Term() : Term(var("_")) {}
    static Term var(std::string name);
    static Term op(std::string name, std::vector<Term> children = {});

    bool is_var() const { return node_->is_var; }
    const std::string &head() const { return node_->name; }
    const std::vector<Term> &children() const { return node_->children; }

    bool is_ground() const;
    std::set<std::string> variables() const;
    std::string to_string() const;

    // Simultaneous substitution of variable leaves.
    Term substitute(const std::map<std::string, Term> &sigma) const;

    friend bool operator==(const Term &a, const Term &b) { return a.to_string() == b.to_string(); }
    friend bool operator!=(const Term &a, const Term &b) { return !(a == b); }
    friend bool operator<(const Term &a, const Term &b) { return a.to_string() < b.to_string(); }

private:
    struct Node {
        bool is_var;
        std::string name;
        std::vector<Term> children;
    };
    explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

// Parses the canonical term grammar. Leaf tokens that are nullary
// operators of the signature become constants, everything else a
// variable. Throws domain_error with position info on bad syntax.
Term parse_term(const std::string &text, const Signature &sig);

// Signature-free parse: applied names become operators as written, bare
// names become variables. Callers resolve names afterwards.
Term parse_tree(const std::string &text);

// Splits "t1,t2,..." on top-level commas (commas inside () and <> bind to
// their term).
std::vector<std::string> split_top_level(const std::string &text, char sep);

}  // namespace ultras

#endif
