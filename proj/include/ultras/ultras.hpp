#ifndef ULTRAS_ULTRAS_HPP
#define ULTRAS_ULTRAS_HPP

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ultras/weightfn.hpp"

namespace ultras {

using Label = std::string;

// A finite explored fragment of a uniform labelled transition system.
// A (state, label) pair with no stored set is stuck; a stored set
// containing the empty weight function marks a terminal outcome. The two
// are kept distinct everywhere (bisimulation separates them).
class Ultras {
public:
    Ultras(MonoidRef monoid, std::set<Label> labels)
        : monoid_(std::move(monoid)), labels_(std::move(labels)) {}

    const MonoidRef &monoid() const { return monoid_; }
    const std::set<Label> &labels() const { return labels_; }
    const std::set<StateId> &states() const { return states_; }
    const std::set<StateId> &boundary() const { return boundary_; }

    void add_state(const StateId &state) { states_.insert(state); }
    void mark_boundary(const StateId &state) { boundary_.insert(state); }

    // Registers one outgoing weight function. The support may reach states
    // not yet added; callers close over them (add_state / mark_boundary).
    void add_transition(const StateId &state, const Label &label, WeightFunction fn);

    bool is_stuck(const StateId &state, const Label &label) const;
    const std::set<WeightFunction> &transitions(const StateId &state, const Label &label) const;
    const std::map<std::pair<StateId, Label>, std::set<WeightFunction>> &all_transitions() const { return trans_; }

    // Checks the support-closure and carrier invariants; throws on breach.
    void validate() const;

    void require_fully_explored(const char *what) const;

    // Exactly one weight function per (state, label) pair. Demands a fully
    // explored fragment.
    bool is_functional() const;

    // Every stored weight function is a probability distribution. Demands
    // the non-negative rational monoid.
    bool is_segala() const;
    bool is_generative() const;
    bool is_reactive() const;

    std::string to_text() const;

private:
    MonoidRef monoid_;
    std::set<Label> labels_;
    std::set<StateId> states_;
    std::set<StateId> boundary_;
    std::map<std::pair<StateId, Label>, std::set<WeightFunction>> trans_;
};

// Sparse weighted LTS: total weight map with finitely many non-zero
// entries per (state, label) row.
class Wlts {
public:
    Wlts(MonoidRef monoid, std::set<Label> labels)
        : monoid_(std::move(monoid)), labels_(std::move(labels)) {}

    const MonoidRef &monoid() const { return monoid_; }
    const std::set<Label> &labels() const { return labels_; }
    const std::set<StateId> &states() const { return states_; }

    void add_state(const StateId &state) { states_.insert(state); }
    void set_weight(const StateId &from, const Label &label, const StateId &to, const Weight &w);
    Weight weight(const StateId &from, const Label &label, const StateId &to) const;
    const std::map<std::tuple<StateId, Label, StateId>, Weight> &nonzero_entries() const { return entries_; }

    // The a-row of a state as a weight function.
    WeightFunction row(const StateId &from, const Label &label) const;

    friend bool operator==(const Wlts &a, const Wlts &b) {
        return same_monoid(a.monoid_, b.monoid_) && a.labels_ == b.labels_ && a.states_ == b.states_ &&
               a.entries_ == b.entries_;
    }

private:
    MonoidRef monoid_;
    std::set<Label> labels_;
    std::set<StateId> states_;
    std::map<std::tuple<StateId, Label, StateId>, Weight> entries_;
};

// True when f maps u1 onto u2 transition-compatibly in both directions:
// x -a-> rho in u1 iff f(x) -a-> rho[f] in u2.
bool check_homomorphism(const Ultras &u1, const Ultras &u2, const std::map<StateId, StateId> &f);

// The 1-1 correspondence between weighted LTSs and functional fragments.
Wlts to_wlts(const Ultras &u);
Ultras from_wlts(const Wlts &w);

}  // namespace ultras

#endif
