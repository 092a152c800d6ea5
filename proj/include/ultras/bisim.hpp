#ifndef ULTRAS_BISIM_HPP
#define ULTRAS_BISIM_HPP

#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ultras/ultras.hpp"

namespace ultras {

// A relation between two state spaces (which may be the same system twice).
using Relation = std::set<std::pair<StateId, StateId>>;

// One minimal generating pair of the subset closure: a connected component
// of the bipartite graph of the relation. Arbitrary closed pairs are unions
// of these plus relation-isolated points.
struct ClosedPair {
    std::set<StateId> left;
    std::set<StateId> right;
    friend bool operator==(const ClosedPair &a, const ClosedPair &b) {
        return a.left == b.left && a.right == b.right;
    }
    friend bool operator<(const ClosedPair &a, const ClosedPair &b) {
        return std::tie(a.left, a.right) < std::tie(b.left, b.right);
    }
};

std::vector<ClosedPair> closed_pairs(const Relation &r);

// Lifted relation membership: the two functions assign equal total weight
// to every closed pair. Decided on the minimal components plus the
// relation-isolated support points (which force weight zero).
bool lift_relation(const Relation &r, const WeightFunction &phi, const WeightFunction &psi);

// Forth-and-back transfer conditions over the lifted relation. Stuck and
// terminal states are kept apart. Throws if the relation touches a
// boundary or unknown state.
bool is_bisimulation(const Ultras &u1, const Ultras &u2, const Relation &r);

// A state tagged with the system it belongs to (0 = left, 1 = right).
struct TaggedState {
    int side = 0;
    StateId id;
    auto operator<=>(const TaggedState &) const = default;
};

// Disjoint blocks covering a tagged state space, canonically ordered
// (blocks sorted by least member, members sorted).
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<std::vector<TaggedState>> blocks);

    const std::vector<std::vector<TaggedState>> &blocks() const { return blocks_; }
    std::size_t block_of(const TaggedState &state) const;
    bool same_block(const TaggedState &a, const TaggedState &b) const;
    bool covers(const TaggedState &state) const { return index_.count(state) > 0; }

    // Same-block pairs between side 0 and side 1.
    Relation cross_relation() const;
    // Same-block pairs within one side (an equivalence relation).
    Relation side_relation(int side) const;

    std::string to_text() const;

private:
    std::vector<std::vector<TaggedState>> blocks_;
    std::map<TaggedState, std::size_t> index_;
};

// Coarsest stable partition of the disjoint union of the two state
// spaces, computed by signature-splitting partition refinement. Demands
// fully explored fragments over the same monoid and labels.
Partition largest_bisimulation(const Ultras &u1, const Ultras &u2);

// Single-system variant: coarsest stable partition of u's states (side 0).
Partition largest_bisimulation(const Ultras &u);

// Name of the quotient state a block collapses to: "{s1,s2,...}" sorted.
StateId block_state_name(const std::vector<TaggedState> &block);

// Collapses a stable partition of u's states into the quotient system.
// Throws if the partition does not cover the states or is not stable.
Ultras quotient(const Ultras &u, const Partition &p);
std::map<StateId, StateId> quotient_projection(const Ultras &u, const Partition &p);

// Weighted-LTS bisimulation: per related pair and label, the rows assign
// equal sums to every closed pair. Decided by exhaustive subset-closure
// enumeration on small instances (independent of the lifted-relation
// path), by component decomposition beyond that.
bool weighted_bisim_check(const Wlts &w1, const Wlts &w2, const Relation &r);

// Strong bisimulation for probability-distribution systems, with the same
// exhaustive closure enumeration on small instances. Inputs must satisfy
// the Segala constraint.
bool segala_bisim_check(const Ultras &u1, const Ultras &u2, const Relation &r);

// A (state, label, class-set) measuring table into a pointed set; values
// are kept as canonical strings with a distinguished bottom.
class MFunction {
public:
    // The measure induced by a bisimulation equivalence: the set of lifted
    // equivalence classes of outgoing functions assigning the class-set a
    // non-zero weight, plus the class of the zero function (= bottom).
    static MFunction derived(const Ultras &u, const Partition &p);

    // Explicit table over a finite represented domain (used to exercise
    // the validator); class-set keys are canonical sorted joins.
    static MFunction table(std::vector<std::set<StateId>> base_sets,
                           std::map<std::tuple<StateId, Label, std::string>, std::string> values,
                           std::string bottom);

    std::string value(const StateId &state, const Label &label, const std::set<StateId> &class_set) const;
    const std::string &bottom() const { return bottom_; }
    const std::vector<std::set<StateId>> &base_sets() const { return base_sets_; }

    static std::string class_set_key(const std::set<StateId> &class_set);

private:
    MFunction() = default;

    bool derived_ = false;
    std::vector<std::set<StateId>> base_sets_;
    std::string bottom_;
    // derived form: per (state, label), each outgoing function with its
    // lifted-class signature
    std::map<std::pair<StateId, Label>, std::vector<std::pair<WeightFunction, std::string>>> outgoing_;
    // table form
    std::map<std::tuple<StateId, Label, std::string>, std::string> values_;
};

// Builds the induced measure for a bisimulation equivalence given as a
// stable partition. Throws when some label mixes stuck and terminal
// states, or when the partition is not a bisimulation.
MFunction m_function_from_bisim(const Ultras &u, const Partition &p);

// Verifies the two measuring-table conditions (bottom agreement with
// termination, consistency under class-set union) over the represented
// domain: all base sets and their pairwise unions.
bool validate_m_function(const MFunction &m, const Ultras &u);

// Per related pair, label and base class-set, the measures agree.
bool is_m_bisimulation(const MFunction &m, const Ultras &u, const Partition &p);

}  // namespace ultras

#endif
