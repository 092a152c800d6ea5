#ifndef ULTRAS_WEIGHTFN_HPP
#define ULTRAS_WEIGHTFN_HPP

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ultras/monoid.hpp"

namespace ultras {

// States are interned serialized terms or plain symbols; the string order
// is the canonical total order used everywhere for determinism.
using StateId = std::string;

// A finitely supported map from states to non-zero weights. Entries are
// kept canonical (no explicit zeros, sorted keys), so structural equality
// is extensional equality.
class WeightFunction {
public:
    explicit WeightFunction(MonoidRef monoid) : monoid_(std::move(monoid)) {}
    WeightFunction(MonoidRef monoid, const std::map<StateId, Weight> &entries);

    const MonoidRef &monoid() const { return monoid_; }
    const std::map<StateId, Weight> &entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    // Weight of a state; the monoid unit off the support.
    Weight at(const StateId &state) const;

    std::set<StateId> support() const;
    Weight total_weight() const;
    Weight restrict_weight(const std::set<StateId> &states) const;

    // The action of f on this function: sums weights over preimages and
    // drops entries that collapse to zero. f must cover the support.
    WeightFunction pushforward(const std::function<StateId(const StateId &)> &f) const;
    WeightFunction pushforward(const std::map<StateId, StateId> &f) const;

    // Support elements whose weight lies in the club.
    std::set<StateId> select_by_club(const Club &club) const;

    // Pointwise monoid sum.
    WeightFunction plus(const WeightFunction &other) const;

    // "{state: weight, ...}" with sorted keys.
    std::string to_string() const;

    friend bool operator==(const WeightFunction &a, const WeightFunction &b) {
        return same_monoid(a.monoid_, b.monoid_) && a.entries_ == b.entries_;
    }
    friend bool operator!=(const WeightFunction &a, const WeightFunction &b) { return !(a == b); }
    friend bool operator<(const WeightFunction &a, const WeightFunction &b) { return a.entries_ < b.entries_; }

private:
    MonoidRef monoid_;
    std::map<StateId, Weight> entries_;
};

}  // namespace ultras

#endif
