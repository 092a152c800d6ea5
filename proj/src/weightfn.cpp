#include "ultras/weightfn.hpp"

namespace ultras {

WeightFunction::WeightFunction(MonoidRef monoid, const std::map<StateId, Weight> &entries)
    : monoid_(std::move(monoid)) {
    for (const auto &[state, w] : entries) {
        monoid_->require_element(w, "weight function entry");
        if (!monoid_->is_zero(w))
            entries_.emplace(state, w);
    }
}

Weight WeightFunction::at(const StateId &state) const {
    auto it = entries_.find(state);
    return it == entries_.end() ? monoid_->zero() : it->second;
}

std::set<StateId> WeightFunction::support() const {
    std::set<StateId> out;
    for (const auto &[state, w] : entries_)
        out.insert(state);
    return out;
}

Weight WeightFunction::total_weight() const {
    Weight total = monoid_->zero();
    for (const auto &[state, w] : entries_)
        total = monoid_->add(total, w);
    return total;
}

Weight WeightFunction::restrict_weight(const std::set<StateId> &states) const {
    Weight total = monoid_->zero();
    for (const auto &[state, w] : entries_)
        if (states.count(state))
            total = monoid_->add(total, w);
    return total;
}

WeightFunction WeightFunction::pushforward(const std::function<StateId(const StateId &)> &f) const {
    WeightFunction out(monoid_);
    for (const auto &[state, w] : entries_) {
        StateId image = f(state);
        auto [it, inserted] = out.entries_.emplace(image, w);
        if (!inserted)
            it->second = monoid_->add(it->second, w);
    }
    for (auto it = out.entries_.begin(); it != out.entries_.end();)
        it = monoid_->is_zero(it->second) ? out.entries_.erase(it) : std::next(it);
    return out;
}

WeightFunction WeightFunction::pushforward(const std::map<StateId, StateId> &f) const {
    return pushforward([&](const StateId &state) -> StateId {
        auto it = f.find(state);
        if (it == f.end())
            throw domain_error("pushforward: map undefined on support element '" + state + "'");
        return it->second;
    });
}

std::set<StateId> WeightFunction::select_by_club(const Club &club) const {
    if (!monoid_->is_club(club))
        throw domain_error("select_by_club: the given subset is not a club");
    std::set<StateId> out;
    for (const auto &[state, w] : entries_)
        if (club.contains(*monoid_, w))
            out.insert(state);
    return out;
}

WeightFunction WeightFunction::plus(const WeightFunction &other) const {
    if (!same_monoid(monoid_, other.monoid_))
        throw domain_error("pointwise sum over different monoids");
    WeightFunction out = *this;
    for (const auto &[state, w] : other.entries_) {
        auto [it, inserted] = out.entries_.emplace(state, w);
        if (!inserted)
            it->second = monoid_->add(it->second, w);
    }
    for (auto it = out.entries_.begin(); it != out.entries_.end();)
        it = monoid_->is_zero(it->second) ? out.entries_.erase(it) : std::next(it);
    return out;
}

std::string WeightFunction::to_string() const {
    std::string out = "{";
    bool first = true;
    for (const auto &[state, w] : entries_) {
        if (!first)
            out += ", ";
        first = false;
        out += state + ": " + monoid_->format(w);
    }
    return out + "}";
}

}  // namespace ultras
