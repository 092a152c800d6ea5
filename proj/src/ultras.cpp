#include "ultras/ultras.hpp"

#include <sstream>

namespace ultras {

void Ultras::add_transition(const StateId &state, const Label &label, WeightFunction fn) {
    if (!labels_.count(label))
        throw domain_error("transition label '" + label + "' not declared");
    if (!same_monoid(fn.monoid(), monoid_))
        throw domain_error("weight function over a different monoid");
    states_.insert(state);
    trans_[{state, label}].insert(std::move(fn));
}

bool Ultras::is_stuck(const StateId &state, const Label &label) const {
    auto it = trans_.find({state, label});
    return it == trans_.end() || it->second.empty();
}

const std::set<WeightFunction> &Ultras::transitions(const StateId &state, const Label &label) const {
    static const std::set<WeightFunction> kEmpty;
    auto it = trans_.find({state, label});
    return it == trans_.end() ? kEmpty : it->second;
}

void Ultras::validate() const {
    for (const auto &[key, fns] : trans_) {
        if (boundary_.count(key.first))
            throw domain_error("boundary state '" + key.first + "' has transitions");
        for (const auto &fn : fns)
            for (const auto &[target, w] : fn.entries())
                if (!states_.count(target) && !boundary_.count(target))
                    throw domain_error("support state '" + target + "' is neither explored nor boundary");
    }
}

void Ultras::require_fully_explored(const char *what) const {
    if (!boundary_.empty())
        throw domain_error(std::string(what) + ": fragment has unexplored boundary states");
}

bool Ultras::is_functional() const {
    require_fully_explored("is_functional");
    for (const auto &state : states_)
        for (const auto &label : labels_)
            if (transitions(state, label).size() != 1)
                return false;
    return true;
}

bool Ultras::is_segala() const {
    if (monoid_->kind() != Monoid::Kind::NonnegRationalPlus)
        throw domain_error("Segala constraint applies to the non-negative rational monoid");
    const Weight one = Weight::number(1);
    for (const auto &[key, fns] : trans_)
        for (const auto &fn : fns)
            if (fn.total_weight() != one)
                return false;
    return true;
}

bool Ultras::is_generative() const {
    if (monoid_->kind() != Monoid::Kind::NonnegRationalPlus)
        throw domain_error("generative constraint applies to the non-negative rational monoid");
    if (!is_functional())
        return false;
    const Weight one = Weight::number(1);
    for (const auto &[key, fns] : trans_)
        for (const auto &fn : fns) {
            Weight t = fn.total_weight();
            if (t != one && !monoid_->is_zero(t))
                return false;
        }
    return true;
}

bool Ultras::is_reactive() const {
    if (monoid_->kind() != Monoid::Kind::NonnegRationalPlus)
        throw domain_error("reactive constraint applies to the non-negative rational monoid");
    const Weight one = Weight::number(1);
    for (const auto &state : states_)
        for (const auto &label : labels_) {
            Weight sum = monoid_->zero();
            for (const auto &fn : transitions(state, label))
                sum = monoid_->add(sum, fn.total_weight());
            if (sum != one && !monoid_->is_zero(sum))
                return false;
        }
    return true;
}

std::string Ultras::to_text() const {
    std::ostringstream out;
    out << "monoid " << monoid_->kind_name() << "\n";
    out << "labels";
    for (const auto &l : labels_)
        out << " " << l;
    out << "\nstates";
    for (const auto &s : states_)
        out << " " << s;
    out << "\n";
    if (!boundary_.empty()) {
        out << "boundary";
        for (const auto &s : boundary_)
            out << " " << s;
        out << "\n";
    }
    for (const auto &[key, fns] : trans_) {
        if (fns.empty())
            continue;
        out << key.first << " -[" << key.second << "]->";
        bool first = true;
        for (const auto &fn : fns) {
            out << (first ? " " : " | ") << fn.to_string();
            first = false;
        }
        out << "\n";
    }
    return out.str();
}

void Wlts::set_weight(const StateId &from, const Label &label, const StateId &to, const Weight &w) {
    monoid_->require_element(w, "wlts entry");
    if (!labels_.count(label))
        throw domain_error("wlts label '" + label + "' not declared");
    states_.insert(from);
    states_.insert(to);
    if (monoid_->is_zero(w))
        entries_.erase({from, label, to});
    else
        entries_[{from, label, to}] = w;
}

Weight Wlts::weight(const StateId &from, const Label &label, const StateId &to) const {
    auto it = entries_.find({from, label, to});
    return it == entries_.end() ? monoid_->zero() : it->second;
}

WeightFunction Wlts::row(const StateId &from, const Label &label) const {
    std::map<StateId, Weight> entries;
    auto lo = entries_.lower_bound({from, label, StateId()});
    for (auto it = lo; it != entries_.end(); ++it) {
        const auto &[key, w] = *it;
        if (std::get<0>(key) != from || std::get<1>(key) != label)
            break;
        entries.emplace(std::get<2>(key), w);
    }
    return WeightFunction(monoid_, entries);
}

bool check_homomorphism(const Ultras &u1, const Ultras &u2, const std::map<StateId, StateId> &f) {
    if (!same_monoid(u1.monoid(), u2.monoid()) || u1.labels() != u2.labels())
        throw domain_error("check_homomorphism: monoid or label mismatch");
    u1.require_fully_explored("check_homomorphism");
    u2.require_fully_explored("check_homomorphism");
    for (const auto &state : u1.states())
        if (!f.count(state))
            throw domain_error("check_homomorphism: map undefined on state '" + state + "'");
    for (const auto &state : u1.states())
        for (const auto &label : u1.labels()) {
            std::set<WeightFunction> mapped;
            for (const auto &fn : u1.transitions(state, label))
                mapped.insert(fn.pushforward(f));
            if (mapped != u2.transitions(f.at(state), label))
                return false;
        }
    return true;
}

Wlts to_wlts(const Ultras &u) {
    if (!u.is_functional())
        throw domain_error("to_wlts: fragment is not functional");
    Wlts out(u.monoid(), u.labels());
    for (const auto &state : u.states()) {
        out.add_state(state);
        for (const auto &label : u.labels())
            for (const auto &fn : u.transitions(state, label))
                for (const auto &[target, w] : fn.entries())
                    out.set_weight(state, label, target, w);
    }
    return out;
}

Ultras from_wlts(const Wlts &w) {
    Ultras out(w.monoid(), w.labels());
    for (const auto &state : w.states())
        out.add_state(state);
    // Every (state, label) carries exactly one function; all-zero rows
    // become the terminal outcome, never a stuck pair.
    for (const auto &state : w.states())
        for (const auto &label : w.labels())
            out.add_transition(state, label, w.row(state, label));
    return out;
}

}  // namespace ultras
