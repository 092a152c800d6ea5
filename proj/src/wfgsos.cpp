#include "ultras/wfgsos.hpp"

#include <algorithm>

namespace ultras {

ThetaTerm ThetaTerm::op(std::string name, std::vector<ThetaTerm> args) {
    ThetaTerm t;
    t.kind_ = Kind::Op;
    t.name_ = std::move(name);
    t.args_ = std::move(args);
    return t;
}

ThetaTerm ThetaTerm::process(Term term) {
    ThetaTerm t;
    t.kind_ = Kind::Process;
    t.proc_ = std::move(term);
    return t;
}

ThetaTerm ThetaTerm::phi(std::string var) {
    ThetaTerm t;
    t.kind_ = Kind::Phi;
    t.name_ = std::move(var);
    return t;
}

std::set<std::string> ThetaTerm::phi_variables() const {
    std::set<std::string> out;
    if (kind_ == Kind::Phi) {
        out.insert(name_);
    } else if (kind_ == Kind::Op) {
        for (const auto &arg : args_) {
            auto sub = arg.phi_variables();
            out.insert(sub.begin(), sub.end());
        }
    }
    return out;
}

std::set<std::string> ThetaTerm::process_variables() const {
    std::set<std::string> out;
    if (kind_ == Kind::Process) {
        return proc_.variables();
    }
    if (kind_ == Kind::Op) {
        for (const auto &arg : args_) {
            auto sub = arg.process_variables();
            out.insert(sub.begin(), sub.end());
        }
    }
    return out;
}

std::string ThetaTerm::to_string() const {
    switch (kind_) {
    case Kind::Phi:
        return name_;
    case Kind::Process:
        return proc_.to_string();
    case Kind::Op: {
        if (args_.empty())
            return name_;
        std::string out = name_ + "(";
        for (std::size_t i = 0; i < args_.size(); ++i)
            out += (i ? "," : "") + args_[i].to_string();
        return out + ")";
    }
    }
    return "?";
}

Weight weight_mul(const Monoid &m, const Weight &a, const Weight &b) {
    m.require_element(a, "multiply");
    m.require_element(b, "multiply");
    switch (m.kind()) {
    case Monoid::Kind::BoolOr:
        return Weight::boolean(a.as_boolean() && b.as_boolean());
    case Monoid::Kind::NatPlus:
    case Monoid::Kind::NonnegRationalPlus:
        return Weight::number(a.as_number() * b.as_number());
    case Monoid::Kind::NonnegRationalPlusInfinity:
        if (a.is_infinity() || b.is_infinity()) {
            if ((!a.is_infinity() && m.is_zero(a)) || (!b.is_infinity() && m.is_zero(b)))
                return Weight::number(0);
            return Weight::infinity();
        }
        return Weight::number(a.as_number() * b.as_number());
    default:
        throw domain_error("monoid " + m.kind_name() + " has no multiplicative structure");
    }
}

namespace {

Weight mul_unit(const Monoid &m) {
    switch (m.kind()) {
    case Monoid::Kind::BoolOr:
        return Weight::boolean(true);
    case Monoid::Kind::NatPlus:
    case Monoid::Kind::NonnegRationalPlus:
    case Monoid::Kind::NonnegRationalPlusInfinity:
        return Weight::number(1);
    default:
        throw domain_error("monoid " + m.kind_name() + " has no multiplicative structure");
    }
}

bool mul_capable(const Monoid &m) {
    switch (m.kind()) {
    case Monoid::Kind::BoolOr:
    case Monoid::Kind::NatPlus:
    case Monoid::Kind::NonnegRationalPlus:
    case Monoid::Kind::NonnegRationalPlusInfinity:
        return true;
    default:
        return false;
    }
}

bool rational_kind(const Monoid &m) {
    return m.kind() == Monoid::Kind::NonnegRationalPlus ||
           m.kind() == Monoid::Kind::NonnegRationalPlusInfinity;
}

}  // namespace

Weight beta_eval(const Monoid &m, const Beta &beta, const std::vector<Weight> &slot_weights) {
    Weight sum = m.zero();
    for (const auto &mono : beta.monomials) {
        Weight acc = m.zero();
        std::size_t start = 0;
        if (mono.coeff) {
            acc = *mono.coeff;
        } else if (!mono.slots.empty()) {
            acc = slot_weights.at(static_cast<std::size_t>(mono.slots[0]));
            start = 1;
        } else {
            acc = mul_unit(m);
        }
        for (std::size_t i = start; i < mono.slots.size(); ++i)
            acc = weight_mul(m, acc, slot_weights.at(static_cast<std::size_t>(mono.slots[i])));
        sum = m.add(sum, acc);
    }
    return sum;
}

int combinator_arity(const Combinator &c) {
    return std::visit(
        [](const auto &comb) -> int {
            using T = std::decay_t<decltype(comb)>;
            if constexpr (std::is_same_v<T, CombConstZero>)
                return 0;
            else if constexpr (std::is_same_v<T, CombNormalizeTo>)
                return 1;
            else if constexpr (std::is_same_v<T, CombPointwiseSum>)
                return 2;
            else if constexpr (std::is_same_v<T, CombWeightedSum>)
                return static_cast<int>(comb.coeffs.size());
            else if constexpr (std::is_same_v<T, CombRateLaw>)
                return 2;
            else if constexpr (std::is_same_v<T, CombIdentity>)
                return 1;
            else if constexpr (std::is_same_v<T, CombUnion>)
                return 2;
            else {
                static_assert(std::is_same_v<T, CombTermShaped>);
                int max_slot = 0;
                for (const auto &v : comb.shape.variables())
                    if (v.size() > 1 && v[0] == '$')
                        max_slot = std::max(max_slot, std::stoi(v.substr(1)));
                return max_slot;
            }
        },
        c);
}

bool rule_triggered(const Rule &r, const Trigger &t) {
    if (t.enabled.size() != r.arg_vars.size())
        throw domain_error("rule_triggered: trigger arity mismatch");
    if (t.totals.size() != r.totals.size())
        throw domain_error("rule_triggered: total-weight vector length mismatch");
    for (const auto &pos : r.positives)
        if (!t.enabled.at(pos.arg).count(pos.label))
            return false;
    for (const auto &neg : r.negatives)
        if (t.enabled.at(neg.arg).count(neg.label))
            return false;
    for (std::size_t j = 0; j < r.totals.size(); ++j)
        if (r.totals[j].total != t.totals[j])
            return false;
    return true;
}

std::vector<std::string> validate_rule(const Specification &spec, const Rule &r) {
    std::vector<std::string> diags;
    auto diag = [&](const std::string &clause, const std::string &msg) {
        diags.push_back("rule " + (r.name.empty() ? r.source_op : r.name) + ": " + clause + ": " + msg);
    };

    const int arity = static_cast<int>(r.arg_vars.size());
    if (!spec.process_sig.has(r.source_op))
        diag("unknown source operator", "'" + r.source_op + "' is not in the process signature");
    else if (spec.process_sig.arity(r.source_op) != arity)
        diag("source arity mismatch", "'" + r.source_op + "' expects " +
                                          std::to_string(spec.process_sig.arity(r.source_op)) + " arguments");
    if (!spec.labels.count(r.conclusion))
        diag("unknown label", "conclusion label '" + r.conclusion + "'");

    std::set<std::string> proc_vars;
    for (const auto &v : r.arg_vars)
        if (!proc_vars.insert(v).second)
            diag("duplicate variable", "process variable '" + v + "'");
    std::set<std::string> phi_vars;
    for (const auto &pos : r.positives) {
        if (pos.arg < 0 || pos.arg >= arity)
            diag("premise index out of range", "positive premise on argument " + std::to_string(pos.arg + 1));
        if (!spec.labels.count(pos.label))
            diag("unknown label", "positive premise label '" + pos.label + "'");
        if (!phi_vars.insert(pos.phi).second)
            diag("duplicate variable", "weight function variable '" + pos.phi + "'");
    }
    std::set<std::pair<int, Label>> pos_pairs, neg_pairs;
    for (const auto &pos : r.positives)
        pos_pairs.emplace(pos.arg, pos.label);
    for (const auto &neg : r.negatives) {
        if (neg.arg < 0 || neg.arg >= arity)
            diag("premise index out of range", "negative premise on argument " + std::to_string(neg.arg + 1));
        if (!spec.labels.count(neg.label))
            diag("unknown label", "negative premise label '" + neg.label + "'");
        neg_pairs.emplace(neg.arg, neg.label);
        if (pos_pairs.count({neg.arg, neg.label}))
            diag("overlapping positive/negative premises",
                 "argument " + std::to_string(neg.arg + 1) + " label '" + neg.label + "'");
    }
    for (const auto &tp : r.totals) {
        if (!phi_vars.count(tp.phi))
            diag("total premise on unbound weight variable", "'" + tp.phi + "'");
        if (!spec.monoid->contains(tp.total))
            diag("total premise weight outside carrier", "'" + tp.phi + "'");
    }
    for (const auto &cp : r.clubs) {
        if (!phi_vars.count(cp.phi))
            diag("club premise on unbound weight variable", "'" + cp.phi + "'");
        if (!proc_vars.insert(cp.yvar).second)
            diag("duplicate variable", "club-bound variable '" + cp.yvar + "'");
        try {
            if (!spec.monoid->is_club(cp.club))
                diag("invalid club", "premise on '" + cp.phi + "' does not select by a club");
        } catch (const domain_error &e) {
            diag("invalid club", e.what());
        }
    }

    for (const auto &v : r.target.phi_variables())
        if (!phi_vars.count(v))
            diag("unbound target variable", "weight function variable '" + v + "'");
    for (const auto &v : r.target.process_variables())
        if (!proc_vars.count(v))
            diag("unbound target variable", "process variable '" + v + "'");

    // Weight-signature structure of the target.
    auto check_theta = [&](const ThetaTerm &t, const auto &self) -> void {
        switch (t.kind()) {
        case ThetaTerm::Kind::Op:
            if (!spec.weight_sig.has(t.name()))
                diag("unknown weight operator", "'" + t.name() + "'");
            else if (spec.weight_sig.arity(t.name()) != static_cast<int>(t.args().size()))
                diag("weight operator arity mismatch", "'" + t.name() + "'");
            for (const auto &arg : t.args())
                self(arg, self);
            break;
        case ThetaTerm::Kind::Process:
            if (!spec.interp.leaf_point_mass)
                diag("interpretation lacks a process-leaf rule",
                     "target mentions process term '" + t.process_term().to_string() + "'");
            break;
        case ThetaTerm::Kind::Phi:
            break;
        }
    };
    check_theta(r.target, check_theta);
    return diags;
}

std::vector<std::string> validate_specification(const Specification &spec) {
    std::vector<std::string> diags;
    if (!spec.monoid)
        diags.push_back("specification has no monoid");
    if (spec.labels.empty())
        diags.push_back("specification declares no labels");

    for (const auto &[name, arity] : spec.weight_sig.operators()) {
        auto it = spec.interp.ops.find(name);
        if (it == spec.interp.ops.end()) {
            diags.push_back("weight operator '" + name + "' has no interpretation");
            continue;
        }
        if (combinator_arity(it->second) != arity)
            diags.push_back("interpretation of '" + name + "' disagrees with its declared arity");
    }
    for (const auto &[name, comb] : spec.interp.ops)
        if (!spec.weight_sig.has(name))
            diags.push_back("interpretation for undeclared weight operator '" + name + "'");

    if (spec.monoid) {
        const Monoid &m = *spec.monoid;
        if (spec.interp.leaf_point_mass && !m.contains(*spec.interp.leaf_point_mass))
            diags.push_back("process-leaf point mass lies outside the carrier");
        for (const auto &[name, comb] : spec.interp.ops) {
            if (std::holds_alternative<CombNormalizeTo>(comb)) {
                if (!rational_kind(m))
                    diags.push_back("normalize-to needs a rational monoid ('" + name + "')");
                else if (!m.contains(std::get<CombNormalizeTo>(comb).total) ||
                         std::get<CombNormalizeTo>(comb).total.is_infinity())
                    diags.push_back("normalize-to total must be a finite carrier element ('" + name + "')");
            }
            if (std::holds_alternative<CombRateLaw>(comb)) {
                const auto &rl = std::get<CombRateLaw>(comb);
                if (!rational_kind(m))
                    diags.push_back("rate-law needs a rational monoid ('" + name + "')");
                if (!spec.process_sig.has(rl.term_op) || spec.process_sig.arity(rl.term_op) != 2)
                    diags.push_back("rate-law term constructor '" + rl.term_op + "' must be a binary process operator");
            }
            if (std::holds_alternative<CombWeightedSum>(comb)) {
                if (!mul_capable(m))
                    diags.push_back("weighted-sum needs a multiplicative monoid ('" + name + "')");
                for (const auto &c : std::get<CombWeightedSum>(comb).coeffs)
                    if (!m.contains(c))
                        diags.push_back("weighted-sum coefficient outside carrier ('" + name + "')");
            }
            if (std::holds_alternative<CombTermShaped>(comb)) {
                const auto &ts = std::get<CombTermShaped>(comb);
                const int arity = combinator_arity(comb);
                for (const auto &v : ts.shape.variables()) {
                    if (v.empty() || v[0] != '$') {
                        // Bare constants are fine; they serialize like the
                        // nullary operator they name.
                        if (!spec.process_sig.has(v) || spec.process_sig.arity(v) != 0)
                            diags.push_back("term-shape leaf '" + v + "' is not a slot variable ('" + name +
                                            "')");
                        continue;
                    }
                    int idx = std::atoi(v.substr(1).c_str());
                    if (idx < 1 || idx > arity)
                        diags.push_back("term-shape slot '" + v + "' out of range ('" + name + "')");
                }
                bool needs_mul = false;
                for (const auto &mono : ts.beta.monomials) {
                    if (mono.coeff && !m.contains(*mono.coeff))
                        diags.push_back("beta coefficient outside carrier ('" + name + "')");
                    if ((mono.coeff && !mono.slots.empty()) || mono.slots.size() >= 2 ||
                        (!mono.coeff && mono.slots.empty()))
                        needs_mul = true;
                    for (int s : mono.slots)
                        if (s < 0 || s >= arity)
                            diags.push_back("beta slot out of range ('" + name + "')");
                }
                if (needs_mul && !mul_capable(m))
                    diags.push_back("beta needs a multiplicative monoid ('" + name + "')");
            }
        }
    }

    for (const auto &rule : spec.rules) {
        auto sub = validate_rule(spec, rule);
        diags.insert(diags.end(), sub.begin(), sub.end());
    }
    return diags;
}

namespace {

struct Evaluator {
    const Specification &spec;
    const Env &env;

    std::set<WeightFunction> eval(const ThetaTerm &t) const {
        const Monoid &m = *spec.monoid;
        switch (t.kind()) {
        case ThetaTerm::Kind::Phi: {
            auto it = env.fns.find(t.name());
            if (it == env.fns.end())
                throw domain_error("unbound weight function variable '" + t.name() + "'");
            return {it->second};
        }
        case ThetaTerm::Kind::Process: {
            if (!spec.interp.leaf_point_mass)
                throw domain_error("interpretation has no process-leaf rule");
            Term instantiated = t.process_term().substitute(env.proc);
            WeightFunction fn(spec.monoid,
                              {{instantiated.to_string(), *spec.interp.leaf_point_mass}});
            return {fn};
        }
        case ThetaTerm::Kind::Op:
            break;
        }
        auto comb_it = spec.interp.ops.find(t.name());
        if (comb_it == spec.interp.ops.end())
            throw domain_error("weight operator '" + t.name() + "' has no interpretation");
        if (std::holds_alternative<CombUnion>(comb_it->second)) {
            std::set<WeightFunction> out;
            for (const auto &arg : t.args()) {
                auto sub = eval(arg);
                out.insert(sub.begin(), sub.end());
            }
            return out;
        }
        std::vector<std::vector<WeightFunction>> choices;
        for (const auto &arg : t.args()) {
            auto sub = eval(arg);
            choices.emplace_back(sub.begin(), sub.end());
            if (choices.back().empty())
                return {};  // an argument with no interpretation yields none
        }
        std::set<WeightFunction> out;
        std::vector<std::size_t> pick(choices.size(), 0);
        for (;;) {  // one pass even when nullary
            std::vector<const WeightFunction *> args;
            args.reserve(pick.size());
            for (std::size_t i = 0; i < pick.size(); ++i)
                args.push_back(&choices[i][pick[i]]);
            out.insert(apply(comb_it->second, args, m));
            std::size_t i = 0;
            for (; i < pick.size(); ++i) {
                if (++pick[i] < choices[i].size())
                    break;
                pick[i] = 0;
            }
            if (i == pick.size())
                break;
        }
        return out;
    }

    // Proportion of the total carried by one entry; unit share for the
    // infinite point masses used by process leaves.
    static Weight share(const Monoid &m, const Weight &entry, const Weight &total) {
        if (total.is_infinity())
            return entry.is_infinity() ? Weight::number(1) : Weight::number(0);
        if (entry.is_infinity())
            throw domain_error("infinite entry with finite total weight");
        return Weight::number(entry.as_number() / total.as_number());
    }

    static Weight combine_totals(const Monoid &m, CombRateLaw::Combiner comb, const Weight &t1, const Weight &t2) {
        switch (comb) {
        case CombRateLaw::Combiner::Min:
            if (t1.is_infinity())
                return t2;
            if (t2.is_infinity())
                return t1;
            return t1 < t2 ? t1 : t2;
        case CombRateLaw::Combiner::Product:
            return weight_mul(m, t1, t2);
        case CombRateLaw::Combiner::Sum:
            return m.add(t1, t2);
        }
        throw domain_error("unknown rate-law combiner");
    }

    WeightFunction apply(const Combinator &comb, const std::vector<const WeightFunction *> &args,
                         const Monoid &m) const {
        return std::visit(
            [&](const auto &c) -> WeightFunction {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, CombConstZero>) {
                    return WeightFunction(spec.monoid);
                } else if constexpr (std::is_same_v<T, CombNormalizeTo>) {
                    const WeightFunction &rho = *args.at(0);
                    if (rho.empty())
                        return WeightFunction(spec.monoid);
                    Weight each = Weight::number(c.total.as_number() /
                                                 mpq_class(static_cast<long>(rho.entries().size())));
                    std::map<StateId, Weight> entries;
                    for (const auto &[state, w] : rho.entries())
                        entries.emplace(state, each);
                    return WeightFunction(spec.monoid, entries);
                } else if constexpr (std::is_same_v<T, CombPointwiseSum>) {
                    return args.at(0)->plus(*args.at(1));
                } else if constexpr (std::is_same_v<T, CombWeightedSum>) {
                    WeightFunction acc(spec.monoid);
                    for (std::size_t i = 0; i < c.coeffs.size(); ++i) {
                        std::map<StateId, Weight> scaled;
                        for (const auto &[state, w] : args.at(i)->entries())
                            scaled.emplace(state, weight_mul(m, c.coeffs[i], w));
                        acc = acc.plus(WeightFunction(spec.monoid, scaled));
                    }
                    return acc;
                } else if constexpr (std::is_same_v<T, CombRateLaw>) {
                    const WeightFunction &lhs = *args.at(0);
                    const WeightFunction &rhs = *args.at(1);
                    Weight t1 = lhs.total_weight(), t2 = rhs.total_weight();
                    if (m.is_zero(t1) || m.is_zero(t2))
                        return WeightFunction(spec.monoid);
                    Weight combined = combine_totals(m, c.combiner, t1, t2);
                    std::map<StateId, Weight> entries;
                    for (const auto &[s1, w1] : lhs.entries())
                        for (const auto &[s2, w2] : rhs.entries()) {
                            Weight w = weight_mul(m, weight_mul(m, share(m, w1, t1), share(m, w2, t2)), combined);
                            StateId target = Term::op(c.term_op, {Term::var(s1), Term::var(s2)}).to_string();
                            auto [it, inserted] = entries.emplace(target, w);
                            if (!inserted)
                                it->second = m.add(it->second, w);
                        }
                    return WeightFunction(spec.monoid, entries);
                } else if constexpr (std::is_same_v<T, CombIdentity>) {
                    return *args.at(0);
                } else if constexpr (std::is_same_v<T, CombUnion>) {
                    throw domain_error("set union is handled at the set level");
                } else {
                    static_assert(std::is_same_v<T, CombTermShaped>);
                    return apply_term_shaped(c, args, m);
                }
            },
            comb);
    }

    // Scans each slot over the support of its argument function (repeated
    // slot occurrences share one scan), substitutes into the shape, and
    // accumulates the beta weight of the assignment.
    WeightFunction apply_term_shaped(const CombTermShaped &c, const std::vector<const WeightFunction *> &args,
                                     const Monoid &m) const {
        const std::size_t k = args.size();
        std::vector<std::vector<std::pair<StateId, Weight>>> supports(k);
        for (std::size_t i = 0; i < k; ++i) {
            for (const auto &[state, w] : args[i]->entries())
                supports[i].emplace_back(state, w);
            if (supports[i].empty())
                return WeightFunction(spec.monoid);
        }
        std::map<StateId, Weight> entries;
        std::vector<std::size_t> pick(k, 0);
        for (;;) {
            std::map<std::string, Term> sigma;
            std::vector<Weight> slot_weights;
            for (std::size_t i = 0; i < k; ++i) {
                sigma["$" + std::to_string(i + 1)] = Term::var(supports[i][pick[i]].first);
                slot_weights.push_back(supports[i][pick[i]].second);
            }
            Weight w = beta_eval(m, c.beta, slot_weights);
            StateId target = c.shape.substitute(sigma).to_string();
            auto [it, inserted] = entries.emplace(target, w);
            if (!inserted)
                it->second = m.add(it->second, w);
            std::size_t i = 0;
            for (; i < k; ++i) {
                if (++pick[i] < supports[i].size())
                    break;
                pick[i] = 0;
            }
            if (i == k)
                break;
        }
        return WeightFunction(spec.monoid, entries);
    }
};

}  // namespace

std::set<WeightFunction> interpret(const Specification &spec, const ThetaTerm &psi, const Env &env) {
    return Evaluator{spec, env}.eval(psi);
}

DerivationEngine::DerivationEngine(const Specification &spec) : spec_(spec) {
    auto diags = validate_specification(spec);
    if (!diags.empty())
        throw domain_error("invalid specification: " + diags.front());
}

const std::map<Label, std::set<WeightFunction>> &DerivationEngine::one_step(const Term &ground) {
    const StateId key = ground.to_string();
    if (auto it = memo_.find(key); it != memo_.end())
        return it->second;
    if (!ground.is_ground())
        throw domain_error("one_step: term '" + key + "' is not ground");

    const std::size_t n = ground.children().size();
    std::vector<const std::map<Label, std::set<WeightFunction>> *> child_outcomes(n);
    for (std::size_t i = 0; i < n; ++i)
        child_outcomes[i] = &one_step(ground.children()[i]);

    Trigger trigger;
    trigger.enabled.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto &[label, fns] : *child_outcomes[i])
            if (!fns.empty())
                trigger.enabled[i].insert(label);

    std::map<Label, std::set<WeightFunction>> out;
    for (const auto &rule : spec_.rules) {
        if (rule.source_op != ground.head())
            continue;
        bool labels_ok = true;
        for (const auto &pos : rule.positives)
            labels_ok &= trigger.enabled[pos.arg].count(pos.label) > 0;
        for (const auto &neg : rule.negatives)
            labels_ok &= trigger.enabled[neg.arg].count(neg.label) == 0;
        if (!labels_ok)
            continue;

        // Candidate successor functions per positive premise, filtered by
        // the total-weight premises bound to the same variable.
        std::vector<std::vector<const WeightFunction *>> candidates(rule.positives.size());
        bool feasible = true;
        for (std::size_t j = 0; j < rule.positives.size() && feasible; ++j) {
            const auto &pos = rule.positives[j];
            auto it = child_outcomes[pos.arg]->find(pos.label);
            if (it == child_outcomes[pos.arg]->end()) {
                feasible = false;
                break;
            }
            for (const auto &fn : it->second) {
                bool matches = true;
                for (const auto &tp : rule.totals)
                    if (tp.phi == pos.phi && fn.total_weight() != tp.total)
                        matches = false;
                if (matches)
                    candidates[j].push_back(&fn);
            }
            feasible = !candidates[j].empty();
        }
        if (!feasible)
            continue;

        std::vector<std::size_t> pick(candidates.size(), 0);
        for (;;) {
            Env env;
            for (std::size_t i = 0; i < n; ++i)
                env.proc.emplace(rule.arg_vars[i], ground.children()[i]);
            for (std::size_t j = 0; j < candidates.size(); ++j)
                env.fns.emplace(rule.positives[j].phi, *candidates[j][pick[j]]);

            // Club premises bind their variables to selected support
            // elements; every combination fires separately.
            std::vector<std::vector<StateId>> selections(rule.clubs.size());
            bool selectable = true;
            for (std::size_t k = 0; k < rule.clubs.size(); ++k) {
                const auto &cp = rule.clubs[k];
                auto sel = env.fns.at(cp.phi).select_by_club(cp.club);
                selections[k].assign(sel.begin(), sel.end());
                selectable &= !selections[k].empty();
            }
            if (selectable) {
                Trigger fired = trigger;
                for (const auto &tp : rule.totals)
                    fired.totals.push_back(env.fns.at(tp.phi).total_weight());
                std::vector<std::size_t> ypick(selections.size(), 0);
                for (;;) {
                    Env bound = env;
                    for (std::size_t k = 0; k < selections.size(); ++k)
                        bound.proc.emplace(rule.clubs[k].yvar, Term::var(selections[k][ypick[k]]));
                    for (const auto &fn : interpret(spec_, rule.target, bound))
                        out[rule.conclusion].insert(fn);
                    audit_.push_back(AuditEntry{key, rule.conclusion, rule.name, fired});

                    std::size_t k = 0;
                    for (; k < ypick.size(); ++k) {
                        if (++ypick[k] < selections[k].size())
                            break;
                        ypick[k] = 0;
                    }
                    if (k == ypick.size())
                        break;
                }
            }

            std::size_t j = 0;
            for (; j < pick.size(); ++j) {
                if (++pick[j] < candidates[j].size())
                    break;
                pick[j] = 0;
            }
            if (j == pick.size())
                break;
        }
    }
    return memo_.emplace(key, std::move(out)).first->second;
}

Ultras induce(DerivationEngine &engine, const std::vector<Term> &roots, std::size_t budget) {
    const Specification &spec = engine.spec();
    Ultras u(spec.monoid, spec.labels);

    std::set<StateId> discovered, explored;
    std::map<StateId, Term> term_of;
    std::set<StateId> layer;
    for (const auto &root : roots) {
        StateId s = root.to_string();
        term_of.emplace(s, root);
        discovered.insert(s);
        layer.insert(s);
    }
    while (!layer.empty()) {
        std::set<StateId> next;
        for (const auto &state : layer) {  // sorted serialization order
            if (explored.size() >= budget)
                break;
            explored.insert(state);
            u.add_state(state);
            for (const auto &[label, fns] : engine.one_step(term_of.at(state)))
                for (const auto &fn : fns) {
                    u.add_transition(state, label, fn);
                    for (const auto &[target, w] : fn.entries())
                        if (discovered.insert(target).second) {
                            term_of.emplace(target, parse_term(target, spec.process_sig));
                            next.insert(target);
                        }
                }
        }
        if (explored.size() >= budget)
            break;
        layer = std::move(next);
    }
    for (const auto &state : discovered)
        if (!explored.count(state))
            u.mark_boundary(state);
    u.validate();
    return u;
}

Ultras induce(const Specification &spec, const std::vector<Term> &roots, std::size_t budget) {
    DerivationEngine engine(spec);
    return induce(engine, roots, budget);
}

bool naturality_probe(const Specification &spec, const ThetaTerm &psi, const Env &env,
                      const std::map<std::string, std::string> &renaming) {
    std::map<std::string, Term> sigma;
    for (const auto &[from, to] : renaming)
        sigma.emplace(from, Term::var(to));
    auto rename_state = [&](const StateId &s) {
        return parse_term(s, spec.process_sig).substitute(sigma).to_string();
    };

    Env identity_env = env;
    for (const auto &v : psi.process_variables())
        identity_env.proc.emplace(v, Term::var(v));

    // Route 1: evaluate, then push the renaming through the result.
    std::set<WeightFunction> lhs;
    for (const auto &fn : interpret(spec, psi, identity_env))
        lhs.insert(fn.pushforward(rename_state));

    // Route 2: rename the term and the bound functions, then evaluate.
    auto rename_theta = [&](const ThetaTerm &t, const auto &self) -> ThetaTerm {
        switch (t.kind()) {
        case ThetaTerm::Kind::Phi:
            return t;
        case ThetaTerm::Kind::Process:
            return ThetaTerm::process(t.process_term().substitute(sigma));
        case ThetaTerm::Kind::Op: {
            std::vector<ThetaTerm> args;
            for (const auto &arg : t.args())
                args.push_back(self(arg, self));
            return ThetaTerm::op(t.name(), std::move(args));
        }
        }
        throw domain_error("unreachable");
    };
    ThetaTerm renamed = rename_theta(psi, rename_theta);
    Env renamed_env;
    for (const auto &v : renamed.process_variables())
        renamed_env.proc.emplace(v, Term::var(v));
    for (const auto &[name, fn] : env.fns)
        renamed_env.fns.emplace(name, fn.pushforward(rename_state));

    return lhs == interpret(spec, renamed, renamed_env);
}

ProbeResult bisimilar_within(const Specification &spec, const Term &p, const Term &q, std::size_t budget) {
    Ultras u = induce(spec, {p, q}, budget);
    if (!u.boundary().empty())
        return ProbeResult::Inconclusive;
    Partition part = largest_bisimulation(u);
    return part.same_block(TaggedState{0, p.to_string()}, TaggedState{0, q.to_string()})
               ? ProbeResult::Holds
               : ProbeResult::Fails;
}

ProbeResult congruence_probe(const Specification &spec, const Term &p, const Term &q,
                             const std::vector<Term> &contexts, std::size_t budget) {
    ProbeResult base = bisimilar_within(spec, p, q, budget);
    if (base == ProbeResult::Fails)
        throw domain_error("congruence_probe: the two terms are not bisimilar");
    if (base == ProbeResult::Inconclusive)
        return ProbeResult::Inconclusive;
    bool truncated = false;
    for (const auto &ctx : contexts) {
        if (!ctx.variables().count("@"))
            throw domain_error("congruence_probe: context has no hole variable '@'");
        Term left = ctx.substitute({{"@", p}});
        Term right = ctx.substitute({{"@", q}});
        switch (bisimilar_within(spec, left, right, budget)) {
        case ProbeResult::Fails:
            return ProbeResult::Fails;
        case ProbeResult::Inconclusive:
            truncated = true;
            break;
        case ProbeResult::Holds:
            break;
        }
    }
    return truncated ? ProbeResult::Inconclusive : ProbeResult::Holds;
}

}  // namespace ultras
