#include "ultras/translations.hpp"

#include <algorithm>

namespace ultras {
namespace translations {

namespace {

Weight some_nonzero(const Monoid &m) {
    switch (m.kind()) {
    case Monoid::Kind::BoolOr:
        return Weight::boolean(true);
    case Monoid::Kind::FiniteTable:
        for (std::uint32_t i = 0; i < m.table_size(); ++i)
            if (!m.is_zero(Weight::table(i)))
                return Weight::table(i);
        throw domain_error("trivial monoid has no non-zero element");
    default:
        return Weight::number(1);
    }
}

// Replaces every variable leaf of the target with a slot variable. Vars in
// `shared` map all their occurrences to one slot; vars in `independent`
// get a fresh slot per occurrence. Returns the slot arguments in order.
struct ShapeBuilder {
    const std::set<std::string> &independent;
    std::map<std::string, int> shared_slot;
    std::vector<std::string> slot_vars;  // original variable per slot

    Term build(const Term &t) {
        if (!t.is_var()) {
            std::vector<Term> children;
            for (const auto &child : t.children())
                children.push_back(build(child));
            return Term::op(t.head(), std::move(children));
        }
        const std::string &v = t.head();
        if (independent.count(v)) {
            slot_vars.push_back(v);
            return Term::var("$" + std::to_string(slot_vars.size()));
        }
        auto it = shared_slot.find(v);
        if (it == shared_slot.end()) {
            slot_vars.push_back(v);
            it = shared_slot.emplace(v, static_cast<int>(slot_vars.size())).first;
        }
        return Term::var("$" + std::to_string(it->second));
    }
};

}  // namespace

std::vector<std::string> validate_segala_rule(const Signature &process_sig, const std::set<Label> &labels,
                                              const SegalaRule &r) {
    std::vector<std::string> diags;
    auto diag = [&](const std::string &msg) { diags.push_back("segala rule " + r.name + ": " + msg); };

    if (!process_sig.has(r.source_op))
        diag("unknown source operator '" + r.source_op + "'");
    else if (process_sig.arity(r.source_op) != static_cast<int>(r.arg_vars.size()))
        diag("source arity mismatch");
    if (!labels.count(r.conclusion))
        diag("unknown conclusion label '" + r.conclusion + "'");

    std::set<std::string> proc_vars(r.arg_vars.begin(), r.arg_vars.end());
    if (proc_vars.size() != r.arg_vars.size())
        diag("duplicate process variable");
    std::set<std::string> phis;
    for (const auto &pos : r.positives) {
        if (pos.arg < 0 || pos.arg >= static_cast<int>(r.arg_vars.size()))
            diag("positive premise index out of range");
        if (!labels.count(pos.label))
            diag("unknown premise label '" + pos.label + "'");
        if (!phis.insert(pos.phi).second)
            diag("duplicate distribution variable '" + pos.phi + "'");
    }
    std::set<std::pair<int, Label>> pos_pairs;
    for (const auto &pos : r.positives)
        pos_pairs.emplace(pos.arg, pos.label);
    for (const auto &neg : r.negatives)
        if (pos_pairs.count({neg.arg, neg.label}))
            diag("overlapping positive/negative premises");
    for (const auto &sel : r.selections) {
        if (!phis.count(sel.phi))
            diag("selection from unbound distribution variable '" + sel.phi + "'");
        if (!proc_vars.insert(sel.yvar).second)
            diag("duplicate variable '" + sel.yvar + "'");
    }

    if (r.targets.empty())
        diag("no target terms");
    mpq_class total = 0;
    for (const auto &t : r.targets) {
        if (t.prob <= 0 || t.prob > 1)
            diag("target weight outside (0,1]");
        total += t.prob;
        for (const auto &v : t.term.variables())
            if (!proc_vars.count(v) && !phis.count(v))
                diag("unbound target variable '" + v + "'");
    }
    if (!r.targets.empty() && total != 1)
        diag("target weights do not sum to 1");
    return diags;
}

Specification translate_segala(const Signature &process_sig, const std::set<Label> &labels,
                               const std::vector<SegalaRule> &rules) {
    Specification spec;
    spec.monoid = Monoid::nonneg_rational_plus();
    spec.labels = labels;
    spec.process_sig = process_sig;
    spec.interp.leaf_point_mass = Weight::number(1);

    for (const auto &r : rules) {
        auto diags = validate_segala_rule(process_sig, labels, r);
        if (!diags.empty())
            throw domain_error(diags.front());
    }

    int rule_idx = 0;
    for (const auto &sr : rules) {
        ++rule_idx;
        const std::string rn = sr.name.empty() ? "r" + std::to_string(rule_idx) : sr.name;
        std::set<std::string> phis;
        for (const auto &pos : sr.positives)
            phis.insert(pos.phi);

        Rule rule;
        rule.name = "segala_" + rn;
        rule.source_op = sr.source_op;
        rule.arg_vars = sr.arg_vars;
        rule.conclusion = sr.conclusion;
        rule.positives = sr.positives;
        rule.negatives = sr.negatives;
        for (const auto &sel : sr.selections)
            rule.clubs.push_back({sel.phi, Club::all_nonzero(), sel.yvar});

        int colour = 0;
        std::vector<ThetaTerm> combined;
        std::vector<Weight> coeffs;
        for (std::size_t j = 0; j < sr.targets.size(); ++j) {
            // Distribution occurrences scan independently: a fresh slot and
            // a fresh colouring operator per occurrence.
            ShapeBuilder builder{phis, {}, {}};
            Term shape = builder.build(sr.targets[j].term);
            const std::string shape_op = "sh_" + rn + "_t" + std::to_string(j + 1);
            spec.weight_sig.declare(shape_op, static_cast<int>(builder.slot_vars.size()));
            BetaMonomial mono;
            std::vector<ThetaTerm> slot_args;
            for (std::size_t s = 0; s < builder.slot_vars.size(); ++s) {
                const std::string &v = builder.slot_vars[s];
                if (phis.count(v)) {
                    mono.slots.push_back(static_cast<int>(s));
                    const std::string col = "col_" + rn + "_" + std::to_string(++colour);
                    spec.weight_sig.declare(col, 1);
                    spec.interp.ops.emplace(col, CombIdentity{});
                    slot_args.push_back(ThetaTerm::op(col, {ThetaTerm::phi(v)}));
                } else {
                    slot_args.push_back(ThetaTerm::process(Term::var(v)));
                }
            }
            spec.interp.ops.emplace(shape_op, CombTermShaped{shape, Beta{{mono}}});
            combined.push_back(ThetaTerm::op(shape_op, std::move(slot_args)));
            coeffs.push_back(Weight::number(sr.targets[j].prob));
        }
        const std::string cc = "cc_" + rn;
        spec.weight_sig.declare(cc, static_cast<int>(coeffs.size()));
        spec.interp.ops.emplace(cc, CombWeightedSum{std::move(coeffs)});
        rule.target = ThetaTerm::op(cc, std::move(combined));
        spec.rules.push_back(std::move(rule));
    }
    return spec;
}

std::vector<std::string> validate_wgsos_rule(const Signature &process_sig, const std::set<Label> &labels,
                                             const MonoidRef &monoid, const WgsosRule &r) {
    std::vector<std::string> diags;
    auto diag = [&](const std::string &msg) { diags.push_back("wgsos rule " + r.name + ": " + msg); };

    if (!process_sig.has(r.source_op))
        diag("unknown source operator '" + r.source_op + "'");
    else if (process_sig.arity(r.source_op) != static_cast<int>(r.arg_vars.size()))
        diag("source arity mismatch");
    if (!labels.count(r.conclusion))
        diag("unknown conclusion label '" + r.conclusion + "'");

    std::set<std::string> proc_vars(r.arg_vars.begin(), r.arg_vars.end());
    if (proc_vars.size() != r.arg_vars.size())
        diag("duplicate process variable");
    std::set<std::pair<int, Label>> weight_slots;
    for (const auto &wp : r.weight_premises) {
        if (wp.arg < 0 || wp.arg >= static_cast<int>(r.arg_vars.size()))
            diag("weight premise index out of range");
        if (!labels.count(wp.label))
            diag("unknown premise label '" + wp.label + "'");
        if (!monoid->contains(wp.total))
            diag("weight premise constant outside carrier");
        if (!weight_slots.emplace(wp.arg, wp.label).second)
            diag("two weight premises on one (argument, label) slot");
    }
    std::set<std::string> uvars, yvars;
    for (const auto &tp : r.trans_premises) {
        if (tp.arg < 0 || tp.arg >= static_cast<int>(r.arg_vars.size()))
            diag("transition premise index out of range");
        if (!labels.count(tp.label))
            diag("unknown premise label '" + tp.label + "'");
        if (!uvars.insert(tp.uvar).second)
            diag("duplicate weight variable '" + tp.uvar + "'");
        if (!yvars.insert(tp.yvar).second || proc_vars.count(tp.yvar))
            diag("duplicate variable '" + tp.yvar + "'");
    }
    auto tvars = r.target.variables();
    for (const auto &y : yvars)
        if (!tvars.count(y))
            diag("bound variable '" + y + "' does not occur in the target");
    for (const auto &v : tvars)
        if (!proc_vars.count(v) && !yvars.count(v))
            diag("unbound target variable '" + v + "'");
    for (const auto &mono : r.beta.monomials) {
        if (mono.coeff && !monoid->contains(*mono.coeff))
            diag("combination coefficient outside carrier");
        for (int s : mono.slots)
            if (s < 0 || s >= static_cast<int>(r.trans_premises.size()))
                diag("combination references a missing weight variable");
    }
    return diags;
}

namespace {

std::string premise_map_key(const Monoid &m, const WgsosRule &r) {
    std::vector<std::tuple<int, Label, std::string>> parts;
    for (const auto &wp : r.weight_premises)
        parts.emplace_back(wp.arg, wp.label, m.format(wp.total));
    std::sort(parts.begin(), parts.end());
    std::string key;
    for (const auto &[arg, label, w] : parts)
        key += std::to_string(arg) + ":" + label + "=" + w + ";";
    return key;
}

std::set<std::pair<int, Label>> premise_slots(const WgsosRule &r) {
    std::set<std::pair<int, Label>> out;
    for (const auto &wp : r.weight_premises)
        out.emplace(wp.arg, wp.label);
    return out;
}

}  // namespace

Specification translate_wgsos(const MonoidRef &monoid, const Signature &process_sig,
                              const std::set<Label> &labels, const std::vector<WgsosRule> &rules) {
    if (!monoid->is_positive())
        throw domain_error(
            "translate_wgsos: the monoid is not positive, so support selection is not expressible as a club");
    for (const auto &r : rules) {
        auto diags = validate_wgsos_rule(process_sig, labels, monoid, r);
        if (!diags.empty())
            throw domain_error(diags.front());
    }
    // Rules for one (source, label) must constrain the same slots,
    // otherwise two merged rules could fire together and the induced
    // system would stop being functional.
    std::map<std::pair<std::string, Label>, std::set<std::pair<int, Label>>> slot_shape;
    for (const auto &r : rules) {
        auto key = std::make_pair(r.source_op, r.conclusion);
        auto slots = premise_slots(r);
        auto [it, inserted] = slot_shape.emplace(key, slots);
        if (!inserted && it->second != slots)
            throw domain_error("translate_wgsos: rules for '" + r.source_op + "' label '" + r.conclusion +
                               "' disagree on their weight-premise slots");
    }

    Specification spec;
    spec.monoid = monoid;
    spec.labels = labels;
    spec.process_sig = process_sig;
    spec.interp.leaf_point_mass = some_nonzero(*monoid);
    spec.weight_sig.declare("bot", 0);
    spec.interp.ops.emplace("bot", CombConstZero{});
    spec.weight_sig.declare("oplus", 2);
    spec.interp.ops.emplace("oplus", CombPointwiseSum{});

    std::map<std::pair<std::string, Label>, std::map<std::string, std::vector<std::size_t>>> groups;
    for (std::size_t i = 0; i < rules.size(); ++i)
        groups[{rules[i].source_op, rules[i].conclusion}][premise_map_key(*monoid, rules[i])].push_back(i);

    int group_idx = 0;
    for (const auto &[key, by_premises] : groups) {
        for (const auto &[pkey, members] : by_premises) {
            ++group_idx;
            const WgsosRule &first = rules[members.front()];
            Rule rule;
            rule.name = "wgsos_g" + std::to_string(group_idx);
            rule.source_op = first.source_op;
            rule.conclusion = first.conclusion;
            rule.arg_vars.clear();
            for (std::size_t i = 0; i < first.arg_vars.size(); ++i)
                rule.arg_vars.push_back("x" + std::to_string(i + 1));

            // One weight-function variable per (argument, label) slot any
            // member rule touches.
            std::set<std::pair<int, Label>> slots = premise_slots(first);
            for (std::size_t ri : members)
                for (const auto &tp : rules[ri].trans_premises)
                    slots.emplace(tp.arg, tp.label);
            auto phi_name = [](int arg, const Label &l) { return "phi_" + std::to_string(arg + 1) + "_" + l; };
            for (const auto &[arg, label] : slots)
                rule.positives.push_back({arg, label, phi_name(arg, label)});
            for (const auto &wp : first.weight_premises)
                rule.totals.push_back({phi_name(wp.arg, wp.label), wp.total});

            std::optional<ThetaTerm> chain;
            int colour = 0;
            for (std::size_t ri : members) {
                const WgsosRule &src = rules[ri];
                // Rename source-argument variables to the merged x names.
                std::map<std::string, Term> arg_rename;
                for (std::size_t i = 0; i < src.arg_vars.size(); ++i)
                    arg_rename.emplace(src.arg_vars[i], Term::var(rule.arg_vars[i]));
                Term target = src.target.substitute(arg_rename);

                std::set<std::string> no_independent;
                ShapeBuilder builder{no_independent, {}, {}};
                Term shape = builder.build(target);
                const std::string shape_op = "sh_" + rule.name + "_r" + std::to_string(ri + 1);

                std::map<std::string, int> slot_of;  // variable -> 0-based slot
                for (std::size_t s = 0; s < builder.slot_vars.size(); ++s)
                    slot_of[builder.slot_vars[s]] = static_cast<int>(s);

                std::vector<ThetaTerm> slot_args(builder.slot_vars.size(), ThetaTerm::phi("?"));
                std::map<std::string, std::string> y_to_phi;
                for (const auto &tp : src.trans_premises)
                    y_to_phi[tp.yvar] = phi_name(tp.arg, tp.label);
                for (std::size_t s = 0; s < builder.slot_vars.size(); ++s) {
                    const std::string &v = builder.slot_vars[s];
                    auto yit = y_to_phi.find(v);
                    if (yit != y_to_phi.end()) {
                        const std::string col = "col_" + rule.name + "_" + std::to_string(++colour);
                        spec.weight_sig.declare(col, 1);
                        spec.interp.ops.emplace(col, CombIdentity{});
                        slot_args[s] = ThetaTerm::op(col, {ThetaTerm::phi(yit->second)});
                    } else {
                        slot_args[s] = ThetaTerm::process(Term::var(v));
                    }
                }

                // Remap the combination's premise indices to shape slots.
                Beta beta;
                for (const auto &mono : src.beta.monomials) {
                    BetaMonomial out = mono;
                    out.slots.clear();
                    for (int premise_idx : mono.slots)
                        out.slots.push_back(slot_of.at(src.trans_premises[premise_idx].yvar));
                    beta.monomials.push_back(std::move(out));
                }
                spec.weight_sig.declare(shape_op, static_cast<int>(builder.slot_vars.size()));
                spec.interp.ops.emplace(shape_op, CombTermShaped{shape, std::move(beta)});

                ThetaTerm contribution = ThetaTerm::op(shape_op, std::move(slot_args));
                chain = chain ? ThetaTerm::op("oplus", {*chain, contribution}) : contribution;
            }
            rule.target = *chain;
            spec.rules.push_back(std::move(rule));
        }
    }

    // Operators with no rule for a label keep a zero outcome so the
    // induced system stays functional.
    for (const auto &[op, arity] : process_sig.operators())
        for (const auto &label : labels) {
            if (groups.count({op, label}))
                continue;
            Rule rule;
            rule.name = "wgsos_default_" + op + "_" + label;
            rule.source_op = op;
            rule.conclusion = label;
            for (int i = 0; i < arity; ++i)
                rule.arg_vars.push_back("x" + std::to_string(i + 1));
            rule.target = ThetaTerm::op("bot", {});
            spec.rules.push_back(std::move(rule));
        }
    return spec;
}

Wlts wgsos_semantics(const MonoidRef &monoid, const Signature &process_sig, const std::set<Label> &labels,
                     const std::vector<WgsosRule> &rules, const std::vector<Term> &roots,
                     std::size_t budget) {
    for (const auto &r : rules) {
        auto diags = validate_wgsos_rule(process_sig, labels, monoid, r);
        if (!diags.empty())
            throw domain_error(diags.front());
    }
    Wlts out(monoid, labels);

    // Memoized rows of already-derived states, by structural recursion.
    std::map<StateId, std::map<Label, WeightFunction>> rows;
    auto derive = [&](const Term &term, const auto &self) -> const std::map<Label, WeightFunction> & {
        const StateId key = term.to_string();
        if (auto it = rows.find(key); it != rows.end())
            return it->second;
        std::vector<const std::map<Label, WeightFunction> *> child_rows;
        for (const auto &child : term.children())
            child_rows.push_back(&self(child, self));

        std::map<Label, WeightFunction> row;
        for (const auto &label : labels)
            row.emplace(label, WeightFunction(monoid));
        for (const auto &rule : rules) {
            if (rule.source_op != term.head())
                continue;
            bool fires = true;
            for (const auto &wp : rule.weight_premises)
                fires &= child_rows[wp.arg]->at(wp.label).total_weight() == wp.total;
            if (!fires)
                continue;
            // Support bindings of the transition premises.
            std::vector<std::vector<std::pair<StateId, Weight>>> cands;
            for (const auto &tp : rule.trans_premises) {
                const auto &fn = child_rows[tp.arg]->at(tp.label);
                cands.emplace_back(fn.entries().begin(), fn.entries().end());
                if (cands.back().empty()) {
                    fires = false;
                    break;
                }
            }
            if (!fires)
                continue;
            std::vector<std::size_t> pick(cands.size(), 0);
            for (;;) {
                std::map<std::string, Term> sigma;
                for (std::size_t i = 0; i < rule.arg_vars.size(); ++i)
                    sigma.emplace(rule.arg_vars[i], term.children()[i]);
                std::vector<Weight> premise_weights;
                for (std::size_t k = 0; k < cands.size(); ++k) {
                    sigma.emplace(rule.trans_premises[k].yvar, Term::var(cands[k][pick[k]].first));
                    premise_weights.push_back(cands[k][pick[k]].second);
                }
                Weight w = beta_eval(*monoid, rule.beta, premise_weights);
                StateId target = rule.target.substitute(sigma).to_string();
                row.at(rule.conclusion) =
                    row.at(rule.conclusion).plus(WeightFunction(monoid, {{target, w}}));
                std::size_t k = 0;
                for (; k < pick.size(); ++k) {
                    if (++pick[k] < cands[k].size())
                        break;
                    pick[k] = 0;
                }
                if (k == pick.size())
                    break;
            }
        }
        return rows.emplace(key, std::move(row)).first->second;
    };

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
        for (const auto &state : layer) {
            if (explored.size() >= budget)
                break;
            explored.insert(state);
            out.add_state(state);
            for (const auto &[label, fn] : derive(term_of.at(state), derive))
                for (const auto &[target, w] : fn.entries()) {
                    out.set_weight(state, label, target, w);
                    if (discovered.insert(target).second) {
                        term_of.emplace(target, parse_term(target, process_sig));
                        next.insert(target);
                    }
                }
        }
        if (explored.size() >= budget)
            break;
        layer = std::move(next);
    }
    return out;
}

}  // namespace translations
}  // namespace ultras
