#include "ultras/specfile.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace ultras {

namespace {

std::string trim(const std::string &s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string &line) {
    auto hash = line.find('#');
    return hash == std::string::npos ? line : line.substr(0, hash);
}

std::vector<std::string> words(const std::string &s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w)
        out.push_back(w);
    return out;
}

[[noreturn]] void fail_line(int lineno, const std::string &msg) {
    throw parse_error("line " + std::to_string(lineno) + ": " + msg);
}

// "name { elems: ...; unit: ...; add: (x y -> z)* }" after the keyword.
MonoidRef parse_monoid_decl(const std::string &body, int lineno) {
    std::string spec = trim(body);
    auto brace = spec.find('{');
    if (brace == std::string::npos) {
        try {
            return builtin_monoid(spec);
        } catch (const domain_error &e) {
            fail_line(lineno, e.what());
        }
    }
    if (spec.back() != '}')
        fail_line(lineno, "monoid table must end with '}'");
    std::string inner = spec.substr(brace + 1, spec.size() - brace - 2);

    std::vector<std::string> carrier;
    std::string unit;
    std::vector<std::tuple<std::string, std::string, std::string>> sums;
    for (const auto &part : split_top_level(inner, ';')) {
        if (part.empty())
            continue;
        auto colon = part.find(':');
        if (colon == std::string::npos)
            fail_line(lineno, "expected 'key: ...' inside the monoid table");
        std::string key = trim(part.substr(0, colon));
        std::string value = trim(part.substr(colon + 1));
        if (key == "elems") {
            carrier = words(value);
        } else if (key == "unit") {
            unit = value;
        } else if (key == "add") {
            std::size_t pos = 0;
            while (pos < value.size()) {
                auto open = value.find('(', pos);
                if (open == std::string::npos)
                    break;
                auto close = value.find(')', open);
                if (close == std::string::npos)
                    fail_line(lineno, "unbalanced '(' in the addition table");
                std::string entry = value.substr(open + 1, close - open - 1);
                auto arrow = entry.find("->");
                if (arrow == std::string::npos)
                    fail_line(lineno, "expected '(x y -> z)' in the addition table");
                auto lhs = words(entry.substr(0, arrow));
                auto rhs = words(entry.substr(arrow + 2));
                if (lhs.size() != 2 || rhs.size() != 1)
                    fail_line(lineno, "expected '(x y -> z)' in the addition table");
                sums.emplace_back(lhs[0], lhs[1], rhs[0]);
                pos = close + 1;
            }
        } else {
            fail_line(lineno, "unknown monoid table key '" + key + "'");
        }
    }
    try {
        return Monoid::finite_table(carrier, unit, sums);
    } catch (const domain_error &e) {
        fail_line(lineno, e.what());
    }
}

Club parse_club(const std::string &text, const MonoidRef &monoid, int lineno) {
    std::string s = trim(text);
    if (s == "nonzero")
        return Club::all_nonzero();
    if (s == "empty" || s == "{}")
        return Club::empty();
    if (s.size() >= 2 && s.front() == '{' && s.back() == '}') {
        if (!monoid->is_finite_table())
            fail_line(lineno, "explicit club subsets need a finite-table monoid");
        std::set<std::uint32_t> elems;
        for (const auto &name : split_top_level(s.substr(1, s.size() - 2), ',')) {
            if (name.empty())
                continue;
            auto idx = monoid->element_index(name);
            if (!idx)
                fail_line(lineno, "club element '" + name + "' is not in the carrier");
            elems.insert(*idx);
        }
        return elems.empty() ? Club::empty() : Club::subset(std::move(elems));
    }
    fail_line(lineno, "expected a club: nonzero, empty or {elements}");
}

Weight parse_weight_in(const MonoidRef &monoid, const std::string &text, int lineno) {
    try {
        return monoid->parse(trim(text));
    } catch (const domain_error &e) {
        fail_line(lineno, e.what());
    }
}

// Beta grammar: bterm ('+' bterm)*, bterm := w | [w '*'] $slot ('*' $slot)*.
// Slot variables are given by the caller ("$1".. or premise weight names).
Beta parse_beta(const std::string &text, const MonoidRef &monoid,
                const std::map<std::string, int> &slot_names, int lineno) {
    Beta beta;
    for (const auto &part : split_top_level(text, '+')) {
        BetaMonomial mono;
        bool first = true;
        for (const auto &factor_raw : split_top_level(part, '*')) {
            std::string factor = trim(factor_raw);
            if (factor.empty())
                fail_line(lineno, "empty factor in a weight combination");
            auto slot = slot_names.find(factor);
            if (slot != slot_names.end()) {
                mono.slots.push_back(slot->second);
            } else if (first) {
                mono.coeff = parse_weight_in(monoid, factor, lineno);
            } else {
                fail_line(lineno, "coefficient '" + factor + "' must come first in a product");
            }
            first = false;
        }
        beta.monomials.push_back(std::move(mono));
    }
    return beta;
}

std::map<std::string, int> dollar_slots(int arity) {
    std::map<std::string, int> out;
    for (int i = 0; i < arity; ++i)
        out.emplace("$" + std::to_string(i + 1), i);
    return out;
}

Combinator parse_combinator(const std::string &text, const MonoidRef &monoid, int lineno) {
    std::string s = trim(text);
    auto args_of = [&](const std::string &head) -> std::optional<std::string> {
        if (s.rfind(head + "(", 0) != 0 || s.back() != ')')
            return std::nullopt;
        return s.substr(head.size() + 1, s.size() - head.size() - 2);
    };
    if (s == "zero")
        return CombConstZero{};
    if (s == "sum")
        return CombPointwiseSum{};
    if (s == "identity")
        return CombIdentity{};
    if (s == "union")
        return CombUnion{};
    if (auto a = args_of("normalize-to"))
        return CombNormalizeTo{parse_weight_in(monoid, *a, lineno)};
    if (auto a = args_of("weighted-sum")) {
        CombWeightedSum ws;
        for (const auto &w : split_top_level(*a, ','))
            ws.coeffs.push_back(parse_weight_in(monoid, w, lineno));
        return ws;
    }
    if (auto a = args_of("rate-law")) {
        auto parts = split_top_level(*a, ',');
        if (parts.size() != 2)
            fail_line(lineno, "rate-law takes a term constructor and a combiner");
        CombRateLaw rl;
        rl.term_op = parts[0];
        if (parts[1] == "min")
            rl.combiner = CombRateLaw::Combiner::Min;
        else if (parts[1] == "product")
            rl.combiner = CombRateLaw::Combiner::Product;
        else if (parts[1] == "sum")
            rl.combiner = CombRateLaw::Combiner::Sum;
        else
            fail_line(lineno, "unknown rate-law combiner '" + parts[1] + "'");
        return rl;
    }
    if (auto a = args_of("term")) {
        auto parts = split_top_level(*a, ';');
        if (parts.size() != 2)
            fail_line(lineno, "term takes a shape and a weight combination, separated by ';'");
        Term shape = [&] {
            try {
                return parse_tree(parts[0]);
            } catch (const domain_error &e) {
                fail_line(lineno, e.what());
            }
        }();
        int arity = 0;
        for (const auto &v : shape.variables())
            if (v.size() > 1 && v[0] == '$')
                arity = std::max(arity, std::atoi(v.substr(1).c_str()));
        return CombTermShaped{shape, parse_beta(parts[1], monoid, dollar_slots(arity), lineno)};
    }
    fail_line(lineno, "unknown combinator '" + s + "'");
}

std::string weight_text(const Monoid &m, const Weight &w) { return m.format(w); }

std::string beta_text(const Monoid &m, const Beta &beta, const std::vector<std::string> &slot_names) {
    std::string out;
    for (std::size_t i = 0; i < beta.monomials.size(); ++i) {
        const auto &mono = beta.monomials[i];
        if (i)
            out += " + ";
        std::vector<std::string> factors;
        if (mono.coeff)
            factors.push_back(weight_text(m, *mono.coeff));
        for (int s : mono.slots)
            factors.push_back(slot_names.at(static_cast<std::size_t>(s)));
        if (factors.empty())
            factors.push_back("1");
        for (std::size_t j = 0; j < factors.size(); ++j)
            out += (j ? "*" : "") + factors[j];
    }
    return out.empty() ? "0" : out;
}

std::string combinator_text(const Monoid &m, const Combinator &c) {
    return std::visit(
        [&](const auto &comb) -> std::string {
            using T = std::decay_t<decltype(comb)>;
            if constexpr (std::is_same_v<T, CombConstZero>)
                return "zero";
            else if constexpr (std::is_same_v<T, CombNormalizeTo>)
                return "normalize-to(" + weight_text(m, comb.total) + ")";
            else if constexpr (std::is_same_v<T, CombPointwiseSum>)
                return "sum";
            else if constexpr (std::is_same_v<T, CombWeightedSum>) {
                std::string out = "weighted-sum(";
                for (std::size_t i = 0; i < comb.coeffs.size(); ++i)
                    out += (i ? ", " : "") + weight_text(m, comb.coeffs[i]);
                return out + ")";
            } else if constexpr (std::is_same_v<T, CombRateLaw>) {
                std::string comb_name = comb.combiner == CombRateLaw::Combiner::Min ? "min"
                                        : comb.combiner == CombRateLaw::Combiner::Product ? "product"
                                                                                          : "sum";
                return "rate-law(" + comb.term_op + ", " + comb_name + ")";
            } else if constexpr (std::is_same_v<T, CombIdentity>)
                return "identity";
            else if constexpr (std::is_same_v<T, CombUnion>)
                return "union";
            else {
                static_assert(std::is_same_v<T, CombTermShaped>);
                std::vector<std::string> slots;
                for (int i = 0; i < combinator_arity(Combinator{comb}); ++i)
                    slots.push_back("$" + std::to_string(i + 1));
                return "term(" + comb.shape.to_string() + "; " + beta_text(m, comb.beta, slots) + ")";
            }
        },
        c);
}

// Resolves leaf names of a lenient parse against a signature: nullary
// operator names become constants; unknown leaves stay variables (process,
// selection or distribution variables, resolved later by the validators).
Term resolve_process(const Term &raw, const Signature &sig, int lineno) {
    if (raw.is_var()) {
        if (sig.has(raw.head())) {
            if (sig.arity(raw.head()) != 0)
                fail_line(lineno, "operator '" + raw.head() + "' used without arguments");
            return Term::op(raw.head());
        }
        return raw;
    }
    if (!sig.has(raw.head()))
        fail_line(lineno, "unknown operator '" + raw.head() + "'");
    if (sig.arity(raw.head()) != static_cast<int>(raw.children().size()))
        fail_line(lineno, "operator '" + raw.head() + "' expects " +
                              std::to_string(sig.arity(raw.head())) + " arguments");
    std::vector<Term> children;
    for (const auto &child : raw.children())
        children.push_back(resolve_process(child, sig, lineno));
    return Term::op(raw.head(), std::move(children));
}

// Theta terms in rule targets: names are classified against the weight
// signature and the rule's weight-function variables.
ThetaTerm classify_theta(const Term &raw, const Specification &spec, const std::set<std::string> &phis,
                         int lineno) {
    if (raw.is_var() && phis.count(raw.head()))
        return ThetaTerm::phi(raw.head());
    if (spec.weight_sig.has(raw.head())) {
        if (spec.weight_sig.arity(raw.head()) != static_cast<int>(raw.children().size()))
            fail_line(lineno, "weight operator '" + raw.head() + "' arity mismatch");
        std::vector<ThetaTerm> args;
        for (const auto &child : raw.children())
            args.push_back(classify_theta(child, spec, phis, lineno));
        return ThetaTerm::op(raw.head(), std::move(args));
    }
    // Anything else is a process-term leaf.
    auto check = [&](const Term &t, const auto &self) -> void {
        if (t.is_var()) {
            if (phis.count(t.head()))
                fail_line(lineno, "weight function variable '" + t.head() + "' inside a process term");
            return;
        }
        if (spec.weight_sig.has(t.head()))
            fail_line(lineno, "weight operator '" + t.head() + "' inside a process term");
        for (const auto &child : t.children())
            self(child, self);
    };
    check(raw, check);
    return ThetaTerm::process(resolve_process(raw, spec.process_sig, lineno));
}

// Lenient tree parse with line-tagged errors.
Term parse_raw_tree(const std::string &text, int lineno) {
    try {
        return parse_tree(text);
    } catch (const domain_error &e) {
        fail_line(lineno, e.what());
    }
}

struct RuleHead {
    std::string op;
    std::vector<std::string> args;
    Label label;
    std::string rest;  // text after "]->"
};

RuleHead parse_rule_head(const std::string &body, int lineno) {
    auto arrow = body.find("-[");
    if (arrow == std::string::npos)
        fail_line(lineno, "expected '-[label]->' in the rule");
    auto close = body.find("]->", arrow);
    if (close == std::string::npos)
        fail_line(lineno, "expected '-[label]->' in the rule");
    RuleHead head;
    head.label = trim(body.substr(arrow + 2, close - arrow - 2));
    head.rest = trim(body.substr(close + 3));
    Term source = parse_raw_tree(trim(body.substr(0, arrow)), lineno);
    if (source.is_var()) {
        head.op = source.head();
    } else {
        head.op = source.head();
        for (const auto &child : source.children()) {
            if (!child.is_var())
                fail_line(lineno, "rule source arguments must be variables");
            head.args.push_back(child.head());
        }
    }
    return head;
}

}  // namespace

Specification parse_spec_file(const std::string &text) {
    Specification spec;
    bool have_monoid = false;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = trim(strip_comment(line));
        if (body.empty())
            continue;
        auto space = body.find_first_of(" \t");
        std::string keyword = space == std::string::npos ? body : body.substr(0, space);
        std::string rest = space == std::string::npos ? "" : trim(body.substr(space + 1));

        if (keyword == "monoid") {
            if (have_monoid)
                fail_line(lineno, "duplicate monoid declaration");
            spec.monoid = parse_monoid_decl(rest, lineno);
            have_monoid = true;
        } else if (keyword == "labels") {
            for (const auto &l : words(rest))
                spec.labels.insert(l);
        } else if (keyword == "sig" || keyword == "wsig") {
            for (const auto &decl : words(rest)) {
                auto slash = decl.rfind('/');
                if (slash == std::string::npos)
                    fail_line(lineno, "expected 'name/arity' in the signature");
                std::string name = decl.substr(0, slash);
                int arity = std::atoi(decl.substr(slash + 1).c_str());
                try {
                    (keyword == "sig" ? spec.process_sig : spec.weight_sig).declare(name, arity);
                } catch (const domain_error &e) {
                    fail_line(lineno, e.what());
                }
            }
        } else if (keyword == "interp") {
            if (!have_monoid)
                fail_line(lineno, "interp before the monoid declaration");
            auto eq = rest.find('=');
            if (eq == std::string::npos)
                fail_line(lineno, "expected 'interp op = combinator'");
            std::string op = trim(rest.substr(0, eq));
            std::string comb = trim(rest.substr(eq + 1));
            if (op == "leaf") {
                if (comb.rfind("point-mass(", 0) != 0 || comb.back() != ')')
                    fail_line(lineno, "the leaf rule must be point-mass(weight)");
                spec.interp.leaf_point_mass =
                    parse_weight_in(spec.monoid, comb.substr(11, comb.size() - 12), lineno);
            } else {
                if (!spec.interp.ops.emplace(op, parse_combinator(comb, spec.monoid, lineno)).second)
                    fail_line(lineno, "duplicate interpretation for '" + op + "'");
            }
        } else if (keyword == "rule") {
            if (!have_monoid)
                fail_line(lineno, "rule before the monoid declaration");
            std::string decl = rest;
            Rule rule;
            // Optional "name:" prefix (no premise syntax contains ':').
            auto colon = decl.find(':');
            auto arrow = decl.find("-[");
            if (colon != std::string::npos && (arrow == std::string::npos || colon < arrow)) {
                rule.name = trim(decl.substr(0, colon));
                decl = trim(decl.substr(colon + 1));
            }
            std::string head_part = decl;
            std::string premise_part;
            if (auto when = decl.find(" when "); when != std::string::npos) {
                head_part = trim(decl.substr(0, when));
                premise_part = trim(decl.substr(when + 6));
            }
            RuleHead head = parse_rule_head(head_part, lineno);
            rule.source_op = head.op;
            rule.arg_vars = head.args;
            rule.conclusion = head.label;
            if (rule.name.empty())
                rule.name = head.op + "/" + head.label + "." + std::to_string(spec.rules.size() + 1);

            std::map<std::string, int> arg_index;
            for (std::size_t i = 0; i < head.args.size(); ++i)
                arg_index[head.args[i]] = static_cast<int>(i);
            std::set<std::string> phis;

            if (!premise_part.empty())
                for (const auto &premise : split_top_level(premise_part, ',')) {
                    if (premise.empty())
                        fail_line(lineno, "empty premise");
                    if (premise.rfind("total(", 0) == 0) {
                        auto close = premise.find(')');
                        auto eq = premise.find('=', close);
                        if (close == std::string::npos || eq == std::string::npos)
                            fail_line(lineno, "expected total(phi) = weight");
                        rule.totals.push_back({trim(premise.substr(6, close - 6)),
                                               parse_weight_in(spec.monoid, premise.substr(eq + 1), lineno)});
                        continue;
                    }
                    if (premise.rfind("club(", 0) == 0) {
                        auto close = premise.rfind(')');
                        std::string inner = premise.substr(5, close - 5);
                        auto comma = split_top_level(inner, ',');
                        if (comma.size() != 2)
                            fail_line(lineno, "expected club(phi, club) ∋ y");
                        std::string tail = trim(premise.substr(close + 1));
                        std::string yvar;
                        if (tail.rfind("∋", 0) == 0)
                            yvar = trim(tail.substr(std::string("∋").size()));
                        else if (tail.rfind("in ", 0) == 0)
                            yvar = trim(tail.substr(3));
                        else
                            fail_line(lineno, "expected '∋ y' (or 'in y') after the club");
                        rule.clubs.push_back(
                            {comma[0], parse_club(comma[1], spec.monoid, lineno), yvar});
                        continue;
                    }
                    if (auto neg = premise.find("-/["); neg != std::string::npos) {
                        auto close = premise.find(']', neg);
                        if (close == std::string::npos)
                            fail_line(lineno, "expected 'x -/[label]'");
                        std::string var = trim(premise.substr(0, neg));
                        if (!arg_index.count(var))
                            fail_line(lineno, "negative premise on unknown variable '" + var + "'");
                        rule.negatives.push_back({arg_index[var], trim(premise.substr(neg + 3, close - neg - 3))});
                        continue;
                    }
                    if (auto pos = premise.find("-["); pos != std::string::npos) {
                        auto close = premise.find("]->", pos);
                        if (close == std::string::npos)
                            fail_line(lineno, "expected 'x -[label]-> phi'");
                        std::string var = trim(premise.substr(0, pos));
                        if (!arg_index.count(var))
                            fail_line(lineno, "positive premise on unknown variable '" + var + "'");
                        std::string phi = trim(premise.substr(close + 3));
                        rule.positives.push_back(
                            {arg_index[var], trim(premise.substr(pos + 2, close - pos - 2)), phi});
                        phis.insert(phi);
                        continue;
                    }
                    fail_line(lineno, "unrecognised premise '" + premise + "'");
                }

            rule.target = classify_theta(parse_raw_tree(head.rest, lineno), spec, phis, lineno);
            spec.rules.push_back(std::move(rule));
        } else {
            fail_line(lineno, "unknown keyword '" + keyword + "'");
        }
    }
    if (!have_monoid)
        throw parse_error("specification file has no monoid declaration");
    return spec;
}

std::string serialize_specification(const Specification &spec) {
    std::ostringstream out;
    const Monoid &m = *spec.monoid;
    if (m.is_finite_table()) {
        out << "monoid table { elems:";
        for (const auto &name : m.carrier_names())
            out << " " << name;
        out << "; unit: " << m.format(m.zero()) << "; add:";
        for (std::uint32_t i = 0; i < m.table_size(); ++i)
            for (std::uint32_t j = i; j < m.table_size(); ++j) {
                if (m.is_zero(Weight::table(i)) || m.is_zero(Weight::table(j)))
                    continue;
                out << " (" << m.carrier_names()[i] << " " << m.carrier_names()[j] << " -> "
                    << m.format(m.table_sum(i, j)) << ")";
            }
        out << " }\n";
    } else {
        out << "monoid " << m.kind_name() << "\n";
    }
    out << "labels";
    for (const auto &l : spec.labels)
        out << " " << l;
    out << "\nsig";
    for (const auto &[name, arity] : spec.process_sig.operators())
        out << " " << name << "/" << arity;
    out << "\nwsig";
    for (const auto &[name, arity] : spec.weight_sig.operators())
        out << " " << name << "/" << arity;
    out << "\n";
    if (spec.interp.leaf_point_mass)
        out << "interp leaf = point-mass(" << m.format(*spec.interp.leaf_point_mass) << ")\n";
    for (const auto &[name, comb] : spec.interp.ops)
        out << "interp " << name << " = " << combinator_text(m, comb) << "\n";
    for (const auto &rule : spec.rules) {
        out << "rule " << rule.name << ": " << rule.source_op;
        if (!rule.arg_vars.empty()) {
            out << "(";
            for (std::size_t i = 0; i < rule.arg_vars.size(); ++i)
                out << (i ? "," : "") << rule.arg_vars[i];
            out << ")";
        }
        out << " -[" << rule.conclusion << "]-> " << rule.target.to_string();
        std::vector<std::string> premises;
        for (const auto &p : rule.positives)
            premises.push_back(rule.arg_vars.at(p.arg) + " -[" + p.label + "]-> " + p.phi);
        for (const auto &n : rule.negatives)
            premises.push_back(rule.arg_vars.at(n.arg) + " -/[" + n.label + "]");
        for (const auto &t : rule.totals)
            premises.push_back("total(" + t.phi + ") = " + m.format(t.total));
        for (const auto &c : rule.clubs)
            premises.push_back("club(" + c.phi + ", " + club_text(m, c.club) + ") ∋ " + c.yvar);
        for (std::size_t i = 0; i < premises.size(); ++i)
            out << (i ? ", " : " when ") << premises[i];
        out << "\n";
    }
    return out.str();
}

MonoidRef parse_monoid_file(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = trim(strip_comment(line));
        if (body.empty())
            continue;
        if (body.rfind("monoid", 0) == 0)
            return parse_monoid_decl(trim(body.substr(6)), lineno);
        fail_line(lineno, "expected a 'monoid ...' declaration");
    }
    throw parse_error("no monoid declaration found");
}

SgsosFile parse_sgsos_file(const std::string &text) {
    SgsosFile out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = trim(strip_comment(line));
        if (body.empty())
            continue;
        auto space = body.find_first_of(" \t");
        std::string keyword = space == std::string::npos ? body : body.substr(0, space);
        std::string rest = space == std::string::npos ? "" : trim(body.substr(space + 1));
        if (keyword == "labels") {
            for (const auto &l : words(rest))
                out.labels.insert(l);
        } else if (keyword == "sig") {
            for (const auto &decl : words(rest)) {
                auto slash = decl.rfind('/');
                if (slash == std::string::npos)
                    fail_line(lineno, "expected 'name/arity'");
                out.process_sig.declare(decl.substr(0, slash), std::atoi(decl.substr(slash + 1).c_str()));
            }
        } else if (keyword == "rule") {
            translations::SegalaRule rule;
            rule.name = "r" + std::to_string(out.rules.size() + 1);
            std::string head_part = rest;
            std::string premise_part;
            if (auto when = rest.find(" when "); when != std::string::npos) {
                head_part = trim(rest.substr(0, when));
                premise_part = trim(rest.substr(when + 6));
            }
            RuleHead head = parse_rule_head(head_part, lineno);
            rule.source_op = head.op;
            rule.arg_vars = head.args;
            rule.conclusion = head.label;

            std::map<std::string, int> arg_index;
            for (std::size_t i = 0; i < head.args.size(); ++i)
                arg_index[head.args[i]] = static_cast<int>(i);

            for (const auto &target : split_top_level(head.rest, '+')) {
                auto star = target.find('*');
                if (star == std::string::npos)
                    fail_line(lineno, "expected 'w * term' in the target combination");
                Weight w = parse_weight_in(Monoid::nonneg_rational_plus(), target.substr(0, star), lineno);
                Term raw = parse_raw_tree(trim(target.substr(star + 1)), lineno);
                rule.targets.push_back({w.as_number(), resolve_process(raw, out.process_sig, lineno)});
            }
            if (!premise_part.empty())
                for (const auto &premise : split_top_level(premise_part, ',')) {
                    if (auto sel = premise.find("=>"); sel != std::string::npos) {
                        rule.selections.push_back(
                            {trim(premise.substr(0, sel)), trim(premise.substr(sel + 2))});
                        continue;
                    }
                    if (auto neg = premise.find("-/["); neg != std::string::npos) {
                        auto close = premise.find(']', neg);
                        std::string var = trim(premise.substr(0, neg));
                        if (close == std::string::npos || !arg_index.count(var))
                            fail_line(lineno, "bad negative premise");
                        rule.negatives.push_back({arg_index[var], trim(premise.substr(neg + 3, close - neg - 3))});
                        continue;
                    }
                    if (auto pos = premise.find("-["); pos != std::string::npos) {
                        auto close = premise.find("]->", pos);
                        std::string var = trim(premise.substr(0, pos));
                        if (close == std::string::npos || !arg_index.count(var))
                            fail_line(lineno, "bad positive premise");
                        rule.positives.push_back({arg_index[var], trim(premise.substr(pos + 2, close - pos - 2)),
                                                  trim(premise.substr(close + 3))});
                        continue;
                    }
                    fail_line(lineno, "unrecognised premise '" + premise + "'");
                }
            out.rules.push_back(std::move(rule));
        } else {
            fail_line(lineno, "unknown keyword '" + keyword + "'");
        }
    }
    return out;
}

WgsosFile parse_wgsos_file(const std::string &text) {
    WgsosFile out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = trim(strip_comment(line));
        if (body.empty())
            continue;
        auto space = body.find_first_of(" \t");
        std::string keyword = space == std::string::npos ? body : body.substr(0, space);
        std::string rest = space == std::string::npos ? "" : trim(body.substr(space + 1));
        if (keyword == "monoid") {
            out.monoid = parse_monoid_decl(rest, lineno);
        } else if (keyword == "labels") {
            for (const auto &l : words(rest))
                out.labels.insert(l);
        } else if (keyword == "sig") {
            for (const auto &decl : words(rest)) {
                auto slash = decl.rfind('/');
                if (slash == std::string::npos)
                    fail_line(lineno, "expected 'name/arity'");
                out.process_sig.declare(decl.substr(0, slash), std::atoi(decl.substr(slash + 1).c_str()));
            }
        } else if (keyword == "rule") {
            if (!out.monoid)
                fail_line(lineno, "rule before the monoid declaration");
            translations::WgsosRule rule;
            rule.name = "r" + std::to_string(out.rules.size() + 1);
            std::string head_part = rest;
            std::string premise_part;
            if (auto when = rest.find(" when "); when != std::string::npos) {
                head_part = trim(rest.substr(0, when));
                premise_part = trim(rest.substr(when + 6));
            }
            // Conclusion carries the combination: -[label : beta]->
            RuleHead head = parse_rule_head(head_part, lineno);
            rule.source_op = head.op;
            rule.arg_vars = head.args;
            std::string beta_text;
            if (auto colon = head.label.find(':'); colon != std::string::npos) {
                beta_text = trim(head.label.substr(colon + 1));
                rule.conclusion = trim(head.label.substr(0, colon));
            } else {
                rule.conclusion = head.label;
            }
            rule.target = resolve_process(parse_raw_tree(head.rest, lineno), out.process_sig, lineno);

            std::map<std::string, int> arg_index;
            for (std::size_t i = 0; i < head.args.size(); ++i)
                arg_index[head.args[i]] = static_cast<int>(i);

            std::map<std::string, int> uvar_slots;
            if (!premise_part.empty())
                for (const auto &premise : split_top_level(premise_part, ',')) {
                    if (premise.rfind("total(", 0) == 0) {
                        auto close = premise.find(')');
                        auto eq = premise.find('=', close);
                        if (close == std::string::npos || eq == std::string::npos)
                            fail_line(lineno, "expected total(x, label) = weight");
                        auto inner = split_top_level(premise.substr(6, close - 6), ',');
                        if (inner.size() != 2 || !arg_index.count(inner[0]))
                            fail_line(lineno, "expected total(x, label) = weight");
                        rule.weight_premises.push_back(
                            {arg_index[inner[0]], inner[1],
                             parse_weight_in(out.monoid, premise.substr(eq + 1), lineno)});
                        continue;
                    }
                    if (auto pos = premise.find("-["); pos != std::string::npos) {
                        auto close = premise.find("]->", pos);
                        std::string var = trim(premise.substr(0, pos));
                        if (close == std::string::npos || !arg_index.count(var))
                            fail_line(lineno, "bad transition premise");
                        auto inner = split_top_level(premise.substr(pos + 2, close - pos - 2), ',');
                        if (inner.size() != 2)
                            fail_line(lineno, "expected 'x -[label, u]-> y'");
                        uvar_slots.emplace(inner[1], static_cast<int>(rule.trans_premises.size()));
                        rule.trans_premises.push_back(
                            {arg_index[var], inner[0], inner[1], trim(premise.substr(close + 3))});
                        continue;
                    }
                    fail_line(lineno, "unrecognised premise '" + premise + "'");
                }
            if (beta_text.empty())
                fail_line(lineno, "rule conclusion needs '-[label : combination]->'");
            rule.beta = parse_beta(beta_text, out.monoid, uvar_slots, lineno);
            out.rules.push_back(std::move(rule));
        } else {
            fail_line(lineno, "unknown keyword '" + keyword + "'");
        }
    }
    if (!out.monoid)
        throw parse_error("wgsos file has no monoid declaration");
    return out;
}

std::string ultras_text(const Ultras &u) { return u.to_text(); }

std::string ultras_json(const Ultras &u) {
    nlohmann::json j;
    j["monoid"] = u.monoid()->kind_name();
    j["labels"] = u.labels();
    j["states"] = u.states();
    j["boundary"] = u.boundary();
    nlohmann::json trans(nlohmann::json::value_t::object);
    for (const auto &[key, fns] : u.all_transitions()) {
        if (fns.empty())
            continue;
        nlohmann::json list = nlohmann::json::array();
        for (const auto &fn : fns) {
            nlohmann::json entry(nlohmann::json::value_t::object);
            for (const auto &[target, w] : fn.entries())
                entry[target] = u.monoid()->format(w);
            list.push_back(std::move(entry));
        }
        trans[key.first][key.second] = std::move(list);
    }
    j["trans"] = std::move(trans);
    return j.dump(2) + "\n";
}

std::string ultras_dot(const Ultras &u) {
    std::ostringstream out;
    out << "digraph ultras {\n";
    for (const auto &state : u.states())
        out << "  \"" << state << "\";\n";
    for (const auto &state : u.boundary())
        out << "  \"" << state << "\" [style=dashed];\n";
    for (const auto &[key, fns] : u.all_transitions()) {
        int idx = 0;
        for (const auto &fn : fns) {
            std::string suffix = fns.size() > 1 ? "#" + std::to_string(idx) : "";
            if (fn.empty())
                out << "  \"" << key.first << "\" -> \"" << key.first << "\" [label=\"" << key.second
                    << suffix << ": 0\", style=dotted];\n";
            for (const auto &[target, w] : fn.entries())
                out << "  \"" << key.first << "\" -> \"" << target << "\" [label=\"" << key.second << suffix
                    << ": " << u.monoid()->format(w) << "\"];\n";
            ++idx;
        }
    }
    out << "}\n";
    return out.str();
}

std::string club_text(const Monoid &m, const Club &c) {
    switch (c.kind()) {
    case Club::Kind::Empty:
        return "empty";
    case Club::Kind::AllNonzero:
        return "nonzero";
    case Club::Kind::Subset:
        return m.format_club(c);
    }
    return "?";
}

}  // namespace ultras
