#include "ultras/pepa.hpp"

#include <algorithm>
#include <sstream>

namespace ultras {
namespace pepa {

namespace {

std::string rate_string(const mpq_class &r) {
    if (r.get_den() == 1)
        return r.get_num().get_str();
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::string label_set_string(const std::set<Label> &ls) {
    std::string out;
    bool first = true;
    for (const auto &l : ls) {
        out += (first ? "" : ",") + l;
        first = false;
    }
    return out;
}

}  // namespace

PepaTerm PepaTerm::nil() {
    return PepaTerm(std::make_shared<const Node>(Node{Kind::Nil, "", 0, {}, {}}));
}

PepaTerm PepaTerm::prefix(Label action, mpq_class rate, PepaTerm body) {
    if (action.empty())
        throw domain_error("prefix needs an action label");
    rate.canonicalize();
    if (rate <= 0)
        throw domain_error("prefix rate must be strictly positive");
    return PepaTerm(std::make_shared<const Node>(
        Node{Kind::Prefix, std::move(action), std::move(rate), {}, {std::move(body)}}));
}

PepaTerm PepaTerm::choice(PepaTerm left, PepaTerm right) {
    return PepaTerm(std::make_shared<const Node>(
        Node{Kind::Choice, "", 0, {}, {std::move(left), std::move(right)}}));
}

PepaTerm PepaTerm::coop(PepaTerm left, std::set<Label> sync, PepaTerm right) {
    if (sync.count(kTau))
        throw domain_error("tau is not allowed in cooperation sets");
    return PepaTerm(std::make_shared<const Node>(
        Node{Kind::Coop, "", 0, std::move(sync), {std::move(left), std::move(right)}}));
}

PepaTerm PepaTerm::hide(PepaTerm body, std::set<Label> hidden) {
    return PepaTerm(std::make_shared<const Node>(
        Node{Kind::Hide, "", 0, std::move(hidden), {std::move(body)}}));
}

std::string PepaTerm::to_string() const {
    switch (kind()) {
    case Kind::Nil:
        return "nil";
    case Kind::Prefix:
        return "(" + action() + "," + rate_string(rate()) + ")." + body().to_string_paren();
    case Kind::Choice:
        return left().to_string() + " + " + right().to_string();
    case Kind::Coop:
        return left().to_string_paren() + " <" + label_set_string(label_set()) + "> " +
               right().to_string_paren();
    case Kind::Hide:
        return body().to_string_paren() + " \\ {" + label_set_string(label_set()) + "}";
    }
    return "?";
}

std::string PepaTerm::to_string_paren() const {
    if (kind() == Kind::Nil || kind() == Kind::Prefix)
        return to_string();
    return "(" + to_string() + ")";
}

std::set<Label> PepaTerm::labels() const {
    std::set<Label> out;
    if (kind() == Kind::Prefix)
        out.insert(action());
    for (const auto &ls : {node_->labelset})
        out.insert(ls.begin(), ls.end());
    for (const auto &child : node_->children) {
        auto sub = child.labels();
        out.insert(sub.begin(), sub.end());
    }
    return out;
}

std::set<mpq_class> PepaTerm::rates() const {
    std::set<mpq_class> out;
    if (kind() == Kind::Prefix)
        out.insert(rate());
    for (const auto &child : node_->children) {
        auto sub = child.rates();
        out.insert(sub.begin(), sub.end());
    }
    return out;
}

std::set<std::set<Label>> PepaTerm::coop_sets() const {
    std::set<std::set<Label>> out;
    if (kind() == Kind::Coop)
        out.insert(label_set());
    for (const auto &child : node_->children) {
        auto sub = child.coop_sets();
        out.insert(sub.begin(), sub.end());
    }
    return out;
}

std::set<std::set<Label>> PepaTerm::hide_sets() const {
    std::set<std::set<Label>> out;
    if (kind() == Kind::Hide)
        out.insert(label_set());
    for (const auto &child : node_->children) {
        auto sub = child.hide_sets();
        out.insert(sub.begin(), sub.end());
    }
    return out;
}

namespace {

struct PepaParser {
    const std::string &text;
    const std::map<std::string, PepaTerm> &defs;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
    }

    [[noreturn]] void fail(const std::string &msg) const {
        throw parse_error("pepa syntax error at offset " + std::to_string(pos) + ": " + msg);
    }

    bool eat(char ch) {
        skip_ws();
        if (pos < text.size() && text[pos] == ch) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() &&
               (isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        if (pos == start)
            fail("expected an identifier");
        return text.substr(start, pos - start);
    }

    mpq_class rational() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() &&
               (isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '/'))
            ++pos;
        if (pos == start)
            fail("expected a rate");
        std::string lit = text.substr(start, pos - start);
        Weight w = parse_numeric_weight(lit);
        return w.as_number();
    }

    std::set<Label> label_list(char close) {
        std::set<Label> out;
        if (peek() == close) {
            ++pos;
            return out;
        }
        for (;;) {
            out.insert(ident());
            if (eat(','))
                continue;
            if (eat(close))
                return out;
            fail(std::string("expected ',' or '") + close + "'");
        }
    }

    PepaTerm parse_choice() {
        PepaTerm acc = parse_coop();
        while (peek() == '+') {
            ++pos;
            acc = PepaTerm::choice(acc, parse_coop());
        }
        return acc;
    }

    PepaTerm parse_coop() {
        PepaTerm acc = parse_hide();
        while (peek() == '<') {
            ++pos;
            std::set<Label> sync = label_list('>');
            acc = PepaTerm::coop(acc, std::move(sync), parse_hide());
        }
        return acc;
    }

    PepaTerm parse_hide() {
        PepaTerm acc = parse_primary();
        while (peek() == '\\') {
            ++pos;
            if (!eat('{'))
                fail("expected '{' after '\\'");
            acc = PepaTerm::hide(acc, label_list('}'));
        }
        return acc;
    }

    PepaTerm parse_primary() {
        skip_ws();
        if (eat('(')) {
            // Either "(a, r).P" or a parenthesised term; a comma after the
            // first identifier commits to the prefix form.
            std::size_t mark = pos;
            skip_ws();
            if (pos < text.size() && isalpha(static_cast<unsigned char>(text[pos]))) {
                std::string action = ident();
                if (eat(',')) {
                    mpq_class r = rational();
                    if (!eat(')'))
                        fail("expected ')' after the rate");
                    if (!eat('.'))
                        fail("expected '.' after the prefix");
                    return PepaTerm::prefix(action, r, parse_primary());
                }
            }
            pos = mark;
            PepaTerm inner = parse_choice();
            if (!eat(')'))
                fail("expected ')'");
            return inner;
        }
        std::string name = ident();
        if (name == "nil")
            return PepaTerm::nil();
        auto it = defs.find(name);
        if (it == defs.end())
            fail("unknown process name '" + name + "'");
        return it->second;
    }
};

}  // namespace

PepaTerm parse_pepa_term(const std::string &text, const std::map<std::string, PepaTerm> &definitions) {
    PepaParser p{text, definitions};
    try {
        PepaTerm t = p.parse_choice();
        p.skip_ws();
        if (p.pos != text.size())
            p.fail("trailing input");
        return t;
    } catch (const parse_error &) {
        throw;
    } catch (const domain_error &e) {
        throw parse_error(e.what());
    }
}

PepaFile parse_pepa_file(const std::string &text) {
    PepaFile out{{}, PepaTerm::nil()};
    std::optional<PepaTerm> main;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
        trimmed.erase(trimmed.find_last_not_of(" \t\r") + 1);
        if (trimmed.empty())
            continue;
        try {
            if (trimmed.rfind("main", 0) == 0 &&
                (trimmed.size() == 4 || isspace(static_cast<unsigned char>(trimmed[4])))) {
                main = parse_pepa_term(trimmed.substr(4), out.definitions);
                continue;
            }
            auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw parse_error("expected 'name = term' or 'main term'");
            std::string name = trimmed.substr(0, eq);
            name.erase(name.find_last_not_of(" \t") + 1);
            if (name.empty() || out.definitions.count(name))
                throw parse_error("bad or duplicate definition name '" + name + "'");
            out.definitions.emplace(name, parse_pepa_term(trimmed.substr(eq + 1), out.definitions));
        } catch (const domain_error &e) {
            throw parse_error("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!main)
        throw parse_error("pepa file has no 'main' directive");
    out.main = *main;
    return out;
}

mpq_class apparent_rate(const PepaTerm &p, const Label &action) {
    if (action == kTau)
        throw domain_error("apparent rate of tau is not defined");
    switch (p.kind()) {
    case PepaTerm::Kind::Nil:
        return 0;
    case PepaTerm::Kind::Prefix:
        return p.action() == action ? p.rate() : mpq_class(0);
    case PepaTerm::Kind::Choice:
        return apparent_rate(p.left(), action) + apparent_rate(p.right(), action);
    case PepaTerm::Kind::Coop: {
        mpq_class l = apparent_rate(p.left(), action);
        mpq_class r = apparent_rate(p.right(), action);
        return p.label_set().count(action) ? std::min(l, r) : l + r;
    }
    case PepaTerm::Kind::Hide:
        // Hidden actions are relabelled to tau, so their capacity is gone.
        return p.label_set().count(action) ? mpq_class(0) : apparent_rate(p.body(), action);
    }
    throw domain_error("unreachable");
}

std::vector<Derivation> classic_sos(const PepaTerm &p) {
    std::vector<Derivation> out;
    switch (p.kind()) {
    case PepaTerm::Kind::Nil:
        break;
    case PepaTerm::Kind::Prefix:
        out.push_back({p.action(), p.rate(), p.body()});
        break;
    case PepaTerm::Kind::Choice:
        for (const auto &side : {p.left(), p.right()})
            for (auto &d : classic_sos(side))
                out.push_back(d);
        break;
    case PepaTerm::Kind::Coop: {
        auto lhs = classic_sos(p.left());
        auto rhs = classic_sos(p.right());
        for (const auto &dl : lhs) {
            if (p.label_set().count(dl.action))
                continue;
            out.push_back({dl.action, dl.rate, PepaTerm::coop(dl.target, p.label_set(), p.right())});
        }
        for (const auto &dr : rhs) {
            if (p.label_set().count(dr.action))
                continue;
            out.push_back({dr.action, dr.rate, PepaTerm::coop(p.left(), p.label_set(), dr.target)});
        }
        for (const auto &dl : lhs)
            for (const auto &dr : rhs) {
                if (dl.action != dr.action || !p.label_set().count(dl.action))
                    continue;
                mpq_class ra1 = apparent_rate(p.left(), dl.action);
                mpq_class ra2 = apparent_rate(p.right(), dl.action);
                mpq_class rate = (dl.rate / ra1) * (dr.rate / ra2) * std::min(ra1, ra2);
                out.push_back({dl.action, rate, PepaTerm::coop(dl.target, p.label_set(), dr.target)});
            }
        break;
    }
    case PepaTerm::Kind::Hide:
        for (auto &d : classic_sos(p.body())) {
            if (p.label_set().count(d.action))
                out.push_back({kTau, d.rate, d.target});
            else
                out.push_back(d);
        }
        break;
    }
    return out;
}

Term to_sigma_term(const PepaTerm &p) {
    switch (p.kind()) {
    case PepaTerm::Kind::Nil:
        return Term::op("nil");
    case PepaTerm::Kind::Prefix:
        return Term::op("pre<" + p.action() + "," + rate_string(p.rate()) + ">", {to_sigma_term(p.body())});
    case PepaTerm::Kind::Choice:
        return Term::op("plus", {to_sigma_term(p.left()), to_sigma_term(p.right())});
    case PepaTerm::Kind::Coop:
        return Term::op("coop<" + label_set_string(p.label_set()) + ">",
                        {to_sigma_term(p.left()), to_sigma_term(p.right())});
    case PepaTerm::Kind::Hide:
        return Term::op("hide<" + label_set_string(p.label_set()) + ">", {to_sigma_term(p.body())});
    }
    throw domain_error("unreachable");
}

Specification pepa_wfgsos_spec(std::set<Label> labels, const std::set<mpq_class> &rates,
                               const std::set<std::set<Label>> &coop_sets,
                               const std::set<std::set<Label>> &hide_sets) {
    labels.insert(kTau);
    Specification spec;
    spec.monoid = Monoid::nonneg_rational_plus_infinity();
    spec.labels = labels;

    spec.process_sig.declare("nil", 0);
    spec.process_sig.declare("plus", 2);
    spec.weight_sig.declare("bot", 0);
    spec.weight_sig.declare("oplus", 2);
    spec.interp.ops.emplace("bot", CombConstZero{});
    spec.interp.ops.emplace("oplus", CombPointwiseSum{});
    spec.interp.leaf_point_mass = Weight::infinity();

    for (const auto &r : rates) {
        std::string dia = "diamond<" + rate_string(r) + ">";
        spec.weight_sig.declare(dia, 1);
        spec.interp.ops.emplace(dia, CombNormalizeTo{Weight::number(r)});
    }
    for (const auto &a : labels)
        for (const auto &r : rates)
            spec.process_sig.declare("pre<" + a + "," + rate_string(r) + ">", 1);
    for (const auto &ls : coop_sets) {
        std::string coop_op = "coop<" + label_set_string(ls) + ">";
        std::string par = "par<" + label_set_string(ls) + ">";
        spec.process_sig.declare(coop_op, 2);
        spec.weight_sig.declare(par, 2);
        spec.interp.ops.emplace(par, CombRateLaw{coop_op, CombRateLaw::Combiner::Min});
    }
    for (const auto &ls : hide_sets)
        spec.process_sig.declare("hide<" + label_set_string(ls) + ">", 1);

    auto phi = [](int i) { return "phi" + std::to_string(i); };

    // nil is terminal: a zero outcome on every label, never stuck.
    for (const auto &a : labels) {
        Rule r;
        r.name = "nil/" + a;
        r.source_op = "nil";
        r.conclusion = a;
        r.target = ThetaTerm::op("bot", {});
        spec.rules.push_back(std::move(r));
    }

    for (const auto &a : labels)
        for (const auto &rt : rates) {
            std::string op = "pre<" + a + "," + rate_string(rt) + ">";
            {
                Rule r;
                r.name = op + "/act";
                r.source_op = op;
                r.arg_vars = {"x1"};
                r.conclusion = a;
                r.target = ThetaTerm::op("diamond<" + rate_string(rt) + ">",
                                         {ThetaTerm::process(Term::var("x1"))});
                spec.rules.push_back(std::move(r));
            }
            for (const auto &b : labels) {
                if (b == a)
                    continue;
                Rule r;
                r.name = op + "/" + b;
                r.source_op = op;
                r.arg_vars = {"x1"};
                r.conclusion = b;
                r.target = ThetaTerm::op("bot", {});
                spec.rules.push_back(std::move(r));
            }
        }

    for (const auto &a : labels) {
        Rule r;
        r.name = "plus/" + a;
        r.source_op = "plus";
        r.arg_vars = {"x1", "x2"};
        r.conclusion = a;
        r.positives = {{0, a, phi(1)}, {1, a, phi(2)}};
        r.target = ThetaTerm::op("oplus", {ThetaTerm::phi(phi(1)), ThetaTerm::phi(phi(2))});
        spec.rules.push_back(std::move(r));
    }

    for (const auto &ls : coop_sets) {
        std::string coop_op = "coop<" + label_set_string(ls) + ">";
        std::string par = "par<" + label_set_string(ls) + ">";
        for (const auto &a : labels) {
            Rule r;
            r.name = coop_op + "/" + a;
            r.source_op = coop_op;
            r.arg_vars = {"x1", "x2"};
            r.conclusion = a;
            r.positives = {{0, a, phi(1)}, {1, a, phi(2)}};
            if (ls.count(a)) {
                r.target = ThetaTerm::op(par, {ThetaTerm::phi(phi(1)), ThetaTerm::phi(phi(2))});
            } else {
                r.target = ThetaTerm::op(
                    "oplus",
                    {ThetaTerm::op(par, {ThetaTerm::phi(phi(1)), ThetaTerm::process(Term::var("x2"))}),
                     ThetaTerm::op(par, {ThetaTerm::process(Term::var("x1")), ThetaTerm::phi(phi(2))})});
            }
            spec.rules.push_back(std::move(r));
        }
    }

    for (const auto &ls : hide_sets) {
        std::string hide_op = "hide<" + label_set_string(ls) + ">";
        for (const auto &a : labels) {
            if (a == kTau || ls.count(a))
                continue;
            Rule r;
            r.name = hide_op + "/" + a;
            r.source_op = hide_op;
            r.arg_vars = {"x1"};
            r.conclusion = a;
            r.positives = {{0, a, phi(1)}};
            r.target = ThetaTerm::phi(phi(1));
            spec.rules.push_back(std::move(r));
        }
        for (const auto &a : ls) {
            if (a == kTau)
                continue;
            Rule r;
            r.name = hide_op + "/" + a;
            r.source_op = hide_op;
            r.arg_vars = {"x1"};
            r.conclusion = a;
            r.target = ThetaTerm::op("bot", {});
            spec.rules.push_back(std::move(r));
        }
        // The tau row gathers the process's own tau moves (unless hidden
        // away) and every hidden label, summed into one outcome.
        std::set<Label> sources = ls;
        sources.insert(kTau);
        Rule r;
        r.name = hide_op + "/tau";
        r.source_op = hide_op;
        r.arg_vars = {"x1"};
        r.conclusion = kTau;
        std::optional<ThetaTerm> chain;
        for (const auto &a : sources) {
            std::string v = "phi_" + a;
            r.positives.push_back({0, a, v});
            ThetaTerm leaf = ThetaTerm::phi(v);
            chain = chain ? ThetaTerm::op("oplus", {*chain, leaf}) : leaf;
        }
        r.target = *chain;
        spec.rules.push_back(std::move(r));
    }
    return spec;
}

Specification spec_for_terms(const std::vector<PepaTerm> &terms) {
    std::set<Label> labels;
    std::set<mpq_class> rates;
    std::set<std::set<Label>> coops, hides;
    for (const auto &t : terms) {
        auto l = t.labels();
        labels.insert(l.begin(), l.end());
        auto r = t.rates();
        rates.insert(r.begin(), r.end());
        auto c = t.coop_sets();
        coops.insert(c.begin(), c.end());
        auto h = t.hide_sets();
        hides.insert(h.begin(), h.end());
    }
    return pepa_wfgsos_spec(labels, rates, coops, hides);
}

Ultras derive_ctmc(const PepaTerm &p, std::size_t budget) {
    Specification spec = spec_for_terms({p});
    Ultras u = induce(spec, {to_sigma_term(p)}, budget);
    for (const auto &[key, fns] : u.all_transitions())
        for (const auto &fn : fns)
            for (const auto &[target, w] : fn.entries())
                if (w.is_infinity())
                    throw domain_error("internal error: infinite rate in a derived system");
    return u;
}

Ultras classic_ctmc(const PepaTerm &p, const std::set<Label> &labels, std::size_t budget) {
    std::set<Label> all = labels;
    all.insert(kTau);
    Ultras u(Monoid::nonneg_rational_plus_infinity(), all);

    std::map<StateId, PepaTerm> term_of;
    std::set<StateId> discovered, explored;
    std::set<StateId> layer;
    StateId root = to_sigma_term(p).to_string();
    term_of.emplace(root, p);
    discovered.insert(root);
    layer.insert(root);
    while (!layer.empty()) {
        std::set<StateId> next;
        for (const auto &state : layer) {
            if (explored.size() >= budget)
                break;
            explored.insert(state);
            u.add_state(state);
            std::map<Label, std::map<StateId, Weight>> rows;
            for (const auto &a : all)
                rows[a];
            for (const auto &d : classic_sos(term_of.at(state))) {
                StateId target = to_sigma_term(d.target).to_string();
                auto [it, inserted] = rows[d.action].emplace(target, Weight::number(d.rate));
                if (!inserted)
                    it->second = Weight::number(it->second.as_number() + d.rate);
                if (!discovered.count(target)) {
                    discovered.insert(target);
                    term_of.emplace(target, d.target);
                    next.insert(target);
                }
            }
            for (const auto &[a, row] : rows)
                u.add_transition(state, a, WeightFunction(u.monoid(), row));
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

ProbeResult strong_equivalence(const PepaTerm &p, const PepaTerm &q, std::size_t budget) {
    Specification spec = spec_for_terms({p, q});
    Ultras up = induce(spec, {to_sigma_term(p)}, budget);
    Ultras uq = induce(spec, {to_sigma_term(q)}, budget);
    if (!up.boundary().empty() || !uq.boundary().empty())
        return ProbeResult::Inconclusive;
    Partition part = largest_bisimulation(up, uq);
    return part.same_block(TaggedState{0, to_sigma_term(p).to_string()},
                           TaggedState{1, to_sigma_term(q).to_string()})
               ? ProbeResult::Holds
               : ProbeResult::Fails;
}

}  // namespace pepa
}  // namespace ultras
