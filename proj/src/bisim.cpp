#include "ultras/bisim.hpp"

#include <algorithm>
#include <sstream>

namespace ultras {

namespace {

struct LiftContext {
    std::set<StateId> dom, cod;
    std::vector<ClosedPair> comps;

    explicit LiftContext(const Relation &r) : comps(closed_pairs(r)) {
        for (const auto &[x, y] : r) {
            dom.insert(x);
            cod.insert(y);
        }
    }

    bool lifted(const WeightFunction &phi, const WeightFunction &psi) const {
        // Support outside the relation is forced to weight zero by the
        // singleton closed pairs, so it simply fails.
        for (const auto &[state, w] : phi.entries())
            if (!dom.count(state))
                return false;
        for (const auto &[state, w] : psi.entries())
            if (!cod.count(state))
                return false;
        for (const auto &comp : comps)
            if (phi.restrict_weight(comp.left) != psi.restrict_weight(comp.right))
                return false;
        return true;
    }
};

}  // namespace

std::vector<ClosedPair> closed_pairs(const Relation &r) {
    std::map<StateId, std::vector<StateId>> left_adj, right_adj;
    for (const auto &[x, y] : r) {
        left_adj[x].push_back(y);
        right_adj[y].push_back(x);
    }
    std::set<StateId> seen_left;
    std::vector<ClosedPair> out;
    for (const auto &[x0, adj0] : left_adj) {
        if (seen_left.count(x0))
            continue;
        ClosedPair comp;
        std::vector<std::pair<int, StateId>> stack{{0, x0}};
        seen_left.insert(x0);
        std::set<StateId> seen_right;
        while (!stack.empty()) {
            auto [side, s] = stack.back();
            stack.pop_back();
            if (side == 0) {
                comp.left.insert(s);
                for (const auto &y : left_adj[s])
                    if (seen_right.insert(y).second)
                        stack.push_back({1, y});
            } else {
                comp.right.insert(s);
                for (const auto &x : right_adj[s])
                    if (seen_left.insert(x).second)
                        stack.push_back({0, x});
            }
        }
        out.push_back(std::move(comp));
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool lift_relation(const Relation &r, const WeightFunction &phi, const WeightFunction &psi) {
    return LiftContext(r).lifted(phi, psi);
}

bool is_bisimulation(const Ultras &u1, const Ultras &u2, const Relation &r) {
    if (!same_monoid(u1.monoid(), u2.monoid()) || u1.labels() != u2.labels())
        throw domain_error("is_bisimulation: monoid or label mismatch");
    for (const auto &[x, y] : r) {
        if (u1.boundary().count(x) || u2.boundary().count(y))
            throw domain_error("is_bisimulation: relation mentions an unexplored boundary state");
        if (!u1.states().count(x) || !u2.states().count(y))
            throw domain_error("is_bisimulation: relation mentions an unknown state");
    }
    LiftContext ctx(r);
    for (const auto &[x, y] : r)
        for (const auto &label : u1.labels()) {
            const auto &out1 = u1.transitions(x, label);
            const auto &out2 = u2.transitions(y, label);
            for (const auto &phi : out1) {
                bool matched = false;
                for (const auto &psi : out2)
                    if (ctx.lifted(phi, psi)) {
                        matched = true;
                        break;
                    }
                if (!matched)
                    return false;
            }
            for (const auto &psi : out2) {
                bool matched = false;
                for (const auto &phi : out1)
                    if (ctx.lifted(phi, psi)) {
                        matched = true;
                        break;
                    }
                if (!matched)
                    return false;
            }
        }
    return true;
}

Partition::Partition(std::vector<std::vector<TaggedState>> blocks) {
    for (auto &block : blocks) {
        if (block.empty())
            throw domain_error("partition block is empty");
        std::sort(block.begin(), block.end());
        block.erase(std::unique(block.begin(), block.end()), block.end());
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const auto &a, const auto &b) { return a.front() < b.front(); });
    blocks_ = std::move(blocks);
    for (std::size_t i = 0; i < blocks_.size(); ++i)
        for (const auto &state : blocks_[i])
            if (!index_.emplace(state, i).second)
                throw domain_error("partition blocks overlap at '" + state.id + "'");
}

std::size_t Partition::block_of(const TaggedState &state) const {
    auto it = index_.find(state);
    if (it == index_.end())
        throw domain_error("partition does not cover state '" + state.id + "'");
    return it->second;
}

bool Partition::same_block(const TaggedState &a, const TaggedState &b) const {
    return block_of(a) == block_of(b);
}

Relation Partition::cross_relation() const {
    Relation out;
    for (const auto &block : blocks_)
        for (const auto &a : block)
            for (const auto &b : block)
                if (a.side == 0 && b.side == 1)
                    out.emplace(a.id, b.id);
    return out;
}

Relation Partition::side_relation(int side) const {
    Relation out;
    for (const auto &block : blocks_)
        for (const auto &a : block)
            for (const auto &b : block)
                if (a.side == side && b.side == side)
                    out.emplace(a.id, b.id);
    return out;
}

std::string Partition::to_text() const {
    std::ostringstream out;
    bool two_sided = false;
    for (const auto &block : blocks_)
        for (const auto &state : block)
            two_sided |= state.side == 1;
    for (const auto &block : blocks_) {
        out << "{";
        for (std::size_t i = 0; i < block.size(); ++i) {
            if (i)
                out << ", ";
            if (two_sided)
                out << (block[i].side == 0 ? "left:" : "right:");
            out << block[i].id;
        }
        out << "}\n";
    }
    return out.str();
}

namespace {

// Class-sum projection of a function onto the current blocks: sorted
// (block, weight) entries, zeros dropped.
using Projection = std::vector<std::pair<std::size_t, Weight>>;
// Per label: the set of projections of the outgoing functions. A stuck
// pair keeps an empty set; a terminal outcome contributes the empty
// projection. The two stay distinct.
using Signature = std::map<Label, std::set<Projection>>;

Projection project(const WeightFunction &fn, int side, const std::map<TaggedState, std::size_t> &block_of) {
    std::map<std::size_t, Weight> sums;
    const Monoid &m = *fn.monoid();
    for (const auto &[target, w] : fn.entries()) {
        std::size_t b = block_of.at(TaggedState{side, target});
        auto [it, inserted] = sums.emplace(b, w);
        if (!inserted)
            it->second = m.add(it->second, w);
    }
    Projection out;
    for (const auto &[b, w] : sums)
        if (!m.is_zero(w))
            out.emplace_back(b, w);
    return out;
}

Partition refine(const std::vector<std::pair<int, const Ultras *>> &sides) {
    std::vector<TaggedState> universe;
    for (auto [side, u] : sides) {
        u->require_fully_explored("largest_bisimulation");
        u->validate();
        for (const auto &state : u->states())
            universe.push_back(TaggedState{side, state});
    }
    if (universe.empty())
        return Partition();

    std::map<TaggedState, std::size_t> block_of;
    for (const auto &state : universe)
        block_of[state] = 0;
    std::size_t block_count = 1;

    for (;;) {
        // Split every block by the signature of its members.
        std::map<std::pair<std::size_t, Signature>, std::vector<TaggedState>> groups;
        for (auto [side, u] : sides)
            for (const auto &state : u->states()) {
                Signature sig;
                for (const auto &label : u->labels()) {
                    auto &bucket = sig[label];
                    for (const auto &fn : u->transitions(state, label))
                        bucket.insert(project(fn, side, block_of));
                }
                groups[{block_of.at(TaggedState{side, state}), std::move(sig)}].push_back(
                    TaggedState{side, state});
            }
        if (groups.size() == block_count)
            break;
        block_count = groups.size();
        std::size_t next = 0;
        for (auto &[key, members] : groups) {
            for (const auto &state : members)
                block_of[state] = next;
            ++next;
        }
    }

    std::map<std::size_t, std::vector<TaggedState>> by_block;
    for (const auto &[state, b] : block_of)
        by_block[b].push_back(state);
    std::vector<std::vector<TaggedState>> blocks;
    for (auto &[b, members] : by_block)
        blocks.push_back(std::move(members));
    return Partition(std::move(blocks));
}

}  // namespace

Partition largest_bisimulation(const Ultras &u1, const Ultras &u2) {
    if (!same_monoid(u1.monoid(), u2.monoid()) || u1.labels() != u2.labels())
        throw domain_error("largest_bisimulation: monoid or label mismatch");
    return refine({{0, &u1}, {1, &u2}});
}

Partition largest_bisimulation(const Ultras &u) { return refine({{0, &u}}); }

StateId block_state_name(const std::vector<TaggedState> &block) {
    std::string out = "{";
    for (std::size_t i = 0; i < block.size(); ++i)
        out += (i ? "," : "") + block[i].id;
    return out + "}";
}

std::map<StateId, StateId> quotient_projection(const Ultras &u, const Partition &p) {
    std::map<StateId, StateId> kappa;
    for (const auto &state : u.states())
        kappa[state] = block_state_name(p.blocks().at(p.block_of(TaggedState{0, state})));
    return kappa;
}

Ultras quotient(const Ultras &u, const Partition &p) {
    u.require_fully_explored("quotient");
    for (const auto &block : p.blocks())
        for (const auto &state : block)
            if (state.side != 0 || !u.states().count(state.id))
                throw domain_error("quotient: partition mentions a state outside the system");
    auto kappa = quotient_projection(u, p);

    Ultras out(u.monoid(), u.labels());
    for (const auto &block : p.blocks()) {
        const StateId name = block_state_name(block);
        out.add_state(name);
        const StateId &rep = block.front().id;
        for (const auto &label : u.labels())
            for (const auto &fn : u.transitions(rep, label))
                out.add_transition(name, label, fn.pushforward(kappa));
    }
    if (!check_homomorphism(u, out, kappa))
        throw domain_error("quotient: partition is not stable");
    return out;
}

namespace {

// Exhaustive subset-closure check: every (C, D) with C, D drawn from the
// given universes and closed under the relation must balance the two
// weight functions. Used as the independent decision route on small
// instances.
bool closure_balanced(const Relation &r, const std::set<StateId> &dom, const std::set<StateId> &cod,
                      const WeightFunction &phi, const WeightFunction &psi) {
    std::vector<StateId> ls(dom.begin(), dom.end()), rs(cod.begin(), cod.end());
    for (const auto &[state, w] : phi.entries())
        if (!dom.count(state))
            ls.push_back(state);
    for (const auto &[state, w] : psi.entries())
        if (!cod.count(state))
            rs.push_back(state);
    for (std::uint64_t ml = 0; ml < (1ull << ls.size()); ++ml)
        for (std::uint64_t mr = 0; mr < (1ull << rs.size()); ++mr) {
            std::set<StateId> c, d;
            for (std::size_t i = 0; i < ls.size(); ++i)
                if (ml & (1ull << i))
                    c.insert(ls[i]);
            for (std::size_t i = 0; i < rs.size(); ++i)
                if (mr & (1ull << i))
                    d.insert(rs[i]);
            bool closed = true;
            for (const auto &[x, y] : r) {
                if (c.count(x) && !d.count(y))
                    closed = false;
                if (d.count(y) && !c.count(x))
                    closed = false;
                if (!closed)
                    break;
            }
            if (closed && phi.restrict_weight(c) != psi.restrict_weight(d))
                return false;
        }
    return true;
}

constexpr std::size_t kBruteForceLimit = 10;

bool small_enough(const Relation &r, const WeightFunction &phi, const WeightFunction &psi) {
    std::set<StateId> dom, cod;
    for (const auto &[x, y] : r) {
        dom.insert(x);
        cod.insert(y);
    }
    for (const auto &[s, w] : phi.entries())
        dom.insert(s);
    for (const auto &[s, w] : psi.entries())
        cod.insert(s);
    return dom.size() <= kBruteForceLimit && cod.size() <= kBruteForceLimit;
}

bool balanced(const Relation &r, const LiftContext &ctx, const WeightFunction &phi, const WeightFunction &psi) {
    if (small_enough(r, phi, psi))
        return closure_balanced(r, ctx.dom, ctx.cod, phi, psi);
    return ctx.lifted(phi, psi);
}

}  // namespace

bool weighted_bisim_check(const Wlts &w1, const Wlts &w2, const Relation &r) {
    if (!same_monoid(w1.monoid(), w2.monoid()) || w1.labels() != w2.labels())
        throw domain_error("weighted_bisim_check: monoid or label mismatch");
    LiftContext ctx(r);
    for (const auto &[x, y] : r)
        for (const auto &label : w1.labels())
            if (!balanced(r, ctx, w1.row(x, label), w2.row(y, label)))
                return false;
    return true;
}

bool segala_bisim_check(const Ultras &u1, const Ultras &u2, const Relation &r) {
    if (!u1.is_segala() || !u2.is_segala())
        throw domain_error("segala_bisim_check: inputs must carry probability distributions only");
    if (u1.labels() != u2.labels())
        throw domain_error("segala_bisim_check: label mismatch");
    LiftContext ctx(r);
    for (const auto &[x, y] : r)
        for (const auto &label : u1.labels()) {
            const auto &out1 = u1.transitions(x, label);
            const auto &out2 = u2.transitions(y, label);
            for (const auto &phi : out1) {
                bool matched = false;
                for (const auto &psi : out2)
                    if (balanced(r, ctx, phi, psi)) {
                        matched = true;
                        break;
                    }
                if (!matched)
                    return false;
            }
            for (const auto &psi : out2) {
                bool matched = false;
                for (const auto &phi : out1)
                    if (balanced(r, ctx, phi, psi)) {
                        matched = true;
                        break;
                    }
                if (!matched)
                    return false;
            }
        }
    return true;
}

namespace {

// The zero function always serializes to "[]".
std::string projection_key(const WeightFunction &fn, const std::vector<std::set<StateId>> &classes) {
    std::string out = "[";
    for (std::size_t i = 0; i < classes.size(); ++i) {
        Weight w = fn.restrict_weight(classes[i]);
        if (!fn.monoid()->is_zero(w))
            out += std::to_string(i) + ":" + fn.monoid()->format(w) + ";";
    }
    return out + "]";
}

constexpr const char *kZeroProjection = "[]";

std::string mvalue_key(const std::set<std::string> &classes) {
    std::string out = "{";
    for (const auto &c : classes)
        out += c + " ";
    return out + "}";
}

}  // namespace

std::string MFunction::class_set_key(const std::set<StateId> &class_set) {
    std::string out;
    for (const auto &s : class_set)
        out += s + ",";
    return out;
}

MFunction MFunction::derived(const Ultras &u, const Partition &p) {
    MFunction m;
    m.derived_ = true;
    for (const auto &block : p.blocks()) {
        std::set<StateId> cls;
        for (const auto &state : block)
            cls.insert(state.id);
        m.base_sets_.push_back(std::move(cls));
    }
    // Bottom is the singleton of the zero function's lifted class.
    m.bottom_ = mvalue_key({kZeroProjection});
    for (const auto &state : u.states())
        for (const auto &label : u.labels()) {
            auto &bucket = m.outgoing_[{state, label}];
            for (const auto &fn : u.transitions(state, label))
                bucket.emplace_back(fn, projection_key(fn, m.base_sets_));
        }
    return m;
}

MFunction MFunction::table(std::vector<std::set<StateId>> base_sets,
                           std::map<std::tuple<StateId, Label, std::string>, std::string> values,
                           std::string bottom) {
    MFunction m;
    m.base_sets_ = std::move(base_sets);
    m.values_ = std::move(values);
    m.bottom_ = std::move(bottom);
    return m;
}

std::string MFunction::value(const StateId &state, const Label &label, const std::set<StateId> &class_set) const {
    if (!derived_) {
        auto it = values_.find({state, label, class_set_key(class_set)});
        if (it == values_.end())
            throw domain_error("m-function table has no entry for the requested triple");
        return it->second;
    }
    auto it = outgoing_.find({state, label});
    std::set<std::string> classes;
    if (it != outgoing_.end())
        for (const auto &[fn, key] : it->second)
            if (!fn.monoid()->is_zero(fn.restrict_weight(class_set)))
                classes.insert(key);
    // The zero function's class is always included; for a stuck state the
    // value is exactly bottom.
    classes.insert(kZeroProjection);
    return mvalue_key(classes);
}

MFunction m_function_from_bisim(const Ultras &u, const Partition &p) {
    u.require_fully_explored("m_function_from_bisim");
    // Hypothesis: at most one kind of termination per label.
    for (const auto &label : u.labels()) {
        bool has_stuck = false, has_terminal = false;
        for (const auto &state : u.states()) {
            const auto &fns = u.transitions(state, label);
            if (fns.empty())
                has_stuck = true;
            for (const auto &fn : fns)
                if (fn.empty())
                    has_terminal = true;
        }
        if (has_stuck && has_terminal)
            throw domain_error("m_function_from_bisim: label '" + label +
                               "' mixes stuck and terminal states");
    }
    if (!is_bisimulation(u, u, p.side_relation(0)))
        throw domain_error("m_function_from_bisim: the given partition is not a bisimulation");
    return MFunction::derived(u, p);
}

bool validate_m_function(const MFunction &m, const Ultras &u) {
    const auto &base = m.base_sets();
    std::vector<std::set<StateId>> domain = base;
    for (std::size_t i = 0; i < base.size(); ++i)
        for (std::size_t j = i + 1; j < base.size(); ++j) {
            std::set<StateId> merged = base[i];
            merged.insert(base[j].begin(), base[j].end());
            domain.push_back(std::move(merged));
        }
    // Condition 1: bottom whenever the state is stuck or every outgoing
    // function restricts to zero on the class set.
    for (const auto &state : u.states())
        for (const auto &label : u.labels())
            for (const auto &cls : domain) {
                const auto &fns = u.transitions(state, label);
                bool all_zero = true;
                for (const auto &fn : fns)
                    if (!u.monoid()->is_zero(fn.restrict_weight(cls)))
                        all_zero = false;
                if ((fns.empty() || all_zero) && m.value(state, label, cls) != m.bottom())
                    return false;
            }
    // Condition 2: agreement on two class sets forces agreement on their
    // union.
    for (const auto &x : u.states())
        for (const auto &y : u.states())
            for (const auto &label : u.labels())
                for (std::size_t i = 0; i < base.size(); ++i)
                    for (std::size_t j = i + 1; j < base.size(); ++j) {
                        if (m.value(x, label, base[i]) != m.value(y, label, base[i]))
                            continue;
                        if (m.value(x, label, base[j]) != m.value(y, label, base[j]))
                            continue;
                        std::set<StateId> merged = base[i];
                        merged.insert(base[j].begin(), base[j].end());
                        if (m.value(x, label, merged) != m.value(y, label, merged))
                            return false;
                    }
    return true;
}

bool is_m_bisimulation(const MFunction &m, const Ultras &u, const Partition &p) {
    for (const auto &block : p.blocks())
        for (const auto &a : block)
            for (const auto &b : block)
                for (const auto &label : u.labels())
                    for (const auto &cls : m.base_sets())
                        if (m.value(a.id, label, cls) != m.value(b.id, label, cls))
                            return false;
    return true;
}

}  // namespace ultras
