#include "ultras/monoid.hpp"

#include <algorithm>
#include <tuple>

namespace ultras {

Weight parse_numeric_weight(const std::string &text) {
    if (text == "inf")
        return Weight::infinity();
    if (text == "tt")
        return Weight::boolean(true);
    if (text == "ff")
        return Weight::boolean(false);
    auto bad = [&] { throw domain_error("malformed weight literal '" + text + "'"); };
    std::string num = text, den = "1";
    if (auto slash = text.find('/'); slash != std::string::npos) {
        num = text.substr(0, slash);
        den = text.substr(slash + 1);
    }
    if (num.empty() || den.empty())
        bad();
    for (const std::string &part : {num, den})
        for (char ch : part)
            if (!isdigit(static_cast<unsigned char>(ch)))
                bad();
    mpz_class n(num), d(den);
    if (d == 0)
        bad();
    mpq_class q{n, d};
    q.canonicalize();
    return Weight::number(q);
}

bool Club::contains(const Monoid &m, const Weight &w) const {
    m.require_element(w, "club membership");
    switch (kind_) {
    case Kind::Empty:
        return false;
    case Kind::AllNonzero:
        return !m.is_zero(w);
    case Kind::Subset:
        return w.is_table() && elems_.count(w.table_index()) > 0;
    }
    return false;
}

namespace {

MonoidRef make_builtin(Monoid::Kind kind) {
    struct Access : Monoid {
        explicit Access(Kind k) : Monoid(k) {}
    };
    return std::make_shared<Access>(kind);
}

const MonoidRef &cached(Monoid::Kind kind) {
    static const MonoidRef instances[] = {
        nullptr,
        make_builtin(Monoid::Kind::BoolOr),
        make_builtin(Monoid::Kind::NatPlus),
        make_builtin(Monoid::Kind::NonnegRationalPlus),
        make_builtin(Monoid::Kind::NonnegRationalPlusInfinity),
        make_builtin(Monoid::Kind::NatMax),
    };
    return instances[static_cast<int>(kind)];
}

bool is_nat(const Weight &w) {
    return w.is_number() && w.as_number().get_den() == 1 && w.as_number() >= 0;
}

bool is_nonneg_rational(const Weight &w) { return w.is_number() && w.as_number() >= 0; }

}  // namespace

MonoidRef Monoid::bool_or() { return cached(Kind::BoolOr); }
MonoidRef Monoid::nat_plus() { return cached(Kind::NatPlus); }
MonoidRef Monoid::nonneg_rational_plus() { return cached(Kind::NonnegRationalPlus); }
MonoidRef Monoid::nonneg_rational_plus_infinity() { return cached(Kind::NonnegRationalPlusInfinity); }
MonoidRef Monoid::nat_max() { return cached(Kind::NatMax); }

MonoidRef Monoid::finite_table(std::vector<std::string> carrier, std::string unit,
                               const std::vector<std::tuple<std::string, std::string, std::string>> &sums) {
    struct Access : Monoid {
        Access() : Monoid(Kind::FiniteTable) {}
    };
    auto m = std::make_shared<Access>();
    if (carrier.empty())
        throw domain_error("finite-table monoid needs a non-empty carrier");
    if (carrier.size() > kMaxTableSize)
        throw domain_error("finite-table carrier exceeds " + std::to_string(kMaxTableSize) + " elements");
    std::set<std::string> seen;
    for (const auto &name : carrier)
        if (!seen.insert(name).second)
            throw domain_error("duplicate carrier element '" + name + "'");
    m->names_ = std::move(carrier);

    const std::size_t n = m->names_.size();
    auto index_of = [&](const std::string &name) -> std::uint32_t {
        auto it = std::find(m->names_.begin(), m->names_.end(), name);
        if (it == m->names_.end())
            throw domain_error("element '" + name + "' not in carrier");
        return static_cast<std::uint32_t>(it - m->names_.begin());
    };
    m->unit_ = index_of(unit);

    constexpr std::uint32_t kUnset = ~0u;
    m->table_.assign(n * n, kUnset);
    auto cell = [&](std::uint32_t a, std::uint32_t b) -> std::uint32_t & { return m->table_[a * n + b]; };
    // Unit rows are implied; explicit entries may not contradict them.
    for (std::uint32_t i = 0; i < n; ++i) {
        cell(m->unit_, i) = i;
        cell(i, m->unit_) = i;
    }
    for (const auto &[a, b, c] : sums) {
        std::uint32_t ia = index_of(a), ib = index_of(b), ic = index_of(c);
        for (auto [x, y] : {std::pair{ia, ib}, std::pair{ib, ia}}) {
            if (cell(x, y) != kUnset && cell(x, y) != ic)
                throw domain_error("conflicting sum for " + a + " + " + b);
            cell(x, y) = ic;
        }
    }
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            if (cell(i, j) == kUnset)
                throw domain_error("addition table incomplete: missing " + m->names_[i] + " + " + m->names_[j]);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) {
            if (cell(i, j) != cell(j, i))
                throw domain_error("addition not commutative at " + m->names_[i] + ", " + m->names_[j]);
            for (std::uint32_t k = 0; k < n; ++k)
                if (cell(cell(i, j), k) != cell(i, cell(j, k)))
                    throw domain_error("addition not associative at " + m->names_[i] + ", " + m->names_[j] + ", " +
                                       m->names_[k]);
        }
    return m;
}

std::string Monoid::kind_name() const {
    switch (kind_) {
    case Kind::FiniteTable: return "finite-table";
    case Kind::BoolOr: return "bool-or";
    case Kind::NatPlus: return "nat-plus";
    case Kind::NonnegRationalPlus: return "nonneg-rational-plus";
    case Kind::NonnegRationalPlusInfinity: return "nonneg-rational-plus-infinity";
    case Kind::NatMax: return "nat-max";
    }
    return "?";
}

Weight Monoid::zero() const {
    switch (kind_) {
    case Kind::FiniteTable: return Weight::table(unit_);
    case Kind::BoolOr: return Weight::boolean(false);
    default: return Weight::number(0);
    }
}

bool Monoid::contains(const Weight &w) const {
    switch (kind_) {
    case Kind::FiniteTable: return w.is_table() && w.table_index() < names_.size();
    case Kind::BoolOr: return w.is_boolean();
    case Kind::NatPlus:
    case Kind::NatMax: return is_nat(w);
    case Kind::NonnegRationalPlus: return is_nonneg_rational(w);
    case Kind::NonnegRationalPlusInfinity: return w.is_infinity() || is_nonneg_rational(w);
    }
    return false;
}

void Monoid::require_element(const Weight &w, const char *what) const {
    if (!contains(w))
        throw domain_error(std::string(what) + ": value outside the " + kind_name() + " carrier");
}

Weight Monoid::add(const Weight &a, const Weight &b) const {
    require_element(a, "add");
    require_element(b, "add");
    switch (kind_) {
    case Kind::FiniteTable:
        return table_sum(a.table_index(), b.table_index());
    case Kind::BoolOr:
        return Weight::boolean(a.as_boolean() || b.as_boolean());
    case Kind::NatPlus:
    case Kind::NonnegRationalPlus:
        return Weight::number(a.as_number() + b.as_number());
    case Kind::NonnegRationalPlusInfinity:
        if (a.is_infinity() || b.is_infinity())
            return Weight::infinity();
        return Weight::number(a.as_number() + b.as_number());
    case Kind::NatMax:
        return Weight::number(std::max(a.as_number(), b.as_number()));
    }
    throw domain_error("add: unknown monoid kind");
}

std::optional<std::uint32_t> Monoid::element_index(const std::string &name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end())
        return std::nullopt;
    return static_cast<std::uint32_t>(it - names_.begin());
}

Weight Monoid::table_sum(std::uint32_t a, std::uint32_t b) const {
    return Weight::table(table_[a * names_.size() + b]);
}

std::string Monoid::format(const Weight &w) const {
    if (w.is_table())
        return names_.at(w.table_index());
    if (w.is_boolean())
        return w.as_boolean() ? "tt" : "ff";
    if (w.is_infinity())
        return "inf";
    const mpq_class &q = w.as_number();
    if (q.get_den() == 1)
        return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Weight Monoid::parse(const std::string &text) const {
    if (is_finite_table()) {
        auto idx = element_index(text);
        if (!idx)
            throw domain_error("'" + text + "' is not an element of the table carrier");
        return Weight::table(*idx);
    }
    Weight w = parse_numeric_weight(text);
    require_element(w, "parse");
    return w;
}

bool Monoid::is_positive() const {
    if (!is_finite_table())
        return true;  // all built-ins are zerosumfree
    const auto n = static_cast<std::uint32_t>(names_.size());
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            if ((i != unit_ || j != unit_) && table_[i * n + j] == unit_)
                return false;
    return true;
}

bool Monoid::is_refinement() const {
    if (!is_finite_table())
        return true;  // holds for all shipped built-ins
    const auto n = static_cast<std::uint32_t>(names_.size());
    auto sum = [&](std::uint32_t a, std::uint32_t b) { return table_[a * n + b]; };
    for (std::uint32_t r1 = 0; r1 < n; ++r1)
        for (std::uint32_t r2 = 0; r2 < n; ++r2)
            for (std::uint32_t c1 = 0; c1 < n; ++c1)
                for (std::uint32_t c2 = 0; c2 < n; ++c2) {
                    if (sum(r1, r2) != sum(c1, c2))
                        continue;
                    bool found = false;
                    for (std::uint32_t m11 = 0; m11 < n && !found; ++m11)
                        for (std::uint32_t m12 = 0; m12 < n && !found; ++m12) {
                            if (sum(m11, m12) != r1)
                                continue;
                            for (std::uint32_t m21 = 0; m21 < n && !found; ++m21) {
                                if (sum(m11, m21) != c1)
                                    continue;
                                for (std::uint32_t m22 = 0; m22 < n && !found; ++m22)
                                    if (sum(m21, m22) == r2 && sum(m12, m22) == c2)
                                        found = true;
                            }
                        }
                    if (!found)
                        return false;
                }
    return true;
}

bool Monoid::is_club(const Club &c) const {
    switch (c.kind()) {
    case Club::Kind::Empty:
        return true;
    case Club::Kind::AllNonzero:
        // W \ {0} is an ideal exactly when the monoid is positive, and {0}
        // is always a submonoid.
        return is_positive();
    case Club::Kind::Subset:
        break;
    }
    if (!is_finite_table())
        throw domain_error("explicit club subsets only apply to finite-table monoids");
    const auto n = static_cast<std::uint32_t>(names_.size());
    for (std::uint32_t e : c.elements())
        if (e >= n)
            throw domain_error("club subset mentions an element outside the carrier");
    if (c.elements().count(unit_))
        return false;
    auto in = [&](std::uint32_t e) { return c.elements().count(e) > 0; };
    for (std::uint32_t v = 0; v < n; ++v)
        for (std::uint32_t w = 0; w < n; ++w) {
            std::uint32_t s = table_[v * n + w];
            if (in(v) && !in(s))
                return false;  // not an ideal
            if (!in(v) && !in(w) && in(s))
                return false;  // complement not a submonoid
        }
    return true;
}

std::vector<Club> Monoid::enumerate_clubs() const {
    if (!is_finite_table()) {
        std::vector<Club> out{Club::empty()};
        if (is_positive())
            out.push_back(Club::all_nonzero());
        return out;
    }
    const std::size_t n = names_.size();
    // Exhaustive subset search; fine for desk-scale tables.
    if (n > 20)
        throw domain_error("carrier too large to enumerate clubs exhaustively");
    std::vector<Club> out;
    for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
        std::set<std::uint32_t> elems;
        for (std::uint32_t i = 0; i < n; ++i)
            if (mask & (1ull << i))
                elems.insert(i);
        Club c = elems.empty() ? Club::empty() : Club::subset(std::move(elems));
        if (is_club(c))
            out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string Monoid::format_club(const Club &c) const {
    switch (c.kind()) {
    case Club::Kind::Empty:
        return "{}";
    case Club::Kind::AllNonzero:
        return "nonzero";
    case Club::Kind::Subset: {
        // Elements listed in carrier order.
        std::string out = "{";
        bool first = true;
        for (std::uint32_t e : c.elements()) {
            out += (first ? "" : ",") + names_.at(e);
            first = false;
        }
        return out + "}";
    }
    }
    return "?";
}

bool operator==(const Monoid &a, const Monoid &b) {
    if (a.kind_ != b.kind_)
        return false;
    if (a.kind_ != Monoid::Kind::FiniteTable)
        return true;
    return a.names_ == b.names_ && a.unit_ == b.unit_ && a.table_ == b.table_;
}

bool same_monoid(const MonoidRef &a, const MonoidRef &b) {
    if (a == b)
        return true;
    if (!a || !b)
        return false;
    return *a == *b;
}

MonoidRef builtin_monoid(const std::string &name) {
    if (name == "bool-or")
        return Monoid::bool_or();
    if (name == "nat-plus")
        return Monoid::nat_plus();
    if (name == "nonneg-rational-plus" || name == "rat-plus")
        return Monoid::nonneg_rational_plus();
    if (name == "nonneg-rational-plus-infinity" || name == "rat-plus-inf")
        return Monoid::nonneg_rational_plus_infinity();
    if (name == "nat-max")
        return Monoid::nat_max();
    throw domain_error("unknown built-in monoid '" + name + "'");
}

}  // namespace ultras
