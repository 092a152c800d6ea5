#ifndef ULTRAS_MONOID_HPP
#define ULTRAS_MONOID_HPP

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ultras/weight.hpp"

namespace ultras {

class Monoid;
using MonoidRef = std::shared_ptr<const Monoid>;

// Weight-based selection predicate: a monoid ideal whose complement is a
// submonoid. Built-in monoids only admit the empty club and (when the
// monoid is positive) the set of all non-zero elements; finite tables may
// have arbitrary subsets.
class Club {
public:
    enum class Kind { Empty, AllNonzero, Subset };

    Club() : kind_(Kind::Empty) {}
    static Club empty() { return Club(); }
    static Club all_nonzero() {
        Club c;
        c.kind_ = Kind::AllNonzero;
        return c;
    }
    static Club subset(std::set<std::uint32_t> elems) {
        Club c;
        c.kind_ = Kind::Subset;
        c.elems_ = std::move(elems);
        return c;
    }

    Kind kind() const { return kind_; }
    const std::set<std::uint32_t> &elements() const { return elems_; }

    bool contains(const Monoid &m, const Weight &w) const;

    friend bool operator==(const Club &a, const Club &b) {
        return a.kind_ == b.kind_ && a.elems_ == b.elems_;
    }
    friend bool operator<(const Club &a, const Club &b) {
        if (a.kind_ != b.kind_)
            return a.kind_ < b.kind_;
        return a.elems_ < b.elems_;
    }

private:
    Kind kind_;
    std::set<std::uint32_t> elems_;
};

// A commutative monoid of weights. Built-in kinds answer the structural
// predicates symbolically; finite tables are checked by brute force at
// construction (laws) and on demand (clubs, positivity, refinement).
class Monoid {
public:
    enum class Kind {
        FiniteTable,
        BoolOr,
        NatPlus,
        NonnegRationalPlus,
        NonnegRationalPlusInfinity,
        NatMax,
    };

    static constexpr std::size_t kMaxTableSize = 64;

    static MonoidRef bool_or();
    static MonoidRef nat_plus();
    static MonoidRef nonneg_rational_plus();
    static MonoidRef nonneg_rational_plus_infinity();
    static MonoidRef nat_max();

    // Builds a finite-table monoid and verifies totality, associativity,
    // commutativity and the unit laws on the whole table. Throws
    // domain_error with the violated law otherwise.
    static MonoidRef finite_table(std::vector<std::string> carrier,
                                  std::string unit,
                                  const std::vector<std::tuple<std::string, std::string, std::string>> &sums);

    Kind kind() const { return kind_; }
    bool is_finite_table() const { return kind_ == Kind::FiniteTable; }
    std::string kind_name() const;

    Weight zero() const;
    Weight add(const Weight &a, const Weight &b) const;
    bool is_zero(const Weight &w) const { return w == zero(); }

    // Membership of a value in this monoid's carrier.
    bool contains(const Weight &w) const;
    void require_element(const Weight &w, const char *what) const;

    // Finite-table element <-> name.
    const std::vector<std::string> &carrier_names() const { return names_; }
    std::size_t table_size() const { return names_.size(); }
    std::optional<std::uint32_t> element_index(const std::string &name) const;
    Weight table_sum(std::uint32_t a, std::uint32_t b) const;

    std::string format(const Weight &w) const;
    Weight parse(const std::string &text) const;

    bool is_positive() const;
    // Every r1+r2 = c1+c2 admits a 2x2 refinement matrix. Brute force for
    // tables, symbolic for built-ins.
    bool is_refinement() const;
    bool is_club(const Club &c) const;
    // All clubs of a finite table (exhaustive), or the symbolic pair for
    // built-ins. Throws for tables too large to enumerate.
    std::vector<Club> enumerate_clubs() const;

    std::string format_club(const Club &c) const;

    friend bool operator==(const Monoid &a, const Monoid &b);

protected:
    explicit Monoid(Kind kind) : kind_(kind) {}

private:
    Kind kind_;
    std::vector<std::string> names_;
    std::uint32_t unit_ = 0;
    std::vector<std::uint32_t> table_;  // row-major carrier x carrier
};

// True when both point to structurally equal monoids.
bool same_monoid(const MonoidRef &a, const MonoidRef &b);

// Named built-in lookup: "bool-or", "nat-plus", "nonneg-rational-plus",
// "nonneg-rational-plus-infinity", "nat-max" (plus short aliases).
MonoidRef builtin_monoid(const std::string &name);

}  // namespace ultras

#endif
