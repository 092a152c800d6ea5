#ifndef ULTRAS_WEIGHT_HPP
#define ULTRAS_WEIGHT_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include <gmpxx.h>

namespace ultras {

// Thrown on violated preconditions anywhere in the core (bad carrier
// element, monoid mismatch, non-functional input, ...).
class domain_error : public std::runtime_error {
public:
    explicit domain_error(const std::string &msg) : std::runtime_error(msg) {}
};

// Malformed input text (syntax), as opposed to a failed validation.
class parse_error : public domain_error {
public:
    explicit parse_error(const std::string &msg) : domain_error(msg) {}
};

// The distinguished absorbing element of the rationals-with-infinity monoid.
struct Infinity {
    friend bool operator==(Infinity, Infinity) { return true; }
    friend bool operator<(Infinity, Infinity) { return false; }
};

// An element of a finite enumerated carrier, by index into the table.
struct TableElem {
    std::uint32_t index = 0;
    friend bool operator==(TableElem a, TableElem b) { return a.index == b.index; }
    friend bool operator<(TableElem a, TableElem b) { return a.index < b.index; }
};

// A weight value. Numeric weights are exact rationals (mpq_class); the
// carrier kind is enforced by the owning Monoid, not here. No floating
// point anywhere.
class Weight {
public:
    Weight() : rep_(false) {}
    static Weight boolean(bool b) { return Weight(Rep(b)); }
    static Weight number(mpq_class q) {
        q.canonicalize();
        return Weight(Rep(std::move(q)));
    }
    static Weight number(long num, long den = 1) {
        mpq_class q(num, den);
        q.canonicalize();
        return Weight(Rep(std::move(q)));
    }
    static Weight infinity() { return Weight(Rep(Infinity{})); }
    static Weight table(std::uint32_t index) { return Weight(Rep(TableElem{index})); }

    bool is_boolean() const { return std::holds_alternative<bool>(rep_); }
    bool is_number() const { return std::holds_alternative<mpq_class>(rep_); }
    bool is_infinity() const { return std::holds_alternative<Infinity>(rep_); }
    bool is_table() const { return std::holds_alternative<TableElem>(rep_); }

    bool as_boolean() const { return std::get<bool>(rep_); }
    const mpq_class &as_number() const { return std::get<mpq_class>(rep_); }
    std::uint32_t table_index() const { return std::get<TableElem>(rep_).index; }

    friend bool operator==(const Weight &a, const Weight &b) { return a.rep_ == b.rep_; }
    friend bool operator!=(const Weight &a, const Weight &b) { return !(a == b); }
    friend bool operator<(const Weight &a, const Weight &b) {
        if (a.rep_.index() != b.rep_.index())
            return a.rep_.index() < b.rep_.index();
        if (a.is_boolean())
            return a.as_boolean() < b.as_boolean();
        if (a.is_number())
            return a.as_number() < b.as_number();
        if (a.is_table())
            return a.table_index() < b.table_index();
        return false;  // two infinities
    }

private:
    using Rep = std::variant<bool, mpq_class, Infinity, TableElem>;
    explicit Weight(Rep rep) : rep_(std::move(rep)) {}
    Rep rep_;
};

// Parses "p/q", "p", "inf", "tt", "ff"; table elements are resolved by the
// owning monoid, not here.
Weight parse_numeric_weight(const std::string &text);

}  // namespace ultras

#endif
