#include "ultras/term.hpp"

#include <sstream>

namespace ultras {

void Signature::declare(const std::string &name, int arity) {
    if (arity < 0)
        throw domain_error("negative arity for operator '" + name + "'");
    auto [it, inserted] = ops_.emplace(name, arity);
    if (!inserted && it->second != arity)
        throw domain_error("operator '" + name + "' redeclared with a different arity");
}

int Signature::arity(const std::string &name) const {
    auto it = ops_.find(name);
    if (it == ops_.end())
        throw domain_error("unknown operator '" + name + "'");
    return it->second;
}

Term Term::var(std::string name) {
    return Term(std::make_shared<const Node>(Node{true, std::move(name), {}}));
}

Term Term::op(std::string name, std::vector<Term> children) {
    return Term(std::make_shared<const Node>(Node{false, std::move(name), std::move(children)}));
}

bool Term::is_ground() const {
    if (is_var())
        return false;
    for (const auto &child : children())
        if (!child.is_ground())
            return false;
    return true;
}

std::set<std::string> Term::variables() const {
    std::set<std::string> out;
    if (is_var()) {
        out.insert(head());
        return out;
    }
    for (const auto &child : children()) {
        auto sub = child.variables();
        out.insert(sub.begin(), sub.end());
    }
    return out;
}

std::string Term::to_string() const {
    if (is_var() || children().empty())
        return head();
    std::string out = head() + "(";
    for (std::size_t i = 0; i < children().size(); ++i)
        out += (i ? "," : "") + children()[i].to_string();
    return out + ")";
}

Term Term::substitute(const std::map<std::string, Term> &sigma) const {
    if (is_var()) {
        auto it = sigma.find(head());
        return it == sigma.end() ? *this : it->second;
    }
    std::vector<Term> children;
    children.reserve(this->children().size());
    for (const auto &child : this->children())
        children.push_back(child.substitute(sigma));
    return op(head(), std::move(children));
}

namespace {

struct TermParser {
    const std::string &text;
    const Signature *sig;  // null: lenient mode, names taken as written
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
    }

    [[noreturn]] void fail(const std::string &msg) const {
        throw parse_error("term syntax error at offset " + std::to_string(pos) + ": " + msg);
    }

    // Name token, with balanced <...> payload swallowed whole.
    std::string name() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size()) {
            char ch = text[pos];
            if (ch == '<') {
                int depth = 0;
                do {
                    if (pos >= text.size())
                        fail("unbalanced '<'");
                    if (text[pos] == '<')
                        ++depth;
                    if (text[pos] == '>')
                        --depth;
                    ++pos;
                } while (depth > 0);
                continue;
            }
            if (ch == '(' || ch == ')' || ch == ',' || isspace(static_cast<unsigned char>(ch)))
                break;
            ++pos;
        }
        if (pos == start)
            fail("expected a name");
        return text.substr(start, pos - start);
    }

    Term term() {
        std::string head = name();
        skip_ws();
        std::vector<Term> children;
        bool applied = false;
        if (pos < text.size() && text[pos] == '(') {
            applied = true;
            ++pos;
            skip_ws();
            if (pos < text.size() && text[pos] == ')') {
                ++pos;
            } else {
                for (;;) {
                    children.push_back(term());
                    skip_ws();
                    if (pos < text.size() && text[pos] == ',') {
                        ++pos;
                        continue;
                    }
                    if (pos < text.size() && text[pos] == ')') {
                        ++pos;
                        break;
                    }
                    fail("expected ',' or ')'");
                }
            }
        }
        if (!sig) {
            if (applied)
                return Term::op(head, std::move(children));
            return Term::var(head);
        }
        if (applied || sig->has(head)) {
            if (!sig->has(head))
                fail("unknown operator '" + head + "'");
            if (sig->arity(head) != static_cast<int>(children.size()))
                fail("operator '" + head + "' expects " + std::to_string(sig->arity(head)) + " arguments");
            return Term::op(head, std::move(children));
        }
        return Term::var(head);
    }
};

Term parse_with(const std::string &text, const Signature *sig) {
    TermParser p{text, sig};
    Term t = p.term();
    p.skip_ws();
    if (p.pos != text.size())
        p.fail("trailing input");
    return t;
}

}  // namespace

Term parse_term(const std::string &text, const Signature &sig) { return parse_with(text, &sig); }

Term parse_tree(const std::string &text) { return parse_with(text, nullptr); }

std::vector<std::string> split_top_level(const std::string &text, char sep) {
    std::vector<std::string> out;
    int paren = 0, angle = 0, bracket = 0;
    std::string cur;
    for (char ch : text) {
        if (ch == '(')
            ++paren;
        if (ch == ')')
            --paren;
        if (ch == '[')
            ++bracket;
        if (ch == ']')
            --bracket;
        if (ch == '<')
            ++angle;
        if (ch == '>' && angle > 0)  // ignore the '>' of '->' arrows
            --angle;
        if (ch == sep && paren == 0 && angle == 0 && bracket == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    // Trim surrounding whitespace of every piece.
    for (auto &piece : out) {
        std::size_t b = piece.find_first_not_of(" \t");
        std::size_t e = piece.find_last_not_of(" \t");
        piece = b == std::string::npos ? "" : piece.substr(b, e - b + 1);
    }
    return out;
}

}  // namespace ultras
