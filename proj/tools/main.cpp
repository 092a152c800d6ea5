#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "ultras/pepa.hpp"
#include "ultras/specfile.hpp"

using namespace ultras;

namespace {

constexpr int kOk = 0;
constexpr int kPropertyFailed = 1;
constexpr int kUsageError = 2;
constexpr int kInconclusive = 3;

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw parse_error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

constexpr std::size_t kOracleLimit = 7;

void enumerate_partitions(const std::vector<TaggedState> &elems, std::size_t i,
                          std::vector<std::vector<TaggedState>> &current,
                          const std::function<void(const std::vector<std::vector<TaggedState>> &)> &visit) {
    if (i == elems.size()) {
        visit(current);
        return;
    }
    for (std::size_t b = 0; b < current.size(); ++b) {
        current[b].push_back(elems[i]);
        enumerate_partitions(elems, i + 1, current, visit);
        current[b].pop_back();
    }
    current.push_back({elems[i]});
    enumerate_partitions(elems, i + 1, current, visit);
    current.pop_back();
}

// Union of all equivalences on the tagged union that pass the
// bisimulation check; compared against the refinement result.
bool oracle_agrees(const Ultras &u1, const Ultras &u2, const Partition &part) {
    std::vector<TaggedState> elems;
    for (const auto &s : u1.states())
        elems.push_back({0, s});
    for (const auto &s : u2.states())
        elems.push_back({1, s});

    std::set<std::pair<TaggedState, TaggedState>> related;
    std::vector<std::vector<TaggedState>> current;
    enumerate_partitions(elems, 0, current, [&](const std::vector<std::vector<TaggedState>> &blocks) {
        // The candidate passes if all same-block pairs satisfy the
        // forth-and-back conditions, taken per side pair.
        Relation cross, left, right;
        for (const auto &block : blocks)
            for (const auto &a : block)
                for (const auto &b : block) {
                    if (a.side == 0 && b.side == 1)
                        cross.emplace(a.id, b.id);
                    if (a.side == 0 && b.side == 0)
                        left.emplace(a.id, b.id);
                    if (a.side == 1 && b.side == 1)
                        right.emplace(a.id, b.id);
                }
        if (!is_bisimulation(u1, u1, left) || !is_bisimulation(u2, u2, right) ||
            !is_bisimulation(u1, u2, cross))
            return;
        for (const auto &block : blocks)
            for (const auto &a : block)
                for (const auto &b : block)
                    related.emplace(a, b);
    });

    for (const auto &block : part.blocks())
        for (const auto &a : block)
            for (const auto &b : block)
                if (!related.count({a, b}))
                    return false;
    for (const auto &[a, b] : related)
        if (!part.same_block(a, b))
            return false;
    return true;
}

// Prints the cross-check verdict; true when the result stands.
bool run_oracle_check(const Ultras &u1, const Ultras &u2, const Partition &part) {
    if (u1.states().size() + u2.states().size() > kOracleLimit) {
        std::cout << "oracle: skipped (more than " << kOracleLimit << " states)\n";
        return true;
    }
    bool ok = oracle_agrees(u1, u2, part);
    std::cout << "oracle agreement: " << (ok ? "yes" : "no") << "\n";
    return ok;
}

std::string format_system(const Ultras &u, const std::string &format) {
    if (format == "structured")
        return ultras_json(u);
    if (format == "graph")
        return ultras_dot(u);
    return ultras_text(u);
}

std::vector<Term> parse_roots(const std::string &roots, const Signature &sig) {
    if (roots.empty())
        throw parse_error("no root terms given (use --roots)");
    std::vector<Term> out;
    for (const auto &piece : split_top_level(roots, ','))
        out.push_back(parse_term(piece, sig));
    return out;
}

Specification load_spec(const std::string &path, bool print_diags) {
    Specification spec = parse_spec_file(read_file(path));
    auto diags = validate_specification(spec);
    if (!diags.empty()) {
        if (print_diags)
            for (const auto &d : diags)
                std::cout << d << "\n";
        throw domain_error("specification '" + path + "' is invalid");
    }
    return spec;
}

int run_check(const std::string &path) {
    Specification spec = parse_spec_file(read_file(path));
    auto diags = validate_specification(spec);
    for (const auto &d : diags)
        std::cout << d << "\n";
    if (diags.empty()) {
        std::cout << "ok: " << spec.rules.size() << " rules, " << spec.labels.size() << " labels\n";
        return kOk;
    }
    return kPropertyFailed;
}

int run_derive(const std::string &path, const std::string &roots, std::size_t budget,
               const std::string &format) {
    Specification spec = load_spec(path, true);
    Ultras u = induce(spec, parse_roots(roots, spec.process_sig), budget);
    std::cout << format_system(u, format);
    return kOk;
}

int run_bisim(const std::string &path1, const std::string &path2, const std::string &roots,
              std::size_t budget, bool oracle) {
    Specification spec1 = load_spec(path1, true);
    Specification spec2 = load_spec(path2, true);
    auto pieces = split_top_level(roots, ',');
    if (pieces.size() != 2)
        throw parse_error("bisim needs exactly two roots: --roots p,q");
    Term p = parse_term(pieces[0], spec1.process_sig);
    Term q = parse_term(pieces[1], spec2.process_sig);
    Ultras u1 = induce(spec1, {p}, budget);
    Ultras u2 = induce(spec2, {q}, budget);
    if (!u1.boundary().empty() || !u2.boundary().empty()) {
        std::cout << "inconclusive: exploration truncated at budget " << budget << "\n";
        return kInconclusive;
    }
    Partition part = largest_bisimulation(u1, u2);
    std::cout << part.to_text();
    bool related = part.same_block(TaggedState{0, p.to_string()}, TaggedState{1, q.to_string()});
    std::cout << (related ? "bisimilar" : "not bisimilar") << "\n";
    if (oracle && !run_oracle_check(u1, u2, part))
        return kPropertyFailed;
    return related ? kOk : kPropertyFailed;
}

int run_minimize(const std::string &path, const std::string &roots, std::size_t budget,
                 const std::string &format, bool oracle) {
    Specification spec = load_spec(path, true);
    Ultras u = induce(spec, parse_roots(roots, spec.process_sig), budget);
    if (!u.boundary().empty()) {
        std::cout << "inconclusive: exploration truncated at budget " << budget << "\n";
        return kInconclusive;
    }
    Partition part = largest_bisimulation(u);
    std::cout << format_system(quotient(u, part), format);
    if (oracle) {
        Ultras empty(u.monoid(), u.labels());
        if (!run_oracle_check(u, empty, part))
            return kPropertyFailed;
    }
    return kOk;
}

int run_pepa(const std::string &path1, const std::string &path2, std::size_t budget,
             const std::string &format, bool oracle) {
    pepa::PepaFile file1 = pepa::parse_pepa_file(read_file(path1));
    if (path2.empty()) {
        Ultras u = pepa::derive_ctmc(file1.main, budget);
        std::cout << format_system(u, format);
        if (oracle) {
            std::set<Label> labels = file1.main.labels();
            Ultras reference = pepa::classic_ctmc(file1.main, labels, budget);
            bool same = u.states() == reference.states() && u.boundary() == reference.boundary() &&
                        u.all_transitions() == reference.all_transitions();
            std::cout << "oracle agreement: " << (same ? "yes" : "no") << "\n";
            if (!same)
                return kPropertyFailed;
        }
        return kOk;
    }
    pepa::PepaFile file2 = pepa::parse_pepa_file(read_file(path2));
    switch (pepa::strong_equivalence(file1.main, file2.main, budget)) {
    case ProbeResult::Holds:
        std::cout << "strongly equivalent\n";
        return kOk;
    case ProbeResult::Fails:
        std::cout << "not strongly equivalent\n";
        return kPropertyFailed;
    case ProbeResult::Inconclusive:
        std::cout << "inconclusive: exploration truncated at budget " << budget << "\n";
        return kInconclusive;
    }
    return kUsageError;
}

int run_translate(const std::string &path) {
    std::string text = read_file(path);
    Specification spec;
    if (path.size() >= 6 && path.substr(path.size() - 6) == ".sgsos") {
        SgsosFile file = parse_sgsos_file(text);
        spec = translations::translate_segala(file.process_sig, file.labels, file.rules);
    } else if (path.size() >= 6 && path.substr(path.size() - 6) == ".wgsos") {
        WgsosFile file = parse_wgsos_file(text);
        spec = translations::translate_wgsos(file.monoid, file.process_sig, file.labels, file.rules);
    } else {
        throw parse_error("translate expects a .sgsos or .wgsos file");
    }
    std::cout << serialize_specification(spec);
    return kOk;
}

int run_monoid(const std::string &path) {
    MonoidRef m = parse_monoid_file(read_file(path));
    std::cout << "positive: " << (m->is_positive() ? "yes" : "no")
              << ", refinement: " << (m->is_refinement() ? "yes" : "no") << ", clubs:";
    bool first = true;
    for (const auto &club : m->enumerate_clubs()) {
        std::cout << (first ? " " : ", ") << (club.kind() == Club::Kind::Empty ? "{}" : m->format_club(club));
        first = false;
    }
    std::cout << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"monoid-weighted transition systems: rule-based derivation, bisimulation, minimization"};
    app.require_subcommand(1);

    std::string file1, file2, roots, format = "text";
    std::size_t budget = 1000;
    bool oracle = false;

    auto add_common = [&](CLI::App *cmd, bool with_roots) {
        cmd->add_option("--budget", budget, "maximum number of explored states")->capture_default_str();
        cmd->add_option("--format", format, "output format: text, structured or graph")
            ->check(CLI::IsMember({"text", "structured", "graph"}));
        if (with_roots)
            cmd->add_option("--roots", roots, "comma-separated root terms");
    };

    auto *check = app.add_subcommand("check", "validate a specification file");
    check->add_option("spec", file1, "specification file")->required();

    auto *derive = app.add_subcommand("derive", "derive the induced system from root terms");
    derive->add_option("spec", file1, "specification file")->required();
    add_common(derive, true);

    auto *bisim = app.add_subcommand("bisim", "compare two root terms across two specifications");
    bisim->add_option("spec1", file1, "first specification file")->required();
    bisim->add_option("spec2", file2, "second specification file")->required();
    bisim->add_flag("--oracle", oracle, "cross-check the partition against brute force on small instances");
    add_common(bisim, true);

    auto *minimize = app.add_subcommand("minimize", "derive and collapse to the bisimulation quotient");
    minimize->add_option("spec", file1, "specification file")->required();
    minimize->add_flag("--oracle", oracle,
                       "cross-check the partition against brute force on small instances");
    add_common(minimize, true);

    auto *pepa_cmd = app.add_subcommand("pepa", "derive a stochastic process file, or compare two");
    pepa_cmd->add_option("file", file1, "process file")->required();
    pepa_cmd->add_option("file2", file2, "optional second process file to compare against");
    pepa_cmd->add_flag("--oracle", oracle, "cross-check the derivation against the direct semantics");
    add_common(pepa_cmd, false);

    auto *translate = app.add_subcommand("translate", "compile a .sgsos or .wgsos file to a specification");
    translate->add_option("file", file1, "rule file")->required();

    auto *monoid_cmd = app.add_subcommand("monoid", "report positivity, refinement and clubs of a monoid");
    monoid_cmd->add_option("file", file1, "monoid declaration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (check->parsed())
            return run_check(file1);
        if (derive->parsed())
            return run_derive(file1, roots, budget, format);
        if (bisim->parsed())
            return run_bisim(file1, file2, roots, budget, oracle);
        if (minimize->parsed())
            return run_minimize(file1, roots, budget, format, oracle);
        if (pepa_cmd->parsed())
            return run_pepa(file1, file2, budget, format, oracle);
        if (translate->parsed())
            return run_translate(file1);
        if (monoid_cmd->parsed())
            return run_monoid(file1);
    } catch (const parse_error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const domain_error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kPropertyFailed;
    }
    return kUsageError;
}
