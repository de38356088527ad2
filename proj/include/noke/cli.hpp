#pragma once

#include "noke/tables.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace noke {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 2;
inline constexpr int parse = 3;
inline constexpr int internal = 4;
}  // namespace exit_code

namespace detail {

struct ParamFlags {
    int d = 0, k = 0, n = 0;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--d", d, "spatial dimension (d >= 2)")->required();
        cmd->add_option("--k", k, "arity of the no-k-equal condition (k >= 3)")->required();
        cmd->add_option("--n", n, "number of points (n > k)")->required();
    }

    [[nodiscard]] Parameters get() const
    {
        Parameters p{d, k, n};
        p.validate();
        return p;
    }
};

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline CohomologyClass read_class_file(const std::string& path)
{
    try {
        return parse_class(read_file(path));
    } catch (const ParseError& e) {
        if (e.where() == path) throw;
        throw ParseError(path, e.what());
    }
}

}  // namespace detail

/// Runs the command line (arguments without the program name). Output goes
/// to `out`, diagnostics to `err`; returns the process exit status.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Cohomology rings of no-k-equal manifolds via k-forests", "noke"};
    app.require_subcommand(1);

    detail::ParamFlags pf;
    std::string format = "json";
    bool mod2 = false;
    bool exhaustive = false;
    std::size_t cap = kDefaultExhaustiveCap;
    int s = 1;
    int degree = 0;
    std::string lhs, rhs;
    TableSpec table;

    const std::vector<std::string> formats{"json", "csv", "ascii"};

    auto* betti_cmd = app.add_subcommand("betti", "Betti numbers by degree");
    pf.attach(betti_cmd);
    betti_cmd->add_flag("--mod2", mod2, "ranks over Z/2");
    betti_cmd->add_option("--format", format)->check(CLI::IsMember(formats));

    auto* basis_cmd = app.add_subcommand("basis", "basic forests of one degree");
    pf.attach(basis_cmd);
    basis_cmd->add_option("--degree", degree)->required();

    auto* mul_cmd = app.add_subcommand("mul", "product of two classes read from JSON files");
    mul_cmd->add_option("--lhs", lhs)->required();
    mul_cmd->add_option("--rhs", rhs)->required();
    mul_cmd->add_flag("--mod2", mod2, "reduce both factors mod 2 first");

    auto* cl_cmd = app.add_subcommand("cl", "cup-length with certificate");
    pf.attach(cl_cmd);
    cl_cmd->add_flag("--mod2", mod2);
    cl_cmd->add_flag("--exhaustive", exhaustive, "search all basis products instead of the witness");
    cl_cmd->add_option("--cap", cap, "largest positive-degree basis for exhaustive search");

    auto* zcl_cmd = app.add_subcommand("zcl", "s-th zero-divisor cup-length with certificate");
    pf.attach(zcl_cmd);
    zcl_cmd->add_option("--s", s)->required();
    zcl_cmd->add_flag("--mod2", mod2);
    zcl_cmd->add_flag("--exhaustive", exhaustive, "search all zero-divisor products instead of the witness");
    zcl_cmd->add_option("--cap", cap, "largest positive-degree basis for exhaustive search");

    auto* tc_cmd = app.add_subcommand("tc", "bounds for TC_s");
    pf.attach(tc_cmd);
    tc_cmd->add_option("--s", s)->required();

    auto* pred_cmd = app.add_subcommand("predicates", "determination and formality predicates");
    pf.attach(pred_cmd);

    auto* table_cmd = app.add_subcommand("table", "cat/TC_s determination table");
    table_cmd->add_option("--d", table.d)->required();
    table_cmd->add_option("--s", table.s);
    table_cmd->add_option("--k-min", table.k_min)->required();
    table_cmd->add_option("--k-max", table.k_max)->required();
    table_cmd->add_option("--n-min", table.n_min)->required();
    table_cmd->add_option("--n-max", table.n_max)->required();
    table_cmd->add_option("--format", format)->check(CLI::IsMember(formats));

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_code::ok : exit_code::usage;
    }

    const auto ring = mod2 ? CoefficientRing::mod2 : CoefficientRing::integers;
    try {
        if (*betti_cmd) {
            const auto p = pf.get();
            const auto b = betti(p);
            if (format == "json") {
                out << betti_to_json(b).dump() << '\n';
            } else if (format == "csv") {
                out << "degree,rank\n";
                for (const auto& [deg, rank] : b) out << deg << ',' << rank << '\n';
            } else {
                for (const auto& [deg, rank] : b) out << "H^" << deg << " = " << rank << '\n';
            }
        } else if (*basis_cmd) {
            const auto p = pf.get();
            const auto basis = enumerate_basic(p, degree);
            Json j{{"d", p.d}, {"k", p.k}, {"n", p.n}, {"degree", degree}, {"count", basis.size()}};
            j["forests"] = Json::array();
            for (const auto& f : basis) j["forests"].push_back(forest_to_json(f, p));
            out << j.dump() << '\n';
        } else if (*mul_cmd) {
            auto a = detail::read_class_file(lhs);
            auto b = detail::read_class_file(rhs);
            if (!(a.params() == b.params()))
                throw ContractViolation("factors live on different parameters: " + a.params().to_string() + " vs " +
                                        b.params().to_string());
            if (mod2) {
                a = reduce_mod2(a);
                b = reduce_mod2(b);
            }
            if (a.ring() != b.ring()) throw ContractViolation("factors use different coefficient rings");
            out << emit_class(multiply(a, b, a.params())) << '\n';
        } else if (*cl_cmd) {
            const auto p = pf.get();
            const auto r = cup_length(p, exhaustive ? SearchMode::exhaustive : SearchMode::witness, ring, cap);
            Json j{{"d", p.d}, {"k", p.k}, {"n", p.n}, {"ring", ring_name(ring)}};
            j.update(length_report_to_json(r));
            out << j.dump() << '\n';
        } else if (*zcl_cmd) {
            const auto p = pf.get();
            const auto r = zcl(p, s, exhaustive ? SearchMode::exhaustive : SearchMode::witness, ring, cap);
            Json j{{"d", p.d}, {"k", p.k}, {"n", p.n}, {"s", s}, {"ring", ring_name(ring)}};
            j.update(length_report_to_json(r));
            out << j.dump() << '\n';
        } else if (*tc_cmd) {
            const auto p = pf.get();
            out << tc_report_to_json(p, tc_bounds(p, s)).dump() << '\n';
        } else if (*pred_cmd) {
            const auto p = pf.get();
            out << predicates_to_json(p, determination_predicates(p)).dump() << '\n';
        } else if (*table_cmd) {
            table.format = format == "csv" ? TableFormat::csv : format == "ascii" ? TableFormat::ascii : TableFormat::json;
            out << render_table(table);
        }
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return exit_code::parse;
    } catch (const InvalidParameters& e) {
        err << "invalid parameters: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const ContractViolation& e) {
        err << "invalid input: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const CapExceeded& e) {
        err << e.what() << '\n';
        return exit_code::usage;
    } catch (const InconsistentSystem& e) {
        err << "internal consistency failure: " << e.what() << '\n';
        return exit_code::internal;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return exit_code::internal;
    }
    return exit_code::ok;
}

}  // namespace noke
