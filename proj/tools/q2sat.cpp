// q2sat command-line front end. Exit codes: 0 SAT / verified / generated,
// 1 UNSAT / verification failure, 2 input or usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "q2sat/generators.hpp"
#include "q2sat/model.hpp"
#include "q2sat/oracle.hpp"
#include "q2sat/solver.hpp"

namespace {

using namespace q2sat;
using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitInput = 2;

// Usage and I/O failures; mapped to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw InputError("cannot write '" + path + "'");
}

Instance load_instance(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return parse_instance(text);
    } catch (const ParseError& e) {
        throw InputError(path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " + e.what());
    }
}

nlohmann::json metrics_json(const SolveMetrics& m) {
    return {{"edge_traversals", m.edge_traversals}, {"field_ops", m.field_ops}, {"max_coeff_bits", m.max_coeff_bits}};
}

struct SolveFlags {
    std::string instance;
    std::string out;
    std::string metrics = "json";
    bool no_fastpath = false;
};

int cmd_solve(const SolveFlags& f) {
    const Instance inst = load_instance(f.instance);
    SolveOptions opts;
    opts.fastpath = !f.no_fastpath;
    const auto t0 = Clock::now();
    const SolveResult r = solve(inst, opts);
    const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
    if (r.sat) {
        write_output(f.out, serialize_assignment(r.assignment));
        if (!f.out.empty() && f.out != "-") std::cout << "SAT\n";
    } else {
        write_output(f.out, std::string(kUnsatText));
        if (!f.out.empty() && f.out != "-") std::cout << kUnsatText;
    }
    if (f.metrics == "json") {
        nlohmann::json report{{"decision", r.sat ? "SAT" : "UNSAT"},
                              {"metrics", metrics_json(r.metrics)},
                              {"wall_time", wall}};
        if (r.sat && !f.out.empty() && f.out != "-") report["assignment"] = f.out;
        if (!r.sat) {
            report["phase"] = phase_name(r.phase);
            report["witness"] = r.witness;
        }
        std::cerr << report.dump() << "\n";
    }
    return r.sat ? kExitOk : kExitNegative;
}

int cmd_verify(const std::string& instance_path, const std::string& assignment_path) {
    const Instance inst = load_instance(instance_path);
    const std::string text = read_file(assignment_path);
    LevelInterner levels(inst.field);
    std::optional<Assignment> a;
    try {
        a = parse_assignment(text, inst, levels);
    } catch (const ParseError& e) {
        throw InputError(assignment_path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " +
                         e.what());
    }
    if (!a) {
        std::cout << "UNSAT claim; nothing to verify\n";
        return kExitNegative;
    }
    const VerifyResult v = verify_assignment(inst, *a);
    switch (v.status) {
        case VerifyResult::Status::Ok: std::cout << "OK\n"; return kExitOk;
        case VerifyResult::Status::CoverageGap: throw InputError("assignment does not match the instance: " + v.detail);
        case VerifyResult::Status::Violation:
            std::cout << "VIOLATION constraint " << v.constraint_id << ": " << v.detail << "\n";
            return kExitNegative;
        case VerifyResult::Status::NotNormalized:
            std::cout << "NOT NORMALIZED qubit " << v.qubit << ": " << v.detail << "\n";
            return kExitNegative;
    }
    return kExitNegative;
}

struct GenFlags {
    std::string kind;
    std::string out;
    std::string input;
    std::string M, N;
    std::uint64_t seed = 0;
    int n = 4, m = 6;
    unsigned product_percent = 50;
    std::string field = "q";
    long coeff_range = 1;
};

mpz_class parse_big(const std::string& s, const char* name) {
    mpz_class x;
    if (s.empty() || x.set_str(s, 0) != 0) throw InputError(std::string("--") + name + " must be an integer");
    return x;
}

int cmd_gen(const GenFlags& f) {
    Instance inst;
    try {
        if (f.kind == "cnf-import") {
            if (f.input.empty()) throw InputError("cnf-import needs --input");
            inst = embed_cnf(parse_dimacs(read_file(f.input)));
        } else if (f.kind == "lowerbound-full") {
            inst = gen_lowerbound_full(parse_big(f.M, "M"), parse_big(f.N, "N"));
        } else if (f.kind == "lowerbound-chain") {
            inst = gen_lowerbound_chain(parse_big(f.M, "M"));
        } else if (f.kind == "random") {
            if (f.field != "q" && f.field != "gaussian") throw InputError("--field must be q or gaussian");
            RandomParams p;
            p.n = f.n;
            p.m = f.m;
            p.product_percent = f.product_percent;
            p.gaussian = f.field == "gaussian";
            p.coeff_range = f.coeff_range;
            inst = gen_random(p, f.seed);
        } else {
            throw InputError("unknown kind '" + f.kind + "'");
        }
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    } catch (const ParseError& e) {
        throw InputError(f.input + ":" + std::to_string(e.line()) + ": " + e.what());
    }
    write_output(f.out, serialize_instance(inst));
    return kExitOk;
}

struct BenchFlags {
    std::string family;
    std::vector<int> sizes;
    std::uint64_t seed = 0;
    bool no_fastpath = false;
    std::string out;
};

int cmd_bench(const BenchFlags& f) {
    BenchFamily fam;
    try {
        fam = parse_bench_family(f.family);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    std::ostringstream csv;
    csv << "n,m,edge_traversals,field_ops,max_coeff_bits,wall_time\n";
    for (int size : f.sizes) {
        Instance inst;
        try {
            inst = gen_bench(fam, size, f.seed);
        } catch (const std::invalid_argument& e) {
            throw InputError(e.what());
        }
        SolveOptions opts;
        opts.fastpath = !f.no_fastpath;
        const auto t0 = Clock::now();
        const SolveResult r = solve(inst, opts);
        const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
        csv << inst.n << "," << inst.constraints.size() << "," << r.metrics.edge_traversals << ","
            << r.metrics.field_ops << "," << r.metrics.max_coeff_bits << "," << wall << "\n";
    }
    write_output(f.out, csv.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum 2-SAT solver with exact algebraic arithmetic"};
    app.require_subcommand(1);

    SolveFlags sf;
    auto* solve_cmd = app.add_subcommand("solve", "Decide an instance and write an assignment");
    solve_cmd->add_option("instance", sf.instance, "Instance file")->required();
    solve_cmd->add_option("--out", sf.out, "Assignment output path (default stdout)");
    solve_cmd->add_option("--metrics", sf.metrics, "Run report on stderr")->check(CLI::IsMember({"json", "none"}));
    solve_cmd->add_flag("--no-fastpath", sf.no_fastpath, "Propagate product constraints by T*a");

    std::string v_inst, v_assign;
    auto* verify_cmd = app.add_subcommand("verify", "Check an assignment against an instance");
    verify_cmd->add_option("instance", v_inst, "Instance file")->required();
    verify_cmd->add_option("assignment", v_assign, "Assignment file")->required();

    GenFlags gf;
    auto* gen_cmd = app.add_subcommand("gen", "Generate an instance");
    gen_cmd->add_option("kind", gf.kind, "cnf-import | lowerbound-full | lowerbound-chain | random")->required();
    gen_cmd->add_option("--out", gf.out, "Output path (default stdout)");
    gen_cmd->add_option("--input", gf.input, "DIMACS file for cnf-import");
    gen_cmd->add_option("--M", gf.M, "Odd positive integer (lowerbound kinds)");
    gen_cmd->add_option("--N", gf.N, "Odd positive integer (lowerbound-full)");
    gen_cmd->add_option("--seed", gf.seed, "Seed for random");
    gen_cmd->add_option("--n", gf.n, "Qubits for random");
    gen_cmd->add_option("--m", gf.m, "Constraints for random");
    gen_cmd->add_option("--product-percent", gf.product_percent, "Percent of product constraints for random");
    gen_cmd->add_option("--field", gf.field, "q or gaussian");
    gen_cmd->add_option("--coeff-range", gf.coeff_range, "Coefficient parts drawn from [-r, r]");

    BenchFlags bf;
    auto* bench_cmd = app.add_subcommand("bench", "Solve generated families and print CSV");
    bench_cmd->add_option("family", bf.family, "chain | cycle | random | classical | lowerbound")->required();
    bench_cmd->add_option("--sizes", bf.sizes, "Instance sizes")->delimiter(',')->required();
    bench_cmd->add_option("--seed", bf.seed, "Generator seed");
    bench_cmd->add_flag("--no-fastpath", bf.no_fastpath, "Propagate product constraints by T*a");
    bench_cmd->add_option("--out", bf.out, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*solve_cmd) return cmd_solve(sf);
        if (*verify_cmd) return cmd_verify(v_inst, v_assign);
        if (*gen_cmd) return cmd_gen(gf);
        if (*bench_cmd) return cmd_bench(bf);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
