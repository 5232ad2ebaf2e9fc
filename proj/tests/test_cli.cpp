#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "q2sat/model.hpp"

#ifndef Q2SAT_CLI_PATH
#error "Q2SAT_CLI_PATH must name the q2sat binary"
#endif

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out;
};

// Runs the CLI with `args`; stderr is discarded unless `merge_stderr`.
CliRun run_cli(const std::string& args, bool merge_stderr = false) {
    const std::string cmd = std::string(Q2SAT_CLI_PATH) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {-1, ""};
    std::string out;
    char buf[4096];
    std::size_t k;
    while ((k = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, k);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("q2sat_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text) {
        const fs::path p = dir_ / name;
        std::ofstream(p, std::ios::binary) << text;
        return p.string();
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    static std::string read(const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
};

const char* kSinglet =
    "q2sat 1\nfield poly 0 1\nqubits 2\n"
    "constraint 0 1 1:1 1:0 1:0 1:0\n"
    "constraint 0 1 1:0 1:0 1:0 1:1\n"
    "constraint 0 1 1:1 1:1 1:1 1:1\n";

const char* kRankFour =
    "q2sat 1\nfield poly 0 1\nqubits 2\n"
    "constraint 0 1 1:1 1:0 1:0 1:0\n"
    "constraint 0 1 1:0 1:1 1:0 1:0\n"
    "constraint 0 1 1:0 1:0 1:1 1:0\n"
    "constraint 0 1 1:0 1:0 1:0 1:1\n";

// <00| on (0,1) and <11| on (1,2): solved by product states.
const char* kProductPath =
    "q2sat 1\nfield poly 0 1\nqubits 3\n"
    "constraint 0 1 1:1 1:0 1:0 1:0\n"
    "constraint 1 2 1:0 1:0 1:0 1:1\n";

}  // namespace

TEST_F(Cli, SolveSingletWritesPairLine) {
    const std::string inst = write("singlet.q2s", kSinglet);
    const CliRun r = run_cli("solve " + inst);
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("pair 0 1 ", 0), 0u) << r.out;
}

TEST_F(Cli, SolveRankFourIsUnsat) {
    const std::string inst = write("rank4.q2s", kRankFour);
    const CliRun r = run_cli("solve " + inst + " --out " + path("a.txt"));
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.out, "UNSAT\n");
    EXPECT_EQ(read(path("a.txt")), "UNSAT\n");
}

TEST_F(Cli, SolveMissingFileIsInputError) {
    EXPECT_EQ(run_cli("solve " + path("nope.q2s")).code, 2);
    const std::string bad = write("bad.q2s", "q2sat 1\nfield poly 0 1\nqubits 2\nconstraint 0 5 1 0 0 0\n");
    const CliRun r = run_cli("solve " + bad, true);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find(":4:"), std::string::npos) << r.out;
}

TEST_F(Cli, MetricsReportOnStderr) {
    const std::string inst = write("p.q2s", kProductPath);
    const CliRun quiet = run_cli("solve " + inst + " --metrics none --out " + path("a.txt"), true);
    EXPECT_EQ(quiet.out, "SAT\n");
    const CliRun loud = run_cli("solve " + inst + " --out " + path("a.txt"), true);
    EXPECT_NE(loud.out.find("\"edge_traversals\""), std::string::npos) << loud.out;
    EXPECT_NE(loud.out.find("\"decision\":\"SAT\""), std::string::npos) << loud.out;
}

TEST_F(Cli, VerifySolveOutput) {
    for (const char* text : {kSinglet, kProductPath}) {
        const std::string inst = write("i.q2s", text);
        ASSERT_EQ(run_cli("solve " + inst + " --out " + path("a.txt")).code, 0);
        const CliRun v = run_cli("verify " + inst + " " + path("a.txt"));
        EXPECT_EQ(v.code, 0);
        EXPECT_EQ(v.out, "OK\n");
    }
}

TEST_F(Cli, VerifyTamperedCoefficientNamesConstraint) {
    const std::string inst = write("p.q2s", kProductPath);
    ASSERT_EQ(run_cli("solve " + inst + " --out " + path("a.txt")).code, 0);
    std::string text = read(path("a.txt"));
    // Qubit 0 is |1>; flipping it to |0> breaks <00| on (0,1).
    const std::string good = "qubit 0 [] 1:0 1:1";
    const auto at = text.find(good);
    ASSERT_NE(at, std::string::npos) << text;
    text.replace(at, good.size(), "qubit 0 [] 1:1 1:0");
    const std::string tampered = write("t.txt", text);
    const CliRun v = run_cli("verify " + inst + " " + tampered);
    EXPECT_EQ(v.code, 1);
    EXPECT_EQ(v.out.rfind("VIOLATION constraint 0", 0), 0u) << v.out;
}

TEST_F(Cli, VerifyWrongQubitCountIsInputError) {
    const std::string inst = write("p.q2s", kProductPath);
    const std::string a = write("a.txt", "qubit 0 [] 1:0 1:1\nqubit 1 [] 1:1 1:0\n");
    EXPECT_EQ(run_cli("verify " + inst + " " + a).code, 2);
    const std::string extra = write("b.txt", "qubit 0 [] 1:0 1:1\nqubit 1 [] 1:1 1:0\nqubit 2 [] 1:1 1:0\nqubit 3 [] 1:1 1:0\n");
    EXPECT_EQ(run_cli("verify " + inst + " " + extra).code, 2);
}

TEST_F(Cli, GenRandomIsSeedDeterministic) {
    const std::string args = "gen random --n 5 --m 7 --field gaussian --coeff-range 2 --seed 42";
    const CliRun a = run_cli(args), b = run_cli(args), c = run_cli("gen random --n 5 --m 7 --seed 43");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, c.out);
    EXPECT_EQ(q2sat::parse_instance(a.out).constraints.size(), 7u);
}

TEST_F(Cli, GenCnfImportOneConstraintPerClause) {
    const std::string cnf = write("f.cnf", "c three clauses\np cnf 4 3\n1 2 0\n-2 3 0\n-3 -4 0\n");
    const CliRun r = run_cli("gen cnf-import --input " + cnf);
    ASSERT_EQ(r.code, 0);
    const q2sat::Instance inst = q2sat::parse_instance(r.out);
    EXPECT_EQ(inst.n, 4);
    EXPECT_EQ(inst.constraints.size(), 3u);
    EXPECT_EQ(run_cli("gen cnf-import").code, 2);
    EXPECT_EQ(run_cli("gen lowerbound-full --M 4 --N 3").code, 2);
}

TEST_F(Cli, BenchPrintsCsv) {
    const CliRun r = run_cli("bench chain --sizes 4,8");
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "n,m,edge_traversals,field_ops,max_coeff_bits,wall_time");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 2);
    EXPECT_EQ(run_cli("bench grid --sizes 4").code, 2);
}

TEST_F(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run_cli("").code, 2);
    EXPECT_EQ(run_cli("solve").code, 2);
    EXPECT_EQ(run_cli("frobnicate").code, 2);
}
