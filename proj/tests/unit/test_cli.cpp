#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include "dle/cli/app.hpp"
#include "test_util.hpp"

using namespace dle;
using namespace dle::cli;
using dle::testing::read_text;
using dle::testing::TempDir;
using dle::testing::write_text;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DLE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string expect_config_error(const std::string& text) {
  try {
    parse_config(json::parse(text), ".");
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ConfigError for " << text;
  return {};
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  Overrides ov;
  ov.method = "eba-bdf";
  ov.m_max = 7;
  ov.h = 0.01;
  ov.seed = 99;
  const RunConfig rc =
      parse_config(json::parse(R"({"problem": {"kind": "diagonal", "n": 6}})"), ".", ov);
  EXPECT_EQ(rc.problem.kind, ProblemKind::diagonal);
  EXPECT_EQ(rc.solver.method, Method::eba_bdf);
  EXPECT_EQ(rc.solver.m_max, 7);
  EXPECT_EQ(rc.problem.h, 0.01);
  EXPECT_EQ(rc.problem.seed, 99u);
  EXPECT_EQ(rc.solver.tol, 1e-10);
  EXPECT_EQ(rc.echo["solver"]["method"], "eba-bdf");
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(expect_config_error(R"({"problem": {"n0": 10, "bogus": 1}})").find("problem.bogus"),
            std::string::npos);
  EXPECT_NE(expect_config_error(R"({"solver": {"tol": "small"}})").find("solver.tol"),
            std::string::npos);
  EXPECT_NE(expect_config_error(R"({"solver": {"m_max": 2.5}})").find("solver.m_max"),
            std::string::npos);
  EXPECT_NE(expect_config_error(R"({"problem": {"kind": "poisson"}})").find("problem.kind"),
            std::string::npos);
  EXPECT_NE(expect_config_error(R"({"solver": {"method": "rk4"}})").find("solver.method"),
            std::string::npos);
  EXPECT_NE(expect_config_error(R"({"extra": {}})").find("extra"), std::string::npos);
  EXPECT_NE(expect_config_error(R"({"sweep": {"axis": "q"}})").find("sweep.axis"),
            std::string::npos);
  EXPECT_NE(expect_config_error(R"({"solver": {"tol": -1}})").find("solver"), std::string::npos);
}

TEST(CmdSolve, ZeroInputConvergesWithExitZero) {
  TempDir dir("cli_zero");
  write_matrix_market(Matrix(Matrix::Zero(6, 2)), dir / "B0.mtx");
  write_text(dir / "cfg.json", R"({
    "problem": {"kind": "diagonal", "n": 6, "b_path": "B0.mtx", "tf": 1.0, "h": 0.1},
    "output": {"dir": "out", "write_factor": true}
  })");
  EXPECT_EQ(run_cli("solve --config " + (dir / "cfg.json").string() + " --out " +
                    (dir / "out").string()),
            0);
  const auto csv = lines(read_text(dir / "out" / "solve.csv"));
  ASSERT_EQ(csv.size(), 12u);
  EXPECT_EQ(csv[0], "t,residual_frobenius,rank");
  EXPECT_EQ(csv[11], "1,0,0");
  const json rep = json::parse(read_text(dir / "out" / "report.json"));
  EXPECT_TRUE(rep["converged"].get<bool>());
  EXPECT_EQ(rep["m"], 1);
  EXPECT_EQ(read_matrix_market_dense(dir / "out" / "factor_Z.mtx").cols(), 0);
}

TEST(CmdSolve, DeterministicCsvAndReport) {
  TempDir dir("cli_det");
  write_text(dir / "cfg.json", R"({
    "problem": {"kind": "convdiff", "n0": 8, "s": 2, "seed": 3, "tf": 1.0, "h": 0.01},
    "solver": {"method": "eba-exp", "m_max": 20, "tol": 1e-9}
  })");
  const std::string cfg = (dir / "cfg.json").string();
  ASSERT_EQ(run_cli("solve --config " + cfg + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli("solve --config " + cfg + " --out " + (dir / "b").string()), 0);
  const std::string a = read_text(dir / "a" / "solve.csv");
  EXPECT_EQ(a, read_text(dir / "b" / "solve.csv"));
  // residual column matches the report exactly, 17 significant digits
  const json rep = json::parse(read_text(dir / "a" / "report.json"));
  const auto rows = lines(a);
  ASSERT_EQ(rows.size(), rep["nodes"].size() + 1);
  for (std::size_t k = 0; k < rep["nodes"].size(); ++k) {
    std::istringstream in(rows[k + 1]);
    std::string t, r, rank;
    std::getline(in, t, ',');
    std::getline(in, r, ',');
    std::getline(in, rank, ',');
    EXPECT_EQ(std::stod(r), rep["nodes"][k]["residual"].get<double>());
    EXPECT_EQ(std::stod(t), rep["nodes"][k]["t"].get<double>());
    if (k > 0) EXPECT_GT(std::stod(t), rep["nodes"][k - 1]["t"].get<double>());
  }
}

TEST(CmdSolve, NonConvergenceExitsOneAndStillReports) {
  TempDir dir("cli_nc");
  write_text(dir / "cfg.json", R"({"problem": {"kind": "convdiff", "n0": 8, "tf": 0.5, "h": 0.01}})");
  EXPECT_EQ(run_cli("solve --config " + (dir / "cfg.json").string() + " --m-max 2 --out " +
                    (dir / "o").string()),
            1);
  const json rep = json::parse(read_text(dir / "o" / "report.json"));
  EXPECT_FALSE(rep["converged"].get<bool>());
  EXPECT_EQ(rep["iterations"].size(), 2u);
}

TEST(CmdSolve, ExitCodesForBadInput) {
  TempDir dir("cli_bad");
  write_text(dir / "bad.json", R"({"problem": {"n0": 4, "typo": 1}})");
  EXPECT_EQ(run_cli("solve --config " + (dir / "bad.json").string()), 2);
  write_text(dir / "broken.json", "{ not json");
  EXPECT_EQ(run_cli("solve --config " + (dir / "broken.json").string()), 2);
  write_text(dir / "missing.json",
             R"({"problem": {"kind": "external", "a_path": "nowhere.mtx"}})");
  EXPECT_EQ(run_cli("solve --config " + (dir / "missing.json").string() + " --out " +
                    (dir / "o").string()),
            3);
  EXPECT_NE(run_cli("solve --config " + (dir / "bad.json").string() + " --bdf-order 5"), 0);
}

TEST(CmdCompare, ZeroInputTracesAreZero) {
  TempDir dir("cmp_zero");
  write_matrix_market(Matrix(Matrix::Zero(5, 1)), dir / "B0.mtx");
  write_text(dir / "cfg.json", R"({
    "problem": {"kind": "diagonal", "n": 5, "b_path": "B0.mtx", "tf": 0.5, "h": 0.1}
  })");
  RunConfig rc = load_config(dir / "cfg.json");
  rc.output.dir = dir / "out";
  std::ostringstream log;
  EXPECT_EQ(cmd_compare(rc, log), 0);
  const auto rows = lines(read_text(dir / "out" / "compare.csv"));
  ASSERT_EQ(rows.size(), 7u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_NE(rows[k].find(",0,0,0,0,0,0"), std::string::npos) << rows[k];
  }
}

TEST(CmdCompare, BdfDifferenceShrinksWithStep) {
  TempDir dir("cmp_h");
  write_text(dir / "cfg.json", R"({
    "problem": {"kind": "convdiff", "n0": 6, "s": 1, "seed": 5, "tf": 0.2, "h": 0.004},
    "solver": {"tol": 1e-9}
  })");
  std::vector<double> diffs;
  for (double h : {0.004, 0.002, 0.001}) {
    Overrides ov;
    ov.h = h;
    RunConfig rc = load_config(dir / "cfg.json", ov);
    rc.output.dir = dir / ("h" + std::to_string(h));
    std::ostringstream log;
    ASSERT_EQ(cmd_compare(rc, log), 0);
    const json rep = json::parse(read_text(rc.output.dir / "report.json"));
    diffs.push_back(rep["eba_bdf"]["final_rel_diff"].get<double>());
  }
  for (std::size_t i = 1; i < diffs.size(); ++i) {
    EXPECT_NEAR(std::log2(diffs[i - 1] / diffs[i]), 2.0, 0.4);
  }
}

TEST(CmdCompare, OracleRefusedAboveGuard) {
  TempDir dir("cmp_big");
  write_text(dir / "cfg.json", R"({
    "problem": {"kind": "diagonal", "n": 501, "s": 1, "tf": 0.02, "h": 0.01},
    "solver": {"tol": 1e-6}
  })");
  RunConfig rc = load_config(dir / "cfg.json");
  rc.output.dir = dir / "out";
  std::ostringstream log;
  cmd_compare(rc, log);
  const json rep = json::parse(read_text(dir / "out" / "report.json"));
  EXPECT_NE(rep["oracle"].get<std::string>().find("refused"), std::string::npos);
  EXPECT_TRUE(rep["eba_exp"]["final_rel_diff"].is_null());
}

TEST(CmdSweep, EmptyValuesGiveHeaderOnly) {
  TempDir dir("sweep_empty");
  write_text(dir / "cfg.json", R"({"sweep": {"axis": "m", "values": []}})");
  EXPECT_EQ(run_cli("sweep --config " + (dir / "cfg.json").string() + " --out " +
                    (dir / "o").string()),
            0);
  EXPECT_EQ(read_text(dir / "o" / "sweep.csv"), "axis_value,residual,error,bound_stable\n");
}

TEST(CmdSweep, BdfOrderAxisOnDiagonalProblem) {
  TempDir dir("sweep_p");
  write_text(dir / "cfg.json", R"({
    "problem": {"kind": "diagonal", "n": 5, "s": 1, "tf": 1.0, "h": 0.01},
    "solver": {"method": "eba-bdf", "tol": 1e-12},
    "sweep": {"axis": "p", "values": [1, 2, 3]}
  })");
  std::vector<std::vector<double>> errors(3);
  for (double h : {0.01, 0.005}) {
    Overrides ov;
    ov.h = h;
    RunConfig rc = load_config(dir / "cfg.json", ov);
    rc.output.dir = dir / "out";
    std::ostringstream log;
    ASSERT_EQ(cmd_sweep(rc, log), 0);
    const auto rows = lines(read_text(dir / "out" / "sweep.csv"));
    ASSERT_EQ(rows.size(), 4u);
    for (int p = 0; p < 3; ++p) {
      std::istringstream in(rows[static_cast<std::size_t>(p) + 1]);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(in, cell, ',')) cells.push_back(cell);
      errors[static_cast<std::size_t>(p)].push_back(std::stod(cells[2]));
    }
  }
  for (int p = 1; p <= 3; ++p) {
    const auto& e = errors[static_cast<std::size_t>(p - 1)];
    EXPECT_NEAR(std::log2(e[0] / e[1]), p, 0.4) << "p = " << p;
  }
}

TEST(CmdSweep, MAxisHasBoundAboveError) {
  TempDir dir("sweep_m");
  write_text(dir / "cfg.json", R"({
    "problem": {"kind": "convdiff", "n0": 8, "s": 2, "tf": 1.0, "h": 0.01},
    "sweep": {"axis": "m", "values": [1, 2, 4, 6]}
  })");
  RunConfig rc = load_config(dir / "cfg.json");
  rc.output.dir = dir / "out";
  std::ostringstream log;
  EXPECT_EQ(cmd_sweep(rc, log), 0);
  const json rep = json::parse(read_text(dir / "out" / "report.json"));
  ASSERT_EQ(rep["points"].size(), 4u);
  for (const json& p : rep["points"]) {
    EXPECT_GE(p["bound_stable"].get<double>(), p["error"].get<double>());
  }
}

TEST(CmdGenProblem, WritesMatrices) {
  TempDir dir("gen");
  write_text(dir / "cfg.json", R"({"problem": {"kind": "heat_fem", "n": 12}})");
  ASSERT_EQ(run_cli("gen-problem --config " + (dir / "cfg.json").string() + " --out " +
                    (dir / "o").string()),
            0);
  EXPECT_EQ(read_matrix_market(dir / "o" / "M.mtx").rows(), 12);
  EXPECT_EQ(read_matrix_market(dir / "o" / "K.mtx").rows(), 12);
  EXPECT_EQ(read_matrix_market_dense(dir / "o" / "B.mtx").cols(), 2);

  write_text(dir / "cd.json", R"({"problem": {"kind": "convdiff", "n0": 4}})");
  ASSERT_EQ(run_cli("gen-problem --config " + (dir / "cd.json").string() + " --out " +
                    (dir / "c").string()),
            0);
  EXPECT_EQ(Matrix(read_matrix_market(dir / "c" / "A.mtx")), Matrix(gen_convdiff(4)));
}
