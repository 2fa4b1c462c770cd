#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sramm/bss.hpp"
#include "sramm/cli.hpp"
#include "sramm/error.hpp"
#include "sramm/generators.hpp"
#include "sramm/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace sramm;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = 0;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.status = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sramm_io_cli";
  fs::create_directories(dir);
  return dir / name;
}

void check_report_shape(const std::string& csv) {
  const auto rows = parse_csv(csv);
  REQUIRE(rows.size() >= 2);
  for (const auto& row : rows) CHECK(row.size() == rows.front().size());
  CHECK(rows.back().front() == "summary");
  CHECK(csv.find('\r') == std::string::npos);
}

}  // namespace

TEST_CASE("matrix round trip is exact") {
  Matrix a = gaussian_matrix(7, 5, 1);
  a(0, 0) = 1.0 / 3.0;
  a(1, 1) = -0.0;
  a(2, 2) = 1e-300;
  a(3, 3) = std::numeric_limits<double>::max();
  std::stringstream ss;
  write_matrix(ss, a);
  CHECK(read_matrix(ss) == a);

  const fs::path p = scratch("round.txt");
  write_matrix(p, a);
  CHECK(read_matrix(p) == a);
  CHECK(slurp(p).rfind("7,5\n", 0) == 0);
}

TEST_CASE("matrix parsing errors") {
  auto parse = [](const std::string& text) {
    std::istringstream is(text);
    return read_matrix(is);
  };
  CHECK_THROWS_AS(parse(""), Error);
  CHECK_THROWS_AS(parse("2,2\n1,2\n"), Error);
  CHECK_THROWS_AS(parse("1,2\n1\n"), Error);
  CHECK_THROWS_AS(parse("1,2\n1,x\n"), Error);
  CHECK_THROWS_AS(parse("1,1\nnan\n"), Error);
  CHECK_THROWS_AS(read_matrix(scratch("missing.txt")), Error);
  try {
    parse("2,2\n1,2\n3\n");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("selection round trip") {
  RowSelection sel;
  sel.indices = {0, 4, 9};
  sel.scales = {1.5, 0.1, 2.0 / 3.0};
  sel.nnz = 3;
  std::stringstream ss;
  write_selection(ss, sel);
  const RowSelection back = read_selection(ss);
  CHECK(back.indices == sel.indices);
  CHECK(back.scales == sel.scales);
  CHECK(back.nnz == 3);
}

TEST_CASE("gen is deterministic") {
  const fs::path p1 = scratch("gen1.txt"), p2 = scratch("gen2.txt");
  for (const auto& p : {p1, p2}) {
    const Run r = invoke({"gen", "--spectrum", "geom:0.5", "--n", "64", "--d", "16", "--seed", "7", "--out", p.string()});
    CHECK(r.status == cli::kExitOk);
  }
  CHECK(slurp(p1) == slurp(p2));
  const Matrix a = read_matrix(p1);
  CHECK(a.rows() == 64);
  CHECK(singular_values(a)(1) == doctest::Approx(0.5));
}

TEST_CASE("amm with the identity hook") {
  const Run r = invoke({"amm", "--family", "identity", "--trials", "1", "--n", "32", "--d", "4"});
  CHECK(r.status == cli::kExitOk);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"trial", "error", "bound", "pass"});
  CHECK(rows[1][1] == "0");
  CHECK(rows[1][3] == "true");
  check_report_shape(r.out);
}

TEST_CASE("amm from files") {
  const fs::path pa = scratch("a.txt"), pb = scratch("b.txt"), out = scratch("amm.csv");
  write_matrix(pa, gen_decay(64, 8, {1, 0.5, 0.25}, 1));
  write_matrix(pb, gen_decay(64, 6, {1, 0.5}, 2));
  const Run r = invoke({"amm", "--a", pa.string(), "--b", pb.string(), "--family", "sparse", "--m", "32", "--s", "2",
                     "--k", "2", "--eps", "0.45", "--trials", "20", "--out", out.string()});
  CHECK((r.status == cli::kExitOk || r.status == cli::kExitCheckFailed));
  check_report_shape(slurp(out));
  CHECK(parse_csv(slurp(out)).size() == 22);
  CHECK(r.out.find("failure_rate=") != std::string::npos);
}

TEST_CASE("exit status follows the summary threshold") {
  // A 1-row Gaussian sketch is far too small: almost every trial fails.
  const Run bad = invoke({"amm", "--family", "gaussian", "--m", "1", "--trials", "20", "--n", "64", "--d", "8"});
  CHECK(bad.status == cli::kExitCheckFailed);
  const auto rows = parse_csv(bad.out);
  CHECK(std::stod(rows.back()[3]) < 0.9);
}

TEST_CASE("usage errors name the offending key") {
  const std::vector<std::pair<std::vector<std::string>, std::string>> cases{
      {{"amm", "--eps", "-1", "--n", "16", "--d", "4"}, "eps"},
      {{"amm", "--family", "fourier"}, "family"},
      {{"amm", "--k", "0"}, "k"},
      {{"amm", "--trials", "0"}, "trials"},
      {{"amm", "--delta", "0.7"}, "delta"},
      {{"amm", "--m", "9999", "--n", "64", "--d", "8"}, "m"},
      {{"amm", "--spectrum", "zipf:3"}, "spectrum"},
      {{"amm", "--eps", "abc"}, "eps"},
      {{"krr", "--lambda", "0"}, "lambda"},
      {{"bss", "--method", "greedy", "--out", scratch("x.sel").string()}, "method"},
      {{"amm", "--family", "composed", "--chain", "gaussian:8,sparse:x:1"}, "chain"},
  };
  for (const auto& [args, key] : cases) {
    const Run r = invoke(args);
    INFO(args[1], " ", key);
    CHECK(r.status == cli::kExitUsage);
    CHECK(r.err.find(key) != std::string::npos);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  }
  CHECK(invoke({}).status == cli::kExitUsage);
  CHECK(invoke({"frobnicate"}).status == cli::kExitUsage);
  CHECK(invoke({"amm", "--a", scratch("does_not_exist.txt").string()}).status == cli::kExitUsage);
}

TEST_CASE("config file with flag override") {
  const fs::path cfg = scratch("exp.cfg");
  {
    std::ofstream os(cfg);
    os << "# identity run\nfamily = identity\ntrials=3\nn=16\nd=4\n";
  }
  const Run from_file = invoke({"amm", "--config", cfg.string()});
  CHECK(from_file.status == cli::kExitOk);
  CHECK(parse_csv(from_file.out).size() == 5);

  const Run overridden = invoke({"amm", "--config", cfg.string(), "--trials", "2"});
  CHECK(parse_csv(overridden.out).size() == 4);

  {
    std::ofstream os(cfg);
    os << "trials\n";
  }
  const Run broken = invoke({"amm", "--config", cfg.string()});
  CHECK(broken.status == cli::kExitUsage);
  CHECK(broken.err.find("config") != std::string::npos);
}

TEST_CASE("ose-moment report") {
  const Run r = invoke({"ose-moment", "--family", "identity", "--n", "32", "--dim", "3", "--trials", "4"});
  CHECK(r.status == cli::kExitOk);
  const auto rows = parse_csv(r.out);
  CHECK(rows[0] == std::vector<std::string>{"trial", "distortion", "moment_term", "threshold"});
  check_report_shape(r.out);
}

TEST_CASE("bss writes a selection and a verification line") {
  const fs::path sel = scratch("sel.txt");
  const Run r = invoke({"bss", "--n", "128", "--d", "8", "--k", "4", "--eps", "0.6", "--out", sel.string()});
  CHECK(r.status == cli::kExitOk);
  CHECK(r.out.find("pass=true") != std::string::npos);
  const RowSelection s = read_selection(sel);
  CHECK(s.nnz > 0);
  CHECK(s.nnz <= 100);

  const Run imp = invoke({"bss", "--method", "importance", "--samples", "64", "--n", "128", "--d", "8", "--out",
                       scratch("imp.txt").string()});
  CHECK(imp.out.find("method=importance") != std::string::npos);
}

TEST_CASE("solver reports") {
  const Run reg = invoke({"regress", "--n", "256", "--d", "16", "--k", "32", "--trials", "5"});
  CHECK(parse_csv(reg.out)[0] == std::vector<std::string>{"trial", "err_sq", "bound", "pass"});
  check_report_shape(reg.out);

  const Run low = invoke({"lowrank", "--n", "128", "--d", "32", "--spectrum", "poly:1", "--k", "8", "--trials", "5"});
  check_report_shape(low.out);

  const Run krr = invoke({"krr", "--n", "64", "--trials", "3", "--family", "identity"});
  REQUIRE(krr.status == cli::kExitOk);
  CHECK(parse_csv(krr.out)[0] == std::vector<std::string>{"trial", "gap", "tolerance", "pass"});
  check_report_shape(krr.out);
}

TEST_CASE("verify-conditions report") {
  const Run r = invoke({"verify-conditions", "--n", "2048", "--d", "8", "--spectrum", "list:1", "--k", "2", "--eps",
                     "0.9", "--m", "1500", "--seed", "4"});
  CHECK(r.status == cli::kExitOk);
  const auto rows = parse_csv(r.out);
  CHECK(rows[0] == std::vector<std::string>{"check", "dimension", "required", "measured", "pass"});
  CHECK(rows.back().back() == "true");
  check_report_shape(r.out);
}

TEST_CASE("calibrated constant reproduces at the amm command") {
  const std::vector<std::string> common{"--family", "gaussian", "--k", "8", "--eps", "0.25", "--delta", "0.05",
                                        "--n", "512", "--d", "64", "--seed", "3"};
  std::vector<std::string> cal_args{"calibrate", "--trials", "100"};
  cal_args.insert(cal_args.end(), common.begin(), common.end());
  const Run cal = invoke(cal_args);
  REQUIRE(cal.status == cli::kExitOk);
  REQUIRE(cal.out.rfind("c=", 0) == 0);
  const std::string c = cal.out.substr(2, cal.out.size() - 3);

  std::vector<std::string> amm_args{"amm", "--trials", "200", "--c", c, "--out", scratch("cal_amm.csv").string()};
  amm_args.insert(amm_args.end(), common.begin(), common.end());
  const Run amm = invoke(amm_args);
  CHECK(amm.status == cli::kExitOk);
}
