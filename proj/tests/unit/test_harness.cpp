#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "feie/harness.hpp"

using namespace feie;

namespace {

ConvergenceRecord quick_study(const std::string& name, int levels, bool timing = false) {
  StudyOptions o;
  o.degree = 2;
  o.qbx_order = 3;
  o.levels = levels;
  o.samples = 120;
  o.timing = timing;
  return run_convergence(make_case(name), o);
}

#ifdef FEIE_STUDY_PATH
struct CliResult {
  int code;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string log = (dir / "feie_cli_test.log").string();
  const std::string cmd = std::string(FEIE_STUDY_PATH) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream f(log);
  std::stringstream ss;
  ss << f.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}
#endif

}  // namespace

TEST(ComputeErrors, ZeroForIdenticalFields) {
  const SampleSet s = sample_region(Rect{0, 1, 0, 1}, 50, [](const Point&) { return true; });
  auto u = [](const Point& x) { return std::sin(x.x()) + x.y(); };
  const ErrorNorms e = compute_errors(u, u, s);
  EXPECT_EQ(e.linf, 0.0);
  EXPECT_EQ(e.l2, 0.0);
}

TEST(ComputeErrors, ConstantOffsetOnUnitArea) {
  const SampleSet s = sample_region(Rect{0, 1, 0, 1}, 64, [](const Point&) { return true; });
  EXPECT_EQ(static_cast<int>(s.points.size()), 64 * 64);
  EXPECT_DOUBLE_EQ(s.cell_area, 1.0 / (64 * 64));
  auto u = [](const Point& x) { return x.x() * x.y(); };
  auto v = [u](const Point& x) { return u(x) + 1e-3; };
  const ErrorNorms e = compute_errors(v, u, s);
  EXPECT_NEAR(e.linf, 1e-3, 1e-15);
  EXPECT_NEAR(e.l2, 1e-3, 1e-12);
}

TEST(ComputeErrors, RegionRestrictionAndEmptySet) {
  const SampleSet half = sample_region(Rect{0, 1, 0, 1}, 40, [](const Point& x) { return x.x() < 0.5; });
  EXPECT_EQ(static_cast<int>(half.points.size()), 40 * 20);
  const SampleSet none = sample_region(Rect{0, 1, 0, 1}, 40, [](const Point&) { return false; });
  auto u = [](const Point&) { return 0.0; };
  EXPECT_THROW(compute_errors(u, u, none), InvalidArgument);
  const std::vector<double> a{1.0, 2.0}, b{1.0};
  EXPECT_THROW(compute_errors(a, b, 0.5), InvalidArgument);
}

TEST(Eoc, TrivialExamples) {
  const std::vector<double> e1{1e-2, 2.5e-3}, h1{0.1, 0.05};
  EXPECT_NEAR(eoc(e1, h1)[0], 2.0, 1e-14);
  const std::vector<double> e2{1e-3, 1e-3};
  EXPECT_EQ(eoc(e2, h1)[0], 0.0);
  const std::vector<double> e3{4.564e-4, 9.333e-5}, h3{0.04, 0.02};
  EXPECT_NEAR(eoc(e3, h3)[0], 2.3, 0.05);
  const std::vector<double> e4{1.0, 0.5, 0.125}, h4{0.4, 0.2, 0.1};
  const auto r = eoc(e4, h4);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0], 1.0, 1e-14);
  EXPECT_NEAR(r[1], 2.0, 1e-14);
}

TEST(Eoc, RejectsInvalidInput) {
  const std::vector<double> h{0.1, 0.05};
  const std::vector<double> zero{1e-3, 0.0}, neg{-1e-3, 1e-4}, one{1e-3};
  EXPECT_THROW(eoc(zero, h), InvalidArgument);
  EXPECT_THROW(eoc(neg, h), InvalidArgument);
  EXPECT_THROW(eoc(one, std::vector<double>{0.1}), InvalidArgument);
  const std::vector<double> up{0.05, 0.1}, ok{1e-2, 1e-3};
  EXPECT_THROW(eoc(ok, up), InvalidArgument);
}

TEST(Cases, KnownNamesAndErrors) {
  for (const std::string& n : case_names()) EXPECT_NO_THROW(make_case(n)) << n;
  EXPECT_THROW(make_case("interior-nope"), InvalidArgument);
  EXPECT_THROW(make_case("interface-quadlog", {-1.0, 1.0, {}}), UnsupportedCaseError);
  EXPECT_THROW(make_case("interior-fc", {2.0, {}, {}}), InvalidArgument);
}

TEST(Cases, ExactCasesPassVerification) {
  for (const std::string& n : case_names()) {
    const TestCase tc = make_case(n);
    if (!tc.has_exact()) continue;
    EXPECT_NO_THROW(verify_case(tc, build_panels(tc.curve, 56, 8))) << n;
  }
}

TEST(Cases, OverriddenJumpRatiosStayConsistent) {
  const TestCase tc = make_case("interface-quadlog", {2.0, 0.5, {}});
  EXPECT_EQ(tc.interface.kappa, 2.0);
  EXPECT_EQ(tc.interface.c, 0.5);
  EXPECT_NO_THROW(verify_case(tc, build_panels(tc.curve, 56, 8)));
}

TEST(Cases, WrongSourceFailsVerification) {
  TestCase tc = make_case("interior-harmonic");
  tc.interior.f = [](const Point&) { return 1.0; };
  EXPECT_THROW(verify_case(tc, build_panels(tc.curve, 30, 8)), VerificationError);
  TestCase jump = make_case("interface-quadlog");
  jump.interface.a = [](const Point&) { return 0.0; };
  EXPECT_THROW(verify_case(jump, build_panels(jump.curve, 30, 8)), VerificationError);
}

TEST(RunConvergence, ExactReproductionIsFlagged) {
  // a constant lies in the FE space and the density vanishes, so both error
  // columns sit at solver tolerance
  TestCase tc = make_case("exclusion-starfish");
  const double c0 = 0.75;
  auto cst = [c0](const Point&) { return c0; };
  tc.name = "exclusion-constant";
  tc.exclusion.f = [](const Point&) { return 0.0; };
  tc.exclusion.g = cst;
  tc.exclusion.g_outer = cst;
  tc.exact = cst;
  tc.grad_exact = [](const Point&) -> Point { return Point::Zero(); };
  StudyOptions o;
  o.levels = 2;
  o.samples = 120;
  o.timing = false;
  const ConvergenceRecord rec = run_convergence(tc, o);
  ASSERT_EQ(rec.rows.size(), 2u);
  for (const ConvergenceRow& r : rec.rows) {
    EXPECT_LT(r.err_inf, 1e-10);
    EXPECT_LT(r.err_l2, 1e-10);
  }
  EXPECT_TRUE(std::isnan(rec.rows[1].eoc_inf));
  EXPECT_TRUE(std::isnan(rec.rows[1].eoc_l2));
  EXPECT_FALSE(rec.meta("eoc_flag").empty());
}

TEST(RunConvergence, InteriorLinearIsLimitedByTheLayerPotential) {
  // u1 vanishes, so the whole error is the QBX error of D gamma reproducing x + y
  const ConvergenceRecord rec = quick_study("interior-linear", 2);
  ASSERT_EQ(rec.rows.size(), 2u);
  EXPECT_LT(rec.rows[0].err_inf, 1e-4);
  EXPECT_LT(rec.rows[1].err_inf, rec.rows[0].err_inf / 4);
  EXPECT_TRUE(rec.meta("eoc_flag").empty());
}

TEST(RunConvergence, RowsHalveAndFillAllFields) {
  const ConvergenceRecord rec = quick_study("interior-harmonic", 3);
  ASSERT_EQ(rec.rows.size(), 3u);
  for (std::size_t i = 0; i < rec.rows.size(); ++i) {
    const ConvergenceRow& r = rec.rows[i];
    EXPECT_EQ(r.level, static_cast<int>(i));
    EXPECT_EQ(r.case_name, "interior-harmonic");
    EXPECT_GT(r.n_boundary, 0);
    EXPECT_GT(r.n_dofs, 0);
    EXPECT_EQ(r.wall_s, 0.0);
    if (i > 0) {
      EXPECT_NEAR(r.h_fe / rec.rows[i - 1].h_fe, 0.5, 0.05);
      EXPECT_NEAR(r.h_ie / rec.rows[i - 1].h_ie, 0.5, 0.05);
      EXPECT_EQ(r.n_boundary, 2 * rec.rows[i - 1].n_boundary);
      EXPECT_NEAR(r.eoc_inf, std::log2(rec.rows[i - 1].err_inf / r.err_inf), 1e-12);
    }
  }
  EXPECT_EQ(rec.meta("case"), "interior-harmonic");
  EXPECT_NE(rec.meta("samples").find("120"), std::string::npos);
}

TEST(RunConvergence, InterfaceRowsSplitBySide) {
  StudyOptions o;
  o.levels = 2;
  o.samples = 80;
  o.timing = false;
  const ConvergenceRecord rec = run_convergence(make_case("interface-quadlog"), o);
  EXPECT_EQ(rec.series("interface-quadlog:interior").size(), 2u);
  EXPECT_EQ(rec.series("interface-quadlog:exterior").size(), 2u);
  for (const ConvergenceRow& r : rec.rows) EXPECT_GT(r.outer_iters, 0);
  std::ostringstream table;
  print_table(rec, table);
  EXPECT_NE(table.str().find("interface-quadlog:interior"), std::string::npos);
  EXPECT_NE(table.str().find("interface-quadlog:exterior"), std::string::npos);
}

TEST(Csv, RoundTripIsExact) {
  ConvergenceRecord rec;
  rec.metadata = {{"case", "demo"}, {"note", "a=b c"}};
  ConvergenceRow a;
  a.case_name = "demo";
  a.level = 0;
  a.h_fe = 0.04;
  a.h_ie = 0.10471975511965977;
  a.n_boundary = 240;
  a.n_dofs = 3721;
  a.err_inf = 1.0321e-5;
  a.err_l2 = 3.3333333333333335e-7;
  a.outer_iters = 0;
  a.inner_iters = 12345;
  a.wall_s = 0.125;
  ConvergenceRow b = a;
  b.level = 1;
  b.h_fe = 0.02;
  b.err_inf = 1.1e-6;
  b.eoc_inf = 3.2299999999999999;
  b.eoc_l2 = 3.5;
  rec.rows = {a, b};
  std::stringstream ss;
  write_csv(rec, ss);
  const std::string text = ss.str();
  EXPECT_NE(text.find(kCsvHeader), std::string::npos);
  const ConvergenceRecord back = read_csv(ss);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_TRUE(back.rows[0] == a);
  EXPECT_TRUE(back.rows[1] == b);
  EXPECT_TRUE(std::isnan(back.rows[0].eoc_inf));
  EXPECT_EQ(back.metadata, rec.metadata);
}

TEST(Csv, HeaderIsExact) {
  EXPECT_STREQ(kCsvHeader, "case,level,h_fe,h_ie,n_boundary,n_dofs,err_inf,err_l2,eoc_inf,eoc_l2,outer_iters,inner_iters,wall_s");
  std::stringstream bad("# case=x\nnot,a,header\n");
  EXPECT_THROW(read_csv(bad), InvalidArgument);
}

TEST(Csv, StudyRoundTripAndDeterminism) {
  const ConvergenceRecord r1 = quick_study("exclusion-starfish", 2);
  const ConvergenceRecord r2 = quick_study("exclusion-starfish", 2);
  std::stringstream s1, s2;
  write_csv(r1, s1);
  write_csv(r2, s2);
  EXPECT_EQ(s1.str(), s2.str());
  const ConvergenceRecord back = read_csv(s1);
  ASSERT_EQ(back.rows.size(), r1.rows.size());
  for (std::size_t i = 0; i < back.rows.size(); ++i) EXPECT_TRUE(back.rows[i] == r1.rows[i]);
}

#ifdef FEIE_STUDY_PATH
TEST(Cli, UnknownCaseIsUsageError) {
  const CliResult r = run_cli("--case no-such-case");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("unknown case"), std::string::npos);
  EXPECT_EQ(run_cli("--p 2").code, 2);
  EXPECT_EQ(run_cli("--case interior-fc --bogus-flag").code, 2);
  EXPECT_EQ(run_cli("--case interior-fc --kappa 2").code, 2);
}

TEST(Cli, UnsupportedKappaEqualsMinusC) {
  const CliResult r = run_cli("--case interface-quadlog --kappa -1 --c 1 --levels 2");
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("unsupported"), std::string::npos);
}

TEST(Cli, InteriorFcWritesThreeRows) {
  const std::string out = (std::filesystem::temp_directory_path() / "feie_cli_fc.csv").string();
  const CliResult r = run_cli("--case interior-fc --p 2 --p-qbx 3 --levels 3 --quiet --out " + out);
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream f(out);
  const ConvergenceRecord rec = read_csv(f);
  EXPECT_EQ(rec.rows.size(), 3u);
  EXPECT_EQ(rec.meta("reference_scaled"), "");
  for (const ConvergenceRow& row : rec.rows) EXPECT_EQ(row.case_name, "interior-fc");
  std::remove(out.c_str());
}

TEST(Cli, ListCases) {
  const CliResult r = run_cli("--list-cases");
  EXPECT_EQ(r.code, 0);
  for (const std::string& n : case_names()) EXPECT_NE(r.out.find(n), std::string::npos);
}
#endif
