// Convergence-study driver: runs a built-in case over refinement levels and
// writes a CSV record plus a readable table.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

#include "feie/harness.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 2, kSolver = 3, kVerification = 4 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FE-IE convergence study"};

  std::string case_name;
  int degree = 2;
  int qbx_order = 0;
  int levels = 0;
  double h0 = 0.0;
  int panels0 = 0;
  std::string out_path;
  int samples = 400;
  std::string mode = "matrix-free";
  std::string solver = "tensor";
  std::optional<double> kappa, c, inner_box;
  bool no_timing = false;
  bool quiet = false;
  bool list = false;
  feie::ReferenceRecipe ref;
  int nodes_per_panel = 8;
  feie::GmresOptions gmres;

  app.add_option("--case", case_name, "Test case name (see --list-cases)");
  app.add_flag("--list-cases", list, "Print the built-in case names and exit");
  app.add_option("--p", degree, "FE polynomial degree")->check(CLI::Range(1, 4));
  app.add_option("--p-qbx", qbx_order, "QBX expansion order (default p + 1)")->check(CLI::Range(1, 20));
  app.add_option("--levels", levels, "Number of refinement levels (default per case)")->check(CLI::Range(2, 10));
  app.add_option("--h0", h0, "Coarsest FE mesh size (default per case)")->check(CLI::PositiveNumber);
  app.add_option("--panels0", panels0, "Panel count at the coarsest level (default per case)")
      ->check(CLI::Range(4, 100000));
  app.add_option("--nodes-per-panel", nodes_per_panel, "Gauss-Legendre nodes per panel")->check(CLI::Range(4, 32));
  app.add_option("--out", out_path, "CSV output file (default: CSV on stdout after the table)");
  app.add_option("--samples", samples, "Error sampling grid points per axis")->check(CLI::Range(2, 5000));
  app.add_option("--mode", mode, "Schur operator handling")
      ->check(CLI::IsMember({"matrix-free", "assembled"}));
  app.add_option("--solver", solver, "FE linear solver")->check(CLI::IsMember({"tensor", "direct", "iterative"}));
  app.add_option("--kappa", kappa, "Interface flux ratio (interface cases)");
  app.add_option("--c", c, "Interface value ratio (interface cases)");
  app.add_option("--inner-box", inner_box, "Half-width of the inner FE square (interface cases)")
      ->check(CLI::PositiveNumber);
  app.add_option("--ref-p", ref.degree, "Reference solution FE degree")->check(CLI::Range(1, 4));
  app.add_option("--ref-p-qbx", ref.qbx_order, "Reference solution QBX order")->check(CLI::Range(1, 20));
  app.add_option("--ref-h", ref.h_fe, "Reference solution FE mesh size")->check(CLI::PositiveNumber);
  app.add_option("--ref-panels", ref.panels, "Reference solution panel count")->check(CLI::Range(4, 100000));
  app.add_option("--gmres-restart", gmres.restart, "GMRES restart length")->check(CLI::Range(1, 1000));
  app.add_option("--gmres-tol", gmres.tol, "GMRES relative residual tolerance")->check(CLI::PositiveNumber);
  app.add_flag("--no-timing", no_timing, "Write wall_s = 0 for reproducible output");
  app.add_flag("--quiet", quiet, "No progress messages");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (list) {
    for (const auto& n : feie::case_names()) std::cout << n << '\n';
    return kOk;
  }
  if (case_name.empty()) {
    std::cerr << "error: --case is required\n" << app.help();
    return kUsage;
  }

  feie::StudyOptions opts;
  opts.degree = degree;
  opts.qbx_order = qbx_order > 0 ? qbx_order : degree + 1;
  opts.levels = levels;
  opts.h0 = h0;
  opts.panels0 = panels0;
  opts.nodes_per_panel = nodes_per_panel;
  opts.samples = samples;
  opts.mode = mode == "assembled" ? feie::SolveMode::Assembled : feie::SolveMode::MatrixFree;
  opts.backend = solver == "direct"      ? feie::FeBackend::Direct
                 : solver == "iterative" ? feie::FeBackend::Iterative
                                         : feie::FeBackend::Tensor;
  opts.reference = ref;
  opts.gmres = gmres;
  opts.timing = !no_timing;
  if (!quiet) opts.progress = [](const std::string& m) { std::cerr << "[feie] " << m << std::endl; };

  try {
    const feie::TestCase tc = feie::make_case(case_name, {kappa, c, inner_box});
    const feie::ConvergenceRecord rec = feie::run_convergence(tc, opts);
    feie::print_table(rec, std::cout);
    if (!out_path.empty()) {
      std::ofstream f(out_path);
      if (!f) {
        std::cerr << "error: cannot open " << out_path << " for writing\n";
        return kUsage;
      }
      feie::write_csv(rec, f);
    } else {
      feie::write_csv(rec, std::cout);
    }
  } catch (const feie::VerificationError& e) {
    std::cerr << "verification failed: " << e.what() << '\n';
    return kVerification;
  } catch (const feie::UnsupportedCaseError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return kUsage;
  } catch (const feie::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const feie::Error& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  }
  return kOk;
}
