#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "feie/problems.hpp"

namespace feie {

/// A built-in convergence study: problem data plus exact solution (if known).
struct TestCase {
  std::string name;
  ProblemKind kind = ProblemKind::Interior;
  std::string geometry;  ///< "circle" or "starfish"
  std::shared_ptr<const Curve> curve;

  InteriorProblem interior;
  ExclusionProblem exclusion;
  InterfaceProblem interface;

  /// Exact solution; for interface cases `exact` is u^i and `exact_out` is u^e.
  /// Empty for self-convergence cases.
  ScalarField exact, exact_out;
  VectorField grad_exact, grad_exact_out;

  double h0 = 0.04;  ///< coarsest h_fe
  int panels0 = 30;  ///< panel count at the coarsest level
  int levels = 3;
  bool has_exact() const { return static_cast<bool>(exact); }
};

struct CaseOptions {
  std::optional<double> kappa;       ///< interface cases; a and b are rederived from the exact solution
  std::optional<double> c;
  std::optional<double> inner_box;   ///< half-width of the inner square (interface cases)
};

/// Names accepted by make_case.
std::vector<std::string> case_names();

/// Throws InvalidArgument for unknown names and UnsupportedCaseError for kappa = -c.
TestCase make_case(const std::string& name, const CaseOptions& opts = {});

/// Pre-solve consistency checks of manufactured data: PDE residual of the exact
/// solution and, for interface cases, the jump conditions at the boundary nodes.
/// Throws VerificationError naming the failed check.
void verify_case(const TestCase& tc, const BoundaryDiscretization& disc, double jump_tol = 1e-10);

/// Cell-centred samples of a rectangle restricted to a region.
struct SampleSet {
  PointList points;
  double cell_area = 0.0;
};

SampleSet sample_region(const Rect& box, int density, const std::function<bool(const Point&)>& in_region);

struct ErrorNorms {
  double linf = 0.0;
  double l2 = 0.0;
};

/// L-infinity and cell-area weighted L2 norms of numeric - reference. Throws on
/// an empty sample set or mismatched lengths.
ErrorNorms compute_errors(std::span<const double> numeric, std::span<const double> reference, double cell_area);
ErrorNorms compute_errors(const ScalarField& numeric, const ScalarField& reference, const SampleSet& samples);

/// EOC_i = log(e_{i-1}/e_i) / log(h_{i-1}/h_i); the result has one entry fewer than the input.
std::vector<double> eoc(std::span<const double> errors, std::span<const double> hs);

struct ConvergenceRow {
  std::string case_name;
  int level = 0;
  double h_fe = 0.0;
  double h_ie = 0.0;
  int n_boundary = 0;
  long n_dofs = 0;
  double err_inf = 0.0;
  double err_l2 = 0.0;
  double eoc_inf = std::numeric_limits<double>::quiet_NaN();  ///< NaN on the first level or when flagged
  double eoc_l2 = std::numeric_limits<double>::quiet_NaN();
  int outer_iters = 0;
  long inner_iters = 0;
  double wall_s = 0.0;

  bool operator==(const ConvergenceRow&) const;
};

struct ConvergenceRecord {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<ConvergenceRow> rows;

  std::string meta(const std::string& key) const;  ///< empty if absent
  /// Rows whose case_name equals `name`, in order.
  std::vector<ConvergenceRow> series(const std::string& name) const;
};

/// Reference-solution parameters for self-convergence cases.
struct ReferenceRecipe {
  int degree = 4;
  int qbx_order = 5;
  double h_fe = 0.005;
  int panels = 240;
};

struct StudyOptions {
  int degree = 2;
  int qbx_order = 3;
  int levels = 0;          ///< 0: case default
  double h0 = 0.0;         ///< 0: case default
  int panels0 = 0;         ///< 0: case default
  int nodes_per_panel = 8;
  int samples = 400;
  SolveMode mode = SolveMode::MatrixFree;
  FeBackend backend = FeBackend::Tensor;
  GmresOptions gmres;
  ReferenceRecipe reference;
  bool timing = true;      ///< false writes wall_s = 0 for reproducible output
  double eoc_floor = 1e-10;  ///< EOC is flagged (NaN) when both errors fall below this
  std::function<void(const std::string&)> progress;  ///< optional log sink
};

/// Runs the case at h_fe = h0 / 2^l with panels0 * 2^l panels, l = 0 .. levels-1.
/// Solver errors are rethrown with the level prefixed to the message.
ConvergenceRecord run_convergence(const TestCase& tc, const StudyOptions& opts);

void write_csv(const ConvergenceRecord& rec, std::ostream& out);
ConvergenceRecord read_csv(std::istream& in);
/// Human-readable table, one block per case_name.
void print_table(const ConvergenceRecord& rec, std::ostream& out);

extern const char* const kCsvHeader;

}  // namespace feie
