#include "feie/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>
#include <Eigen/SparseCore>

namespace feie {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

LinearOperator LinearOperator::from_matrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("LinearOperator: matrix must be square");
  return {static_cast<int>(m.rows()), [m](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = m * x; }};
}

SolveResult gmres(const LinearOperator& op, const Eigen::VectorXd& rhs, const GmresOptions& opts) {
  const auto t0 = Clock::now();
  const int n = op.dim;
  if (rhs.size() != n) throw InvalidArgument("gmres: right-hand side has the wrong length");
  if (opts.restart < 1 || opts.max_iters < 1) throw InvalidArgument("gmres: restart and max_iters must be positive");

  SolveResult res;
  res.x = Eigen::VectorXd::Zero(n);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    res.report.converged = true;
    res.report.wall_seconds = seconds_since(t0);
    return res;
  }

  const int m = opts.restart;
  Eigen::MatrixXd v(n, m + 1);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);
  Eigen::VectorXd w(n), r(n);

  int total = 0;
  bool done = false;
  while (!done && total < opts.max_iters) {
    op.apply(res.x, r);
    r = rhs - r;
    const double beta = r.norm();
    if (beta / bnorm <= opts.tol) break;
    v.col(0) = r / beta;
    g.setZero();
    g[0] = beta;
    h.setZero();

    int k = 0;
    bool breakdown = false;
    while (k < m && total < opts.max_iters) {
      op.apply(v.col(k), w);
      for (int i = 0; i <= k; ++i) {
        h(i, k) = w.dot(v.col(i));
        w -= h(i, k) * v.col(i);
      }
      const double sub = w.norm();
      h(k + 1, k) = sub;
      for (int i = 0; i < k; ++i) {
        const double tmp = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
        h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
        h(i, k) = tmp;
      }
      const double denom = std::hypot(h(k, k), sub);
      if (denom == 0.0) {
        throw SolverError("gmres: breakdown (singular Hessenberg matrix) at iteration " +
                          std::to_string(total + 1));
      }
      cs[k] = h(k, k) / denom;
      sn[k] = sub / denom;
      h(k, k) = denom;
      h(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++k;
      ++total;
      const double est = std::abs(g[k]) / bnorm;
      res.report.residual_history.push_back(est);
      if (est <= opts.tol) {
        done = true;
        break;
      }
      if (sub <= 1e-14 * beta) {
        breakdown = true;
        break;
      }
      v.col(k) = w / sub;
    }
    const Eigen::VectorXd y = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    res.x += v.leftCols(k) * y;
    if (breakdown) {
      op.apply(res.x, r);
      if ((rhs - r).norm() / bnorm > opts.tol) {
        throw SolverError("gmres: breakdown (zero Arnoldi vector) at iteration " + std::to_string(total));
      }
      done = true;
    }
  }

  op.apply(res.x, r);
  res.report.iterations = total;
  res.report.relative_residual = (rhs - r).norm() / bnorm;
  // the recomputed residual may sit slightly above the Arnoldi estimate
  res.report.converged = res.report.relative_residual <= 10.0 * opts.tol;
  res.report.wall_seconds = seconds_since(t0);
  return res;
}

Eigen::VectorXd dense_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs) {
  if (a.rows() != a.cols()) throw InvalidArgument("dense_solve: matrix must be square");
  if (rhs.size() != a.rows()) throw InvalidArgument("dense_solve: right-hand side has the wrong length");
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const auto& f = lu.matrixLU();
  const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double tiny = static_cast<double>(a.rows()) * std::numeric_limits<double>::epsilon() * scale;
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    if (!(std::abs(f(i, i)) > tiny)) {
      throw SolverError("dense_solve: matrix is singular to working precision (pivot " +
                        std::to_string(i) + ")");
    }
  }
  return lu.solve(rhs);
}

SymmetricGaussSeidel::SymmetricGaussSeidel(const SparseMatrix& a) : a_(a), diag_(a.diagonal()) {
  for (Eigen::Index i = 0; i < diag_.size(); ++i) {
    if (!(diag_[i] > 0.0)) throw InvalidArgument("SymmetricGaussSeidel: non-positive diagonal entry");
  }
}

void SymmetricGaussSeidel::apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
  Eigen::VectorXd y = a_.triangularView<Eigen::Lower>().solve(r);
  y.array() *= diag_.array();
  z = a_.triangularView<Eigen::Upper>().solve(y);
}

SolveResult pcg(const SparseMatrix& a, const Eigen::VectorXd& rhs, const Preconditioner& precond,
                const PcgOptions& opts, const Eigen::VectorXd& x0) {
  const auto t0 = Clock::now();
  const Eigen::Index n = a.rows();
  if (a.cols() != n || rhs.size() != n) throw InvalidArgument("pcg: dimension mismatch");
  SolveResult res;
  res.x = x0.size() == n ? x0 : Eigen::VectorXd::Zero(n);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    res.x.setZero();
    res.report.converged = true;
    return res;
  }
  Eigen::VectorXd r = rhs - a * res.x;
  Eigen::VectorXd z(n), p(n), q(n);
  precond.apply(r, z);
  p = z;
  double rz = r.dot(z);
  int it = 0;
  double rel = r.norm() / bnorm;
  while (rel > opts.tol && it < opts.max_iters) {
    q.noalias() = a * p;
    const double pq = p.dot(q);
    if (!(pq > 0.0)) {
      throw SolverError("pcg: matrix is not positive definite (iteration " + std::to_string(it + 1) + ")");
    }
    const double alpha = rz / pq;
    res.x += alpha * p;
    r -= alpha * q;
    ++it;
    rel = r.norm() / bnorm;
    res.report.residual_history.push_back(rel);
    if (rel <= opts.tol) break;
    precond.apply(r, z);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  res.report.iterations = it;
  res.report.relative_residual = (rhs - a * res.x).norm() / bnorm;
  res.report.converged = res.report.relative_residual <= 10.0 * opts.tol;
  res.report.wall_seconds = seconds_since(t0);
  return res;
}

}  // namespace feie
