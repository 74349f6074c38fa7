#include "tableau.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace scuc::detail {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kOptimalityTol = 1e-9;
constexpr double kPrimalTol = 1e-9;
constexpr double kRatioSlack = 1e-12;
constexpr double kResidualTol = 1e-9;
constexpr double kHarrisTol = 1e-9;
constexpr int kDegenerateBeforeBland = 50;
// Entries this far below the largest one in their row/column do not drive scaling.
constexpr double kScaleSpread = 1e-6;

}  // namespace

Tableau::Tableau(const LpModel& model) {
  const auto& vars = model.variables();
  const auto& rows = model.constraints();
  rows_ = static_cast<int>(rows.size());
  offset_ = model.objective_offset();

  auto new_column = [&](double lb, double ub, double cost) {
    lb_.push_back(lb);
    ub_.push_back(ub);
    cost_.push_back(cost);
    return cols_++;
  };

  // Geometric scaling with power-of-two factors, then row equilibration.
  std::vector<double> col_scale(vars.size(), 1.0);
  row_scale_.assign(rows_, 1.0);
  {
    auto pow2 = [](double v) { return std::exp2(std::round(std::log2(v))); };
    std::vector<double> cmin(vars.size());
    std::vector<double> cmax(vars.size());
    for (int pass = 0; pass < 4; ++pass) {
      for (int i = 0; i < rows_; ++i) {
        double lo = kInf;
        double hi = 0.0;
        const Constraint& c = rows[i];
        for (std::size_t e = 0; e < c.index.size(); ++e) {
          const double a = std::abs(c.value[e]) * col_scale[c.index[e]];
          if (a == 0.0) continue;
          lo = std::min(lo, a);
          hi = std::max(hi, a);
        }
        if (hi > 0.0) row_scale_[i] = pow2(1.0 / std::sqrt(std::max(lo, hi * kScaleSpread) * hi));
      }
      std::fill(cmin.begin(), cmin.end(), kInf);
      std::fill(cmax.begin(), cmax.end(), 0.0);
      for (int i = 0; i < rows_; ++i) {
        const Constraint& c = rows[i];
        for (std::size_t e = 0; e < c.index.size(); ++e) {
          const double a = std::abs(c.value[e]) * row_scale_[i];
          if (a == 0.0) continue;
          cmin[c.index[e]] = std::min(cmin[c.index[e]], a);
          cmax[c.index[e]] = std::max(cmax[c.index[e]], a);
        }
      }
      for (std::size_t j = 0; j < vars.size(); ++j) {
        // Binaries stay unscaled so branching bounds remain 0/1.
        if (cmax[j] > 0.0 && !vars[j].binary) {
          col_scale[j] = pow2(1.0 / std::sqrt(std::max(cmin[j], cmax[j] * kScaleSpread) * cmax[j]));
        }
      }
    }
    for (int i = 0; i < rows_; ++i) {
      double hi = 0.0;
      const Constraint& c = rows[i];
      for (std::size_t e = 0; e < c.index.size(); ++e) {
        hi = std::max(hi, std::abs(c.value[e]) * col_scale[c.index[e]]);
      }
      row_scale_[i] = hi > 0.0 ? pow2(1.0 / hi) : 1.0;
    }
  }

  var_map_.resize(vars.size());
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const Variable& v = vars[j];
    VarMap& map = var_map_[j];
    const double cs = col_scale[j];
    map.scale = cs;
    if (v.lower > v.upper) {
      // Keep the column; the empty interval is reported as infeasible by solve_primal.
      map.pos = new_column(0.0, -1.0, v.cost * cs);
      map.shift = v.lower;
    } else if (std::isfinite(v.lower)) {
      map.pos = new_column(0.0, (v.upper - v.lower) / cs, v.cost * cs);
      map.shift = v.lower;
      offset_ += v.cost * v.lower;
    } else if (std::isfinite(v.upper)) {
      map.pos = new_column(0.0, kInf, -v.cost * cs);
      map.shift = v.upper;
      map.sign = -1.0;
      offset_ += v.cost * v.upper;
    } else {
      map.pos = new_column(0.0, kInf, v.cost * cs);
      map.neg = new_column(0.0, kInf, -v.cost * cs);
    }
  }

  // Row-wise converted coefficients.
  std::vector<std::vector<std::pair<int, double>>> row_entries(rows_);
  std::vector<double> slack_sign(rows_, 0.0);
  std::vector<double> slack_ub(rows_, kInf);
  b_.assign(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    const Constraint& c = rows[i];
    const double rs = row_scale_[i];
    double shift = 0.0;
    for (std::size_t e = 0; e < c.index.size(); ++e) {
      const VarMap& map = var_map_.at(c.index[e]);
      const double a = c.value[e];
      if (a == 0.0) continue;
      row_entries[i].emplace_back(map.pos, a * map.sign * map.scale * rs);
      if (map.neg >= 0) row_entries[i].emplace_back(map.neg, -a * map.scale * rs);
      shift += a * map.shift;
    }
    switch (c.sense) {
      case RowSense::kLessEqual:
        slack_sign[i] = 1.0;
        b_[i] = c.rhs - shift;
        break;
      case RowSense::kGreaterEqual:
        slack_sign[i] = -1.0;
        b_[i] = c.rhs - shift;
        break;
      case RowSense::kEqual:
        b_[i] = c.rhs - shift;
        break;
      case RowSense::kRange: {
        const bool lo_finite = std::isfinite(c.range_lower);
        const bool hi_finite = std::isfinite(c.rhs);
        if (!lo_finite && !hi_finite) throw std::invalid_argument("range row without finite bound");
        if (!lo_finite) {
          slack_sign[i] = 1.0;
          b_[i] = c.rhs - shift;
        } else if (!hi_finite) {
          slack_sign[i] = -1.0;
          b_[i] = c.range_lower - shift;
        } else {
          slack_sign[i] = 1.0;
          b_[i] = c.rhs - shift;
          slack_ub[i] = c.rhs - c.range_lower;
        }
        break;
      }
    }
    b_[i] *= rs;
    if (std::isfinite(slack_ub[i])) slack_ub[i] *= rs;
  }

  std::vector<int> slack_col(rows_, -1);
  for (int i = 0; i < rows_; ++i) {
    if (slack_sign[i] != 0.0) slack_col[i] = new_column(0.0, slack_ub[i], 0.0);
  }
  first_artificial_ = cols_;

  row_flip_.assign(rows_, 1.0);
  identity_col_.assign(rows_, -1);
  for (int i = 0; i < rows_; ++i) {
    if (b_[i] < 0.0 || (b_[i] == 0.0 && slack_sign[i] < 0.0)) {
      row_flip_[i] = -1.0;
      b_[i] = -b_[i];
      slack_sign[i] = -slack_sign[i];
      for (auto& [col, val] : row_entries[i]) val = -val;
    }
    if (slack_col[i] >= 0) row_entries[i].emplace_back(slack_col[i], slack_sign[i]);
    if (slack_sign[i] > 0.0 && b_[i] <= slack_ub[i]) {
      identity_col_[i] = slack_col[i];
    } else {
      identity_col_[i] = new_column(0.0, kInf, 0.0);
      row_entries[i].emplace_back(identity_col_[i], 1.0);
    }
  }

  a_cols_.assign(cols_, {});
  t_.assign(static_cast<std::size_t>(rows_) * cols_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    for (const auto& [col, val] : row_entries[i]) {
      at(i, col) += val;
    }
  }
  for (int i = 0; i < rows_; ++i) {
    for (int k = 0; k < cols_; ++k) {
      if (at(i, k) != 0.0) a_cols_[k].emplace_back(i, at(i, k));
    }
  }

  basis_ = identity_col_;
  status_.assign(cols_, ColStatus::kLower);
  for (int col : basis_) status_[col] = ColStatus::kBasic;
  xb_ = b_;
  d_.assign(cols_, 0.0);
}

double Tableau::value_of(int col) const {
  return status_[col] == ColStatus::kUpper ? ub_[col] : lb_[col];
}

void Tableau::compute_reduced_costs(const std::vector<double>& cost) {
  d_ = cost;
  for (int i = 0; i < rows_; ++i) {
    const double cb = cost[basis_[i]];
    if (cb == 0.0) continue;
    const double* row = &t_[static_cast<std::size_t>(i) * cols_];
    for (int k = 0; k < cols_; ++k) d_[k] -= cb * row[k];
  }
  for (int col : basis_) d_[col] = 0.0;
}

void Tableau::pivot(int r, int q) {
  double* pr = &t_[static_cast<std::size_t>(r) * cols_];
  const double inv = 1.0 / pr[q];
  std::vector<int> nz;
  nz.reserve(cols_);
  for (int k = 0; k < cols_; ++k) {
    if (pr[k] == 0.0) continue;
    pr[k] *= inv;
    if (std::abs(pr[k]) < 1e-14) {
      pr[k] = 0.0;
      continue;
    }
    nz.push_back(k);
  }
  pr[q] = 1.0;
  for (int i = 0; i < rows_; ++i) {
    if (i == r) continue;
    double* row = &t_[static_cast<std::size_t>(i) * cols_];
    const double f = row[q];
    if (f == 0.0) continue;
    for (int k : nz) row[k] -= f * pr[k];
    row[q] = 0.0;
  }
  const double f = d_[q];
  if (f != 0.0) {
    for (int k : nz) d_[k] -= f * pr[k];
  }
  d_[q] = 0.0;
  refined_y_.clear();
}

SolveStatus Tableau::run_primal(const std::vector<double>& cost, long max_iterations) {
  compute_reduced_costs(cost);
  int degenerate = 0;
  bool fresh = false;
  std::vector<double> limit(rows_);
  while (true) {
    if (iterations_ >= max_iterations) return SolveStatus::kIterationLimit;
    const bool bland = degenerate > kDegenerateBeforeBland;

    int q = -1;
    double best = 0.0;
    for (int k = 0; k < cols_; ++k) {
      if (status_[k] == ColStatus::kBasic || ub_[k] - lb_[k] <= 0.0) continue;
      const double dk = d_[k];
      const bool improving = (status_[k] == ColStatus::kLower && dk < -kOptimalityTol) ||
                             (status_[k] == ColStatus::kUpper && dk > kOptimalityTol);
      if (!improving) continue;
      if (bland) {
        q = k;
        break;
      }
      if (std::abs(dk) > best) {
        best = std::abs(dk);
        q = k;
      }
    }
    if (q < 0) return SolveStatus::kOptimal;

    const double dir = status_[q] == ColStatus::kLower ? 1.0 : -1.0;
    double theta = ub_[q] - lb_[q];
    for (int i = 0; i < rows_; ++i) {
      const double delta = -dir * at(i, q);
      const int col = basis_[i];
      double lim = kInf;
      if (delta < -kPivotTol) {
        lim = (xb_[i] - lb_[col]) / -delta;
      } else if (delta > kPivotTol && std::isfinite(ub_[col])) {
        lim = (ub_[col] - xb_[i]) / delta;
      }
      limit[i] = std::max(lim, 0.0);
      theta = std::min(theta, limit[i]);
    }
    if (!std::isfinite(theta)) {
      // Drift in the updated tableau can fake a ray; trust it only on a fresh inverse.
      if (!fresh && reinvert(cost)) {
        fresh = true;
        continue;
      }
      return SolveStatus::kUnbounded;
    }

    int r = -1;
    const bool flip = theta >= ub_[q] - lb_[q] - kRatioSlack;
    if (!flip) {
      // Harris: bound the step with slightly relaxed bounds, then take the
      // largest pivot among the rows that block within that step.
      double relaxed = kInf;
      for (int i = 0; i < rows_; ++i) {
        const double delta = -dir * at(i, q);
        const int col = basis_[i];
        if (delta < -kPivotTol) {
          relaxed = std::min(relaxed, (xb_[i] - lb_[col] + kHarrisTol * (1.0 + std::abs(lb_[col]))) / -delta);
        } else if (delta > kPivotTol && std::isfinite(ub_[col])) {
          relaxed = std::min(relaxed, (ub_[col] - xb_[i] + kHarrisTol * (1.0 + std::abs(ub_[col]))) / delta);
        }
      }
      const double cutoff = bland ? theta + kRatioSlack * (1.0 + theta) : std::max(relaxed, theta);
      for (int i = 0; i < rows_; ++i) {
        if (limit[i] > cutoff || !std::isfinite(limit[i])) continue;
        if (r < 0) {
          r = i;
        } else if (bland ? basis_[i] < basis_[r] : std::abs(at(i, q)) > std::abs(at(r, q))) {
          r = i;
        }
      }
      theta = std::min(limit[r], ub_[q] - lb_[q]);
    }
    degenerate = theta < 1e-11 ? degenerate + 1 : 0;

    for (int i = 0; i < rows_; ++i) {
      const double a = at(i, q);
      if (a != 0.0) xb_[i] -= dir * a * theta;
    }
    ++iterations_;
    fresh = false;
    if (flip) {
      status_[q] = status_[q] == ColStatus::kLower ? ColStatus::kUpper : ColStatus::kLower;
      continue;
    }
    const double entering = value_of(q) + dir * theta;
    const int leaving = basis_[r];
    const bool to_lower = -dir * at(r, q) < 0.0;
    pivot(r, q);
    basis_[r] = q;
    status_[q] = ColStatus::kBasic;
    status_[leaving] = to_lower ? ColStatus::kLower : ColStatus::kUpper;
    xb_[r] = entering;
  }
}

void Tableau::drive_out_artificials() {
  for (int i = 0; i < rows_; ++i) {
    if (basis_[i] < first_artificial_) continue;
    int best = -1;
    double best_abs = 1e-7;
    for (int k = 0; k < first_artificial_; ++k) {
      if (status_[k] == ColStatus::kBasic) continue;
      if (std::abs(at(i, k)) > best_abs) {
        best_abs = std::abs(at(i, k));
        best = k;
      }
    }
    if (best < 0) continue;  // redundant row
    const int art = basis_[i];
    const double entering = value_of(best);
    pivot(i, best);
    basis_[i] = best;
    status_[best] = ColStatus::kBasic;
    status_[art] = ColStatus::kLower;
    xb_[i] = entering;
  }
  for (int k = first_artificial_; k < cols_; ++k) ub_[k] = 0.0;
}

SolveStatus Tableau::solve_primal(long max_iterations) {
  for (int k = 0; k < cols_; ++k) {
    if (ub_[k] < lb_[k]) return SolveStatus::kInfeasible;
  }
  if (first_artificial_ < cols_) {
    std::vector<double> phase1(cols_, 0.0);
    for (int k = first_artificial_; k < cols_; ++k) phase1[k] = 1.0;
    const SolveStatus s = run_primal(phase1, max_iterations);
    if (s == SolveStatus::kIterationLimit) return s;
    double infeasibility = 0.0;
    double scale = 1.0;
    for (int i = 0; i < rows_; ++i) {
      scale = std::max(scale, std::abs(b_[i]));
      if (basis_[i] >= first_artificial_) infeasibility += std::abs(xb_[i]);
    }
    if (infeasibility > 1e-7 * scale) {
      if (!reinvert(phase1)) return SolveStatus::kInfeasible;
      const SolveStatus again = run_primal(phase1, max_iterations);
      if (again == SolveStatus::kIterationLimit) return again;
      infeasibility = 0.0;
      for (int i = 0; i < rows_; ++i) {
        if (basis_[i] >= first_artificial_) infeasibility += std::abs(xb_[i]);
      }
      if (infeasibility > 1e-7 * scale) return SolveStatus::kInfeasible;
    }
    drive_out_artificials();
  }
  return verified(run_primal(cost_, max_iterations), max_iterations);
}

SolveStatus Tableau::solve_dual(long max_iterations) {
  const SolveStatus s = run_dual(max_iterations);
  if (s != SolveStatus::kOptimal) return s;
  // Clean up any reduced-cost sign drift.
  return verified(run_primal(cost_, max_iterations), max_iterations);
}

double Tableau::residual() const {
  std::vector<double> r(b_);
  for (int k = 0; k < cols_; ++k) {
    if (status_[k] == ColStatus::kBasic) continue;
    const double v = value_of(k);
    if (v == 0.0) continue;
    for (const auto& [row, val] : a_cols_[k]) r[row] -= val * v;
  }
  for (int i = 0; i < rows_; ++i) {
    for (const auto& [row, val] : a_cols_[basis_[i]]) r[row] -= val * xb_[i];
  }
  double worst = 0.0;
  for (int i = 0; i < rows_; ++i) worst = std::max(worst, std::abs(r[i]) / (1.0 + std::abs(b_[i])));
  return worst;
}

SolveStatus Tableau::verified(SolveStatus status, long max_iterations) {
  for (int pass = 0; pass < 3 && status == SolveStatus::kOptimal; ++pass) {
    if (residual() <= kResidualTol || !reinvert(cost_)) return status;
    status = run_dual(max_iterations);
    if (status == SolveStatus::kOptimal) status = run_primal(cost_, max_iterations);
  }
  return status;
}

SolveStatus Tableau::run_dual(long max_iterations) {
  bool fresh = false;
  std::vector<int> candidates;
  while (true) {
    if (iterations_ >= max_iterations) return SolveStatus::kIterationLimit;
    int r = -1;
    double worst = 0.0;
    for (int i = 0; i < rows_; ++i) {
      const int col = basis_[i];
      const double tol = kPrimalTol * (1.0 + std::abs(xb_[i]));
      double infeas = 0.0;
      if (xb_[i] < lb_[col] - tol) infeas = lb_[col] - xb_[i];
      if (xb_[i] > ub_[col] + tol) infeas = xb_[i] - ub_[col];
      if (infeas > worst) {
        worst = infeas;
        r = i;
      }
    }
    if (r < 0) break;

    const int leaving = basis_[r];
    const bool to_lower = xb_[r] < lb_[leaving];
    const double target = to_lower ? lb_[leaving] : ub_[leaving];
    // Harris two-pass ratio test on the reduced costs.
    candidates.clear();
    double relaxed = kInf;
    for (int k = 0; k < cols_; ++k) {
      if (status_[k] == ColStatus::kBasic || ub_[k] - lb_[k] <= 0.0) continue;
      const double a = at(r, k);
      if (std::abs(a) <= kPivotTol) continue;
      const bool at_lower = status_[k] == ColStatus::kLower;
      // x_B(r) moves by -a * dx_k; at_lower allows dx >= 0, at_upper dx <= 0.
      const bool eligible = to_lower ? (at_lower ? a < 0.0 : a > 0.0) : (at_lower ? a > 0.0 : a < 0.0);
      if (!eligible) continue;
      candidates.push_back(k);
      relaxed = std::min(relaxed, (std::abs(d_[k]) + kOptimalityTol) / std::abs(a));
    }
    int q = -1;
    double best_alpha = 0.0;
    for (int k : candidates) {
      const double a = std::abs(at(r, k));
      if (std::abs(d_[k]) / a <= relaxed && a > best_alpha) {
        best_alpha = a;
        q = k;
      }
    }
    if (q < 0) {
      if (!fresh && reinvert(cost_)) {
        fresh = true;
        continue;
      }
      return SolveStatus::kInfeasible;
    }
    fresh = false;

    const double dx = (xb_[r] - target) / at(r, q);
    for (int i = 0; i < rows_; ++i) {
      const double a = at(i, q);
      if (a != 0.0) xb_[i] -= a * dx;
    }
    const double entering = value_of(q) + dx;
    pivot(r, q);
    basis_[r] = q;
    status_[q] = ColStatus::kBasic;
    status_[leaving] = to_lower ? ColStatus::kLower : ColStatus::kUpper;
    xb_[r] = entering;
    ++iterations_;
  }
  return SolveStatus::kOptimal;
}

void Tableau::fix_variable(int var, double value) {
  const VarMap& map = var_map_.at(var);
  if (map.neg >= 0) throw std::invalid_argument("cannot fix a split free variable");
  const int col = map.pos;
  const double z = (value - map.shift) / (map.sign * map.scale);
  if (status_[col] == ColStatus::kBasic) {
    lb_[col] = z;
    ub_[col] = z;
    return;
  }
  const double old = value_of(col);
  lb_[col] = z;
  ub_[col] = z;
  status_[col] = ColStatus::kLower;
  const double delta = z - old;
  if (delta == 0.0) return;
  for (int i = 0; i < rows_; ++i) {
    const double a = at(i, col);
    if (a != 0.0) xb_[i] -= a * delta;
  }
}

bool Tableau::reinvert(const std::vector<double>& cost) {
  if (rows_ == 0) return false;
  Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(rows_, rows_);
  for (int i = 0; i < rows_; ++i) {
    for (const auto& [row, val] : a_cols_[basis_[i]]) basis_matrix(row, i) = val;
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
  if (!(lu.matrixLU().diagonal().cwiseAbs().minCoeff() > 1e-12)) return false;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows_, cols_);
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b_.data(), rows_);
  for (int k = 0; k < cols_; ++k) {
    const double v = status_[k] == ColStatus::kBasic ? 0.0 : value_of(k);
    for (const auto& [row, val] : a_cols_[k]) {
      a(row, k) = val;
      rhs(row) -= val * v;
    }
  }
  const Eigen::MatrixXd t = lu.solve(a);
  const Eigen::VectorXd x = lu.solve(rhs);
  if (!t.allFinite() || !x.allFinite()) return false;
  for (int i = 0; i < rows_; ++i) {
    for (int k = 0; k < cols_; ++k) {
      const double v = t(i, k);
      at(i, k) = std::abs(v) < 1e-14 ? 0.0 : v;
    }
    at(i, basis_[i]) = 1.0;
    xb_[i] = x(i);
  }
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < rows_; ++j) {
      if (j != i) at(j, basis_[i]) = 0.0;
    }
  }
  compute_reduced_costs(cost);
  refined_y_.clear();
  return true;
}

void Tableau::refine() {
  if (rows_ == 0) return;
  Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(rows_, rows_);
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b_.data(), rows_);
  Eigen::VectorXd cb(rows_);
  for (int i = 0; i < rows_; ++i) {
    for (const auto& [row, val] : a_cols_[basis_[i]]) basis_matrix(row, i) = val;
    cb(i) = cost_[basis_[i]];
  }
  for (int k = 0; k < cols_; ++k) {
    if (status_[k] == ColStatus::kBasic) continue;
    const double v = value_of(k);
    if (v == 0.0) continue;
    for (const auto& [row, val] : a_cols_[k]) rhs(row) -= val * v;
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
  const Eigen::VectorXd x = lu.solve(rhs);
  const Eigen::VectorXd y = lu.transpose().solve(cb);
  if (!x.allFinite() || !y.allFinite()) return;
  if ((basis_matrix * x - rhs).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + rhs.cwiseAbs().maxCoeff())) {
    return;
  }
  for (int i = 0; i < rows_; ++i) {
    if (std::abs(x(i) - xb_[i]) > 1e-5 * (1.0 + std::abs(xb_[i]))) return;
  }
  for (int i = 0; i < rows_; ++i) xb_[i] = x(i);
  refined_y_.assign(y.data(), y.data() + rows_);
  for (int k = 0; k < cols_; ++k) {
    if (status_[k] == ColStatus::kBasic) {
      d_[k] = 0.0;
      continue;
    }
    double dk = cost_[k];
    for (const auto& [row, val] : a_cols_[k]) dk -= refined_y_[row] * val;
    d_[k] = dk;
  }
}

double Tableau::objective() const {
  double obj = offset_;
  for (int i = 0; i < rows_; ++i) obj += cost_[basis_[i]] * xb_[i];
  for (int k = 0; k < cols_; ++k) {
    if (status_[k] != ColStatus::kBasic) obj += cost_[k] * value_of(k);
  }
  return obj;
}

std::vector<double> Tableau::primal() const {
  std::vector<double> z(cols_);
  for (int k = 0; k < cols_; ++k) z[k] = value_of(k);
  for (int i = 0; i < rows_; ++i) z[basis_[i]] = xb_[i];
  std::vector<double> x(var_map_.size());
  for (std::size_t j = 0; j < var_map_.size(); ++j) {
    const VarMap& map = var_map_[j];
    x[j] = map.shift + map.sign * map.scale * z[map.pos];
    if (map.neg >= 0) x[j] -= map.scale * z[map.neg];
  }
  return x;
}

std::vector<double> Tableau::duals() const {
  std::vector<double> y(rows_);
  for (int i = 0; i < rows_; ++i) {
    const double yi = refined_y_.empty() ? cost_[identity_col_[i]] - d_[identity_col_[i]]
                                         : refined_y_[i];
    y[i] = row_flip_[i] * row_scale_[i] * yi;
  }
  return y;
}

std::vector<double> Tableau::reduced_costs() const {
  std::vector<double> rc(var_map_.size());
  for (std::size_t j = 0; j < var_map_.size(); ++j) {
    rc[j] = var_map_[j].sign * d_[var_map_[j].pos] / var_map_[j].scale;
  }
  return rc;
}

}  // namespace scuc::detail
