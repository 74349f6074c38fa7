#include "scuc/lp_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace scuc {

int LpModel::add_variable(double lower, double upper, double cost, std::string name, bool binary) {
  if (binary && (lower < 0.0 || upper > 1.0)) {
    throw std::invalid_argument("binary variable bounds must lie in [0, 1]");
  }
  vars_.push_back({lower, upper, cost, binary, std::move(name)});
  return static_cast<int>(vars_.size()) - 1;
}

int LpModel::add_binary(double cost, std::string name) {
  return add_variable(0.0, 1.0, cost, std::move(name), true);
}

int LpModel::add_constraint(std::span<const int> index, std::span<const double> value,
                            RowSense sense, double rhs, std::string name) {
  if (index.size() != value.size()) throw std::invalid_argument("index/value size mismatch");
  for (int j : index) {
    if (j < 0 || static_cast<std::size_t>(j) >= vars_.size()) {
      throw std::out_of_range("constraint references undeclared variable");
    }
  }
  if (sense == RowSense::kRange) throw std::invalid_argument("use add_range for ranged rows");
  Constraint c;
  c.index.assign(index.begin(), index.end());
  c.value.assign(value.begin(), value.end());
  c.sense = sense;
  c.rhs = rhs;
  c.name = std::move(name);
  rows_.push_back(std::move(c));
  return static_cast<int>(rows_.size()) - 1;
}

int LpModel::add_range(std::span<const int> index, std::span<const double> value, double lower,
                       double upper, std::string name) {
  const int row = add_constraint(index, value, RowSense::kLessEqual, upper, std::move(name));
  rows_[row].sense = RowSense::kRange;
  rows_[row].range_lower = lower;
  return row;
}

bool LpModel::has_binaries() const {
  return std::any_of(vars_.begin(), vars_.end(), [](const Variable& v) { return v.binary; });
}

double LpModel::activity(std::size_t row, std::span<const double> x) const {
  const Constraint& c = rows_.at(row);
  double sum = 0.0;
  for (std::size_t e = 0; e < c.index.size(); ++e) sum += c.value[e] * x[c.index[e]];
  return sum;
}

double LpModel::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max({worst, vars_[j].lower - x[j], x[j] - vars_[j].upper});
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const double a = activity(i, x);
    const Constraint& c = rows_[i];
    switch (c.sense) {
      case RowSense::kLessEqual:
        worst = std::max(worst, a - c.rhs);
        break;
      case RowSense::kGreaterEqual:
        worst = std::max(worst, c.rhs - a);
        break;
      case RowSense::kEqual:
        worst = std::max(worst, std::abs(a - c.rhs));
        break;
      case RowSense::kRange:
        worst = std::max({worst, a - c.rhs, c.range_lower - a});
        break;
    }
  }
  return worst;
}

double LpModel::objective(std::span<const double> x) const {
  double obj = offset_;
  for (std::size_t j = 0; j < vars_.size(); ++j) obj += vars_[j].cost * x[j];
  return obj;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
    case SolveStatus::kIterationLimit:
      return "iteration-limit";
  }
  return "unknown";
}

namespace {

std::string var_name(const LpModel& model, int j) {
  const std::string& n = model.variables()[j].name;
  return n.empty() ? "x" + std::to_string(j) : n;
}

void write_terms(std::ostringstream& out, const LpModel& model, const std::vector<int>& index,
                 const std::vector<double>& value) {
  bool first = true;
  for (std::size_t e = 0; e < index.size(); ++e) {
    const double v = value[e];
    if (v == 0.0) continue;
    out << (v < 0.0 ? " - " : (first ? " " : " + ")) << std::abs(v) << ' '
        << var_name(model, index[e]);
    first = false;
  }
  if (first) out << " 0 " << var_name(model, 0);
}

}  // namespace

std::string to_lp_format(const LpModel& model) {
  std::ostringstream out;
  out.precision(17);
  out << "\\ scuc model\nMinimize\n obj:";
  std::vector<int> idx;
  std::vector<double> val;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    idx.push_back(static_cast<int>(j));
    val.push_back(model.variables()[j].cost);
  }
  write_terms(out, model, idx, val);
  if (model.objective_offset() != 0.0) out << " + " << model.objective_offset() << " constant";
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < model.num_constraints(); ++i) {
    const Constraint& c = model.constraints()[i];
    const std::string name = c.name.empty() ? "c" + std::to_string(i) : c.name;
    switch (c.sense) {
      case RowSense::kLessEqual:
        out << ' ' << name << ':';
        write_terms(out, model, c.index, c.value);
        out << " <= " << c.rhs << '\n';
        break;
      case RowSense::kGreaterEqual:
        out << ' ' << name << ':';
        write_terms(out, model, c.index, c.value);
        out << " >= " << c.rhs << '\n';
        break;
      case RowSense::kEqual:
        out << ' ' << name << ':';
        write_terms(out, model, c.index, c.value);
        out << " = " << c.rhs << '\n';
        break;
      case RowSense::kRange:
        out << ' ' << name << "_lo:";
        write_terms(out, model, c.index, c.value);
        out << " >= " << c.range_lower << '\n';
        out << ' ' << name << "_hi:";
        write_terms(out, model, c.index, c.value);
        out << " <= " << c.rhs << '\n';
        break;
    }
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    const Variable& v = model.variables()[j];
    const std::string n = var_name(model, static_cast<int>(j));
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << ' ' << n << " free\n";
      continue;
    }
    out << ' ';
    if (std::isinf(v.lower)) {
      out << "-inf";
    } else {
      out << v.lower;
    }
    out << " <= " << n << " <= ";
    if (std::isinf(v.upper)) {
      out << "+inf";
    } else {
      out << v.upper;
    }
    out << '\n';
  }
  bool any_binary = false;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    if (!model.variables()[j].binary) continue;
    if (!any_binary) out << "Binary\n";
    any_binary = true;
    out << ' ' << var_name(model, static_cast<int>(j)) << '\n';
  }
  out << "End\n";
  return out.str();
}

}  // namespace scuc
