#include "mipdg/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "mipdg/parabolic.hpp"

namespace mipdg {
namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct Cell {
  double step = nan;
  ErrorNorms errors{nan, nan};
  std::string status = "ok";
  bool ok() const { return status == "ok"; }
};

std::string transient_status_word(TransientStatus status) {
  switch (status) {
    case TransientStatus::completed: return "ok";
    case TransientStatus::unstable: return "unstable";
    case TransientStatus::non_convergence: return "no_convergence";
  }
  return "no_convergence";
}

DGFunction project_branch(std::shared_ptr<const DGSpace> space,
                          const TestCase& tc, int branch, double time) {
  if (branch < 0) {
    // Secant line of the boundary data.
    const double ua = tc.boundary_a(time), ub = tc.boundary_b(time);
    const double xa = tc.xa, slope = (ub - ua) / (tc.xb - tc.xa);
    return l2_project(space,
                      [=](double x) { return ua + slope * (x - xa); });
  }
  const auto& ex = tc.exact.at(branch);
  return l2_project(space, [&](double x) { return ex.u(x, time); });
}

Cell run_cell(const StudyConfig& config, const TestCase& tc, int degree,
              int elements, double dt, double final_time) {
  Cell cell;
  auto space = std::make_shared<DGSpace>(
      Mesh::uniform(tc.xa, tc.xb, elements), degree);
  const double h = space->mesh().max_element_length();
  cell.step = config.time_study() ? dt : h;
  const AssembledForms forms = assemble(space, config.penalty);
  const auto& ex = tc.exact.at(config.exact_index);

  try {
    switch (config.mode) {
      case StudyMode::elliptic: {
        const EllipticProblem problem =
            tc.elliptic(config.alpha, config.frozen_time);
        const SolverState guess = secant_initial_guess(problem, space);
        const SolveResult result = solve(problem, forms, guess, config.newton);
        if (!result.report.converged()) {
          cell.status = "no_convergence";
          return cell;
        }
        const double t = config.frozen_time;
        cell.errors = error_norms(result.state.u,
                                  [&](double x) { return ex.u(x, t); });
        if (config.on_state) {
          config.on_state(degree, cell.step, result.state.u,
                          [&](double x) { return ex.u(x, t); });
        }
        break;
      }
      case StudyMode::splitting: {
        const EllipticProblem problem =
            tc.elliptic(config.alpha, config.frozen_time);
        SolverState guess(space);
        guess.u = project_branch(space, tc, config.split_guess_branch,
                                 config.frozen_time);
        const double p0 = config.split_guess_p;
        if (p0 != 0.0) {
          const DGFunction constant =
              l2_project(space, [=](double) { return p0; });
          for (int k = 0; k < 3; ++k) guess.p(k) = constant;
        }
        const SplitResult result =
            split_solve(problem, forms, guess, config.split);
        if (!result.report.converged()) {
          cell.status = "no_convergence";
          return cell;
        }
        const double t = config.frozen_time;
        cell.errors = error_norms(result.state.u,
                                  [&](double x) { return ex.u(x, t); });
        if (config.on_state) {
          config.on_state(degree, cell.step, result.state.u,
                          [&](double x) { return ex.u(x, t); });
        }
        break;
      }
      case StudyMode::forward:
      case StudyMode::backward: {
        ParabolicProblem problem = tc.parabolic(config.alpha);
        problem.final_time = final_time;
        const TimeGrid grid =
            dt > 0.0 ? TimeGrid::with_step_target(final_time, dt)
                     : TimeGrid::cfl(final_time, config.kappa_t, h);
        TransientOptions options;
        options.scheme = config.mode == StudyMode::forward
                             ? Scheme::forward_euler
                             : Scheme::backward_euler;
        options.newton = config.newton;
        options.exact = [&](double x, double t) { return ex.u(x, t); };
        const TransientResult result =
            run_transient(problem, forms, grid, options);
        cell.status = transient_status_word(result.status);
        if (!cell.ok()) return cell;
        cell.errors = error_norms(
            result.state.u, [&](double x) { return ex.u(x, final_time); });
        if (config.on_state) {
          config.on_state(degree, cell.step, result.state.u,
                          [&](double x) { return ex.u(x, final_time); });
        }
        break;
      }
    }
  } catch (const NonFiniteEvaluation&) {
    cell.status = "unstable";
  }
  return cell;
}

}  // namespace

std::string to_string(StudyMode mode) {
  switch (mode) {
    case StudyMode::elliptic: return "elliptic";
    case StudyMode::forward: return "forward";
    case StudyMode::backward: return "backward";
    case StudyMode::splitting: return "splitting";
  }
  return "elliptic";
}

StudyMode study_mode_from_string(std::string_view name) {
  if (name == "elliptic") return StudyMode::elliptic;
  if (name == "forward") return StudyMode::forward;
  if (name == "backward") return StudyMode::backward;
  if (name == "splitting") return StudyMode::splitting;
  throw std::invalid_argument("unknown study mode: " + std::string(name));
}

void StudyConfig::validate() const {
  const TestCase& tc = get_test_case(test);  // throws on unknown id
  if (mesh.empty()) throw std::invalid_argument("mesh list is empty");
  if (!std::is_sorted(mesh.begin(), mesh.end()) ||
      std::adjacent_find(mesh.begin(), mesh.end()) != mesh.end() ||
      mesh.front() < 1) {
    throw std::invalid_argument("mesh list must be strictly refining");
  }
  if (degrees.empty()) throw std::invalid_argument("degree list is empty");
  for (int r : degrees)
    if (r < 1) throw std::invalid_argument("degree must be at least 1");
  penalty.validate();
  if (exact_index < 0 ||
      exact_index >= static_cast<int>(tc.exact.size())) {
    throw std::invalid_argument("exact-solution index out of range");
  }
  const bool transient =
      mode == StudyMode::forward || mode == StudyMode::backward;
  if (transient && !tc.time_dependent)
    throw std::invalid_argument(test + " is stationary");
  if (transient && dts.empty() && kappa_t <= 0.0)
    throw std::invalid_argument("transient study needs --kappa-t or --dt");
  for (double dt : dts)
    if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  if (time_study() && mesh.size() != 1)
    throw std::invalid_argument("a time study uses a single mesh");
  if (time_study() && !transient)
    throw std::invalid_argument("a time study needs a transient mode");
  if (final_time && *final_time <= 0.0)
    throw std::invalid_argument("final time must be positive");
  if (mode == StudyMode::splitting &&
      split_guess_branch >= static_cast<int>(tc.exact.size())) {
    throw std::invalid_argument("splitting guess branch out of range");
  }
}

ConvergenceTable run_study(const StudyConfig& config) {
  config.validate();
  const TestCase& tc = get_test_case(config.test);
  const double final_time = config.final_time.value_or(tc.final_time);

  ConvergenceTable table;
  table.title = config.test + " " + to_string(config.mode);
  table.step_label = config.time_study() ? "dt" : "h";

  for (int degree : config.degrees) {
    std::vector<Cell> cells;
    if (config.time_study()) {
      for (double dt : config.dts)
        cells.push_back(run_cell(config, tc, degree, config.mesh.front(), dt,
                                 final_time));
    } else {
      const double fixed_dt = config.dts.empty() ? 0.0 : config.dts.front();
      for (int elements : config.mesh) {
        const double h = (tc.xb - tc.xa) / elements;
        const double dt =
            fixed_dt > 0.0 ? fixed_dt
                           : (config.kappa_t > 0.0 ? config.kappa_t * h * h
                                                   : 0.0);
        cells.push_back(
            run_cell(config, tc, degree, elements, dt, final_time));
      }
    }
    for (const std::string norm : {"L2", "Linf"}) {
      const Cell* prev = nullptr;
      for (const Cell& cell : cells) {
        TableRow row{degree, norm, cell.step, nan, nan, cell.status};
        if (cell.ok()) {
          row.error = norm == "L2" ? cell.errors.l2 : cell.errors.linf;
          if (prev != nullptr) {
            const double prev_error =
                norm == "L2" ? prev->errors.l2 : prev->errors.linf;
            row.order =
                observed_order(prev_error, row.error, prev->step, cell.step);
          }
          prev = &cell;
        } else {
          prev = nullptr;  // a failure breaks the order chain
        }
        table.rows.push_back(std::move(row));
      }
    }
  }
  return table;
}

void write_csv(const ConvergenceTable& table, std::ostream& os) {
  os << "r,norm,h,error,order\n";
  for (const TableRow& row : table.rows) {
    os << row.degree << ',' << row.norm << ',' << fmt("%.6g", row.step) << ',';
    if (row.ok())
      os << fmt("%.1e", row.error);
    else
      os << row.status;
    os << ',';
    if (row.ok() && std::isfinite(row.order)) os << fmt("%.2f", row.order);
    os << '\n';
  }
}

void write_markdown(const ConvergenceTable& table, std::ostream& os) {
  os << "## " << table.title << "\n\n";
  os << "| r | norm | " << table.step_label << " | error | order |\n";
  os << "|---|------|---|-------|-------|\n";
  for (const TableRow& row : table.rows) {
    os << "| " << row.degree << " | " << row.norm << " | "
       << fmt("%.6g", row.step) << " | ";
    if (row.ok())
      os << fmt("%.1e", row.error);
    else
      os << row.status;
    os << " | ";
    os << (row.ok() && std::isfinite(row.order) ? fmt("%.2f", row.order)
                                                : std::string("-"));
    os << " |\n";
  }
}

int expected_spatial_order(int degree) {
  return degree % 2 == 1 ? degree + 1 : degree;
}

double observed_order(double error_coarse, double error_fine,
                      double step_coarse, double step_fine) {
  return std::log(error_coarse / error_fine) /
         std::log(step_coarse / step_fine);
}

std::string to_string(GuessRecipe recipe) {
  switch (recipe) {
    case GuessRecipe::secant: return "secant";
    case GuessRecipe::blend_plus: return "blend_u+";
    case GuessRecipe::blend_minus: return "blend_u-";
  }
  return "secant";
}

GuessRecipe guess_recipe_from_string(std::string_view name) {
  if (name == "secant") return GuessRecipe::secant;
  if (name == "blend_u+" || name == "blend-plus") return GuessRecipe::blend_plus;
  if (name == "blend_u-" || name == "blend-minus")
    return GuessRecipe::blend_minus;
  throw std::invalid_argument("unknown guess recipe: " + std::string(name));
}

std::vector<SelectivityRow> run_selectivity(
    const std::vector<SelectivityCase>& cases,
    const SelectivityOptions& options) {
  const TestCase& tc = get_test_case("test1");
  auto space = std::make_shared<DGSpace>(
      Mesh::uniform(tc.xa, tc.xb, options.elements), options.degree);
  const AssembledForms forms = assemble(space, options.penalty);
  const auto& plus = tc.exact[0];
  const auto& minus = tc.exact[1];

  std::vector<SelectivityRow> rows;
  for (const SelectivityCase& sc : cases) {
    const EllipticProblem problem = tc.elliptic(sc.alpha);
    const double ua = problem.ua, slope = problem.ub - problem.ua;
    auto secant = [&](double x) { return ua + slope * (x - tc.xa); };
    auto guess_value = [&](double x) {
      switch (sc.recipe) {
        case GuessRecipe::blend_plus:
          return secant(x) / 3.0 + 2.0 / 3.0 * plus.u(x, 0.0);
        case GuessRecipe::blend_minus:
          return secant(x) / 3.0 + 2.0 / 3.0 * minus.u(x, 0.0);
        case GuessRecipe::secant: break;
      }
      return secant(x);
    };
    SolverState guess(space);  // derivative guesses stay zero
    guess.u = l2_project(space, guess_value);
    const SolveResult result = solve(problem, forms, guess, options.newton);

    SelectivityRow row{sc.alpha, sc.recipe, "no-root", nan,
                       result.report.iterations};
    if (result.report.converged()) {
      const double to_plus =
          error_norms(result.state.u, [&](double x) { return plus.u(x, 0.0); })
              .l2;
      const double to_minus =
          error_norms(result.state.u,
                      [&](double x) { return minus.u(x, 0.0); })
              .l2;
      row.classification = to_plus <= to_minus ? "u+" : "u-";
      row.l2_error = std::min(to_plus, to_minus);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_selectivity_csv(const std::vector<SelectivityRow>& rows,
                           std::ostream& os) {
  os << "alpha,guess,result,l2_error,iterations\n";
  for (const SelectivityRow& row : rows) {
    os << fmt("%.6g", row.alpha) << ',' << to_string(row.recipe) << ','
       << row.classification << ',';
    if (std::isfinite(row.l2_error)) os << fmt("%.3e", row.l2_error);
    os << ',' << row.iterations << '\n';
  }
}

void write_plot_csv(const DGFunction& u,
                    const std::function<double(double)>& exact,
                    std::ostream& os) {
  const Mesh& mesh = u.space().mesh();
  os << "x,u_h,exact\n";
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double x0 = mesh.node(e), h = mesh.element_length(e);
    for (int k = 0; k < 10; ++k) {
      const double x = x0 + (2.0 * k + 1.0) / 20.0 * h;
      os << fmt("%.12g", x) << ',' << fmt("%.12g", u.value(x, Side::left))
         << ',' << fmt("%.12g", exact(x)) << '\n';
    }
  }
}

}  // namespace mipdg
