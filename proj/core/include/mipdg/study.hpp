#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mipdg/problems.hpp"
#include "mipdg/splitting.hpp"

namespace mipdg {

enum class StudyMode { elliptic, forward, backward, splitting };

std::string to_string(StudyMode mode);
StudyMode study_mode_from_string(std::string_view name);

// One refinement experiment: a (degree, mesh) or (degree, dt) matrix on a
// registered test case.  A time study (dt list with two or more entries)
// refines the step on a single fixed mesh; otherwise the mesh list refines
// and the step follows kappa_t h^2 or the fixed dt entry.
struct StudyConfig {
  std::string test = "test1";
  StudyMode mode = StudyMode::elliptic;
  std::vector<int> mesh{10, 20, 40, 80};  // element counts, strictly refining
  std::vector<int> degrees{1};
  PenaltyConfig penalty;
  double alpha = 2.0;
  double kappa_t = 0.0;      // explicit step scale: dt = kappa_t h^2
  std::vector<double> dts;   // fixed step (one entry) or time study (several)
  std::optional<double> final_time;  // overrides the registry final time
  double frozen_time = 0.0;          // evaluation time of elliptic runs
  int exact_index = 0;               // branch the errors are measured against
  NewtonConfig newton{1e-10, 50, 8, JacobianKind::analytic};
  SplitConfig split{};
  // Splitting initial data: u from this exact-solution branch (-1 takes the
  // secant line), and one constant shared by all three derivative guesses.
  int split_guess_branch = -1;
  double split_guess_p = 0.0;
  // Observer for completed cells (plot dumps and the like): receives the
  // degree, the refinement step, the final state, and the exact branch at the
  // evaluation time.  Failed cells are skipped.
  std::function<void(int degree, double step, const DGFunction& u,
                     const std::function<double(double)>& exact)>
      on_state;

  bool time_study() const { return dts.size() > 1; }
  void validate() const;  // throws std::invalid_argument
};

struct TableRow {
  int degree;
  std::string norm;    // "L2" or "Linf"
  double step;         // h, or dt for time studies
  double error;        // NaN when the run failed
  double order;        // NaN on the first refinement and around failures
  std::string status;  // "ok", "unstable", "no_convergence"
  bool ok() const { return status == "ok"; }
};

struct ConvergenceTable {
  std::string title;
  std::string step_label;  // "h" or "dt"
  std::vector<TableRow> rows;
};

// Runs the whole matrix; individual failures become marked rows, never
// exceptions.  Configuration errors do throw.
ConvergenceTable run_study(const StudyConfig& config);

// Fixed formatting (errors %.1e, orders %.2f) keeps the bytes reproducible.
// The header is `r,norm,h,error,order` for both step kinds; failed rows carry
// the status word in the error column and an empty order.
void write_csv(const ConvergenceTable& table, std::ostream& os);
void write_markdown(const ConvergenceTable& table, std::ostream& os);

// Observed convergence order r+1 (odd r) or r (even r).
int expected_spatial_order(int degree);

// log(e_coarse/e_fine) / log(s_coarse/s_fine): reduces to the log2 error
// ratio when the step halves.
double observed_order(double error_coarse, double error_fine,
                      double step_coarse, double step_fine);

// Initial-guess recipes for the branch-selection experiment: the secant line
// of the boundary data, or its 1/3-2/3 blend with one exact branch.
enum class GuessRecipe { secant, blend_plus, blend_minus };

std::string to_string(GuessRecipe recipe);
GuessRecipe guess_recipe_from_string(std::string_view name);

struct SelectivityCase {
  double alpha;
  GuessRecipe recipe;
};

struct SelectivityOptions {
  int degree = 2;
  int elements = 10;
  PenaltyConfig penalty{{1.1, 1.5, 1.1}, 0};
  NewtonConfig newton{1e-10, 50, 8, JacobianKind::analytic};
};

struct SelectivityRow {
  double alpha;
  GuessRecipe recipe;
  std::string classification;  // "u+", "u-", "no-root"
  double l2_error;             // distance to the classified branch; NaN if none
  int iterations;
};

// Solves the double-root problem per (alpha, recipe) pair and classifies the
// outcome by the nearer exact branch in L2.
std::vector<SelectivityRow> run_selectivity(
    const std::vector<SelectivityCase>& cases,
    const SelectivityOptions& options = {});

// Header `alpha,guess,result,l2_error,iterations`.
void write_selectivity_csv(const std::vector<SelectivityRow>& rows,
                           std::ostream& os);

// Sample dump for external plotting: `x,u_h,exact` at 10 J uniform points
// (element-interior, so the broken function is single-valued at each sample).
void write_plot_csv(const DGFunction& u,
                    const std::function<double(double)>& exact,
                    std::ostream& os);

}  // namespace mipdg
