#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <iosfwd>
#include <memory>

#include "mipdg/dg_space.hpp"

namespace mipdg {

// Penalty weights and symmetrization sign for the three flux variants.
// Variant k in {0, 1, 2} biases interface derivative data to the left trace,
// the average, or the right trace respectively.
struct PenaltyConfig {
  std::array<double, 3> gamma{2.0, 2.5, 2.0};
  int epsilon = 0;  // -1 symmetric, 0 incomplete, 1 antisymmetric

  void validate() const;  // throws on nonpositive gamma or epsilon not in {-1,0,1}
  // Whether the centered weight strictly dominates the one-sided ones, the
  // condition under which the three discrete derivatives are independent.
  bool centered_weight_dominates() const;
};

// Trace jump with the boundary conventions [v(x_0)] = -v(x_0+) and
// [v(x_J)] = v(x_J-); interior jumps are left minus right.
double jump(const DGFunction& v, int node);
// Arithmetic mean of the two traces; one-sided at the domain ends.
double average(const DGFunction& v, int node);

// Penalty sum  sum_j gamma / h_pair(j) * [v(x_j)] [w(x_j)]  over all nodes.
double penalty_sum(const DGFunction& v, const DGFunction& w, double gamma);

// Matrix form of the three lifted second-derivative equations: the equation
// for the variant-k discrete second derivative p of u reads
//   mass * p + flux[k] * u = boundary_a[k] * ua + boundary_b[k] * ub.
struct AssembledForms {
  std::shared_ptr<const DGSpace> space;
  PenaltyConfig config;
  Eigen::SparseMatrix<double> mass;
  std::array<Eigen::SparseMatrix<double>, 3> flux;
  std::array<Eigen::VectorXd, 3> boundary_a;
  std::array<Eigen::VectorXd, 3> boundary_b;

  Eigen::VectorXd boundary_vector(int k, double ua, double ub) const {
    return boundary_a[k] * ua + boundary_b[k] * ub;
  }
};

AssembledForms assemble(std::shared_ptr<const DGSpace> space,
                        const PenaltyConfig& config);

// The penalized broken Laplacian alone (no interior flux corrections): volume
// gradients, Nitsche boundary terms, and the full penalty sum for variant k.
Eigen::SparseMatrix<double> assemble_penalized_laplacian(
    const DGSpace& space, const PenaltyConfig& config, int k);

// Residuals of the three product-jump identities at an interior node; all
// identically zero in exact arithmetic.
std::array<double, 3> magic_formula_residuals(const DGFunction& v,
                                              const DGFunction& w, int node);

// Dense dump of mass and flux matrices, one row per matrix row, for spaces
// with at most 64 degrees of freedom.
void write_debug_csv(const AssembledForms& forms, std::ostream& os);

}  // namespace mipdg
