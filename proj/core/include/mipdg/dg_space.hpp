#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <memory>

#include "mipdg/mesh.hpp"
#include "mipdg/quadrature.hpp"

namespace mipdg {

enum class Side { left, right };

// Broken polynomial space of degree <= r over a mesh.  Elements carry the
// L2-orthonormal scaled Legendre basis
//   phi_{e,n}(x) = sqrt(2 / h_e) * Pbar_n(xi),   Pbar_n = sqrt(n + 1/2) P_n,
// so the broken mass matrix is the identity.  All broken inner products are
// evaluated with the same Gauss rule, which defaults to max(r + 2, 6) points
// per element.
class DGSpace {
 public:
  DGSpace(Mesh mesh, int degree, int quad_points = 0);

  const Mesh& mesh() const { return mesh_; }
  int degree() const { return degree_; }
  int dofs_per_element() const { return degree_ + 1; }
  int num_dofs() const { return mesh_.num_elements() * (degree_ + 1); }
  int dof(int e, int n) const { return e * (degree_ + 1) + n; }
  const QuadratureRule& quadrature() const { return rule_; }

  // Reference tables: row = quadrature point, column = mode.
  const Eigen::MatrixXd& basis_at_quad() const { return pq_; }
  const Eigen::MatrixXd& basis_deriv_at_quad() const { return dq_; }
  // Mode traces on the reference endpoints.
  const Eigen::VectorXd& basis_at_left() const { return p_left_; }
  const Eigen::VectorXd& basis_at_right() const { return p_right_; }
  const Eigen::VectorXd& basis_deriv_at_left() const { return d_left_; }
  const Eigen::VectorXd& basis_deriv_at_right() const { return d_right_; }
  // Reference stiffness integrals of Pbar'_m Pbar'_n over [-1, 1].
  const Eigen::MatrixXd& ref_stiffness() const { return ref_stiff_; }

  double scale(int e) const { return scale_[e]; }          // sqrt(2 / h_e)
  double deriv_scale(int e) const { return dscale_[e]; }   // scale * 2 / h_e
  double quad_point(int e, int k) const;
  double quad_weight(int e, int k) const;                  // physical weight

  // Pbar values and derivatives (w.r.t. xi) at an arbitrary reference point.
  Eigen::VectorXd ref_basis(double xi) const;
  Eigen::VectorXd ref_basis_deriv(double xi) const;

 private:
  Mesh mesh_;
  int degree_;
  QuadratureRule rule_;
  Eigen::MatrixXd pq_, dq_, ref_stiff_;
  Eigen::VectorXd p_left_, p_right_, d_left_, d_right_;
  std::vector<double> scale_, dscale_;
};

// Element of the broken space, stored as the coefficient vector in the
// orthonormal element basis (element-major layout).
class DGFunction {
 public:
  explicit DGFunction(std::shared_ptr<const DGSpace> space);

  const DGSpace& space() const { return *space_; }
  const std::shared_ptr<const DGSpace>& space_ptr() const { return space_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }

  // Point evaluation; side picks the element when x is an interior node and
  // is ignored elsewhere.
  double value(double x, Side side) const;
  double derivative(double x, Side side) const;

  // One-sided limits at mesh node j.
  double limit_from_left(int j) const;
  double limit_from_right(int j) const;
  double deriv_limit_from_left(int j) const;
  double deriv_limit_from_right(int j) const;

  // Values and derivatives at every quadrature point of element e.
  Eigen::VectorXd values_at_quad(int e) const;
  Eigen::VectorXd derivs_at_quad(int e) const;

 private:
  std::shared_ptr<const DGSpace> space_;
  Eigen::VectorXd coeffs_;
};

DGFunction l2_project(std::shared_ptr<const DGSpace> space,
                      const std::function<double(double)>& g);

// Boundary-weighted L2 projection: the projection Pt(v) satisfies
//   (Pt(v), phi) + h^{-1/2} [Pt(v)(a) phi(a) + Pt(v)(b) phi(b)]
//     = (v, phi) + h^{-1/2} [va phi(a) + vb phi(b)]
// with h the largest element length, so prescribed boundary values are pulled
// into the projection instead of being overshot by the plain L2 fit.
class ModifiedL2Projector {
 public:
  explicit ModifiedL2Projector(std::shared_ptr<const DGSpace> space);

  DGFunction apply(const std::function<double(double)>& v) const;
  // Integrand supplied by its values at the quadrature points (row = element,
  // column = point) with explicit boundary data.
  DGFunction apply(const Eigen::MatrixXd& quad_values, double va,
                   double vb) const;

 private:
  std::shared_ptr<const DGSpace> space_;
  double weight_;  // h^{-1/2}
  // Only the first and last element blocks differ from the identity.
  Eigen::LDLT<Eigen::MatrixXd> first_solver_, last_solver_;
};

DGFunction modified_l2_project(std::shared_ptr<const DGSpace> space,
                               const std::function<double(double)>& v);

struct ErrorNorms {
  double l2 = 0.0;
  double linf = 0.0;
};

// L2 by quadrature; Linf sampled at quadrature points and one-sided node
// limits.
ErrorNorms error_norms(const DGFunction& f,
                       const std::function<double(double)>& exact);

// Largest |f| over the Linf sample set.
double sampled_max_abs(const DGFunction& f);

// Rows of (element, local index, coefficient).
void write_csv(const DGFunction& f, std::ostream& os);

}  // namespace mipdg
