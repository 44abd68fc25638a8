#include "mipdg/dg_space.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mipdg {

namespace {

// Legendre values and xi-derivatives up to degree r via the three-term and
// derivative recurrences (exact at xi = +-1 as well).
void legendre_all(int r, double xi, Eigen::VectorXd& p, Eigen::VectorXd& dp) {
  p.resize(r + 1);
  dp.resize(r + 1);
  p[0] = 1.0;
  dp[0] = 0.0;
  if (r >= 1) {
    p[1] = xi;
    dp[1] = 1.0;
  }
  for (int n = 1; n < r; ++n) {
    p[n + 1] = ((2 * n + 1) * xi * p[n] - n * p[n - 1]) / (n + 1);
    dp[n + 1] = dp[n - 1] + (2 * n + 1) * p[n];
  }
  for (int n = 0; n <= r; ++n) {
    const double norm = std::sqrt(n + 0.5);
    p[n] *= norm;
    dp[n] *= norm;
  }
}

}  // namespace

DGSpace::DGSpace(Mesh mesh, int degree, int quad_points)
    : mesh_(std::move(mesh)),
      degree_(degree),
      rule_(QuadratureRule::gauss_legendre(
          quad_points > 0 ? quad_points : std::max(degree + 2, 6))) {
  if (degree < 0) {
    throw std::invalid_argument("polynomial degree must be nonnegative");
  }
  if (rule_.size() <= degree) {
    throw std::invalid_argument("quadrature rule too weak for the degree");
  }
  const int q = rule_.size();
  const int m = degree_ + 1;
  pq_.resize(q, m);
  dq_.resize(q, m);
  Eigen::VectorXd p, dp;
  for (int k = 0; k < q; ++k) {
    legendre_all(degree_, rule_.points[k], p, dp);
    pq_.row(k) = p.transpose();
    dq_.row(k) = dp.transpose();
  }
  legendre_all(degree_, -1.0, p_left_, d_left_);
  legendre_all(degree_, 1.0, p_right_, d_right_);

  ref_stiff_.setZero(m, m);
  for (int k = 0; k < q; ++k) {
    ref_stiff_ += rule_.weights[k] * dq_.row(k).transpose() * dq_.row(k);
  }

  scale_.resize(mesh_.num_elements());
  dscale_.resize(mesh_.num_elements());
  for (int e = 0; e < mesh_.num_elements(); ++e) {
    const double h = mesh_.element_length(e);
    scale_[e] = std::sqrt(2.0 / h);
    dscale_[e] = scale_[e] * 2.0 / h;
  }
}

double DGSpace::quad_point(int e, int k) const {
  const double h = mesh_.element_length(e);
  return mesh_.node(e) + 0.5 * h * (rule_.points[k] + 1.0);
}

double DGSpace::quad_weight(int e, int k) const {
  return 0.5 * mesh_.element_length(e) * rule_.weights[k];
}

Eigen::VectorXd DGSpace::ref_basis(double xi) const {
  Eigen::VectorXd p, dp;
  legendre_all(degree_, xi, p, dp);
  return p;
}

Eigen::VectorXd DGSpace::ref_basis_deriv(double xi) const {
  Eigen::VectorXd p, dp;
  legendre_all(degree_, xi, p, dp);
  return dp;
}

DGFunction::DGFunction(std::shared_ptr<const DGSpace> space)
    : space_(std::move(space)) {
  coeffs_ = Eigen::VectorXd::Zero(space_->num_dofs());
}

namespace {

double eval_in_element(const DGSpace& s, const Eigen::VectorXd& c, int e,
                       double x, bool deriv) {
  const Mesh& mesh = s.mesh();
  const double h = mesh.element_length(e);
  const double xi = 2.0 * (x - mesh.node(e)) / h - 1.0;
  const int m = s.dofs_per_element();
  const Eigen::VectorXd basis = deriv ? s.ref_basis_deriv(xi) : s.ref_basis(xi);
  const double factor = deriv ? s.deriv_scale(e) : s.scale(e);
  return factor * basis.dot(c.segment(e * m, m));
}

}  // namespace

double DGFunction::value(double x, Side side) const {
  const int e = space_->mesh().element_containing(x, side == Side::left);
  return eval_in_element(*space_, coeffs_, e, x, false);
}

double DGFunction::derivative(double x, Side side) const {
  const int e = space_->mesh().element_containing(x, side == Side::left);
  return eval_in_element(*space_, coeffs_, e, x, true);
}

double DGFunction::limit_from_left(int j) const {
  const int m = space_->dofs_per_element();
  const int e = j - 1;
  return space_->scale(e) *
         space_->basis_at_right().dot(coeffs_.segment(e * m, m));
}

double DGFunction::limit_from_right(int j) const {
  const int m = space_->dofs_per_element();
  return space_->scale(j) *
         space_->basis_at_left().dot(coeffs_.segment(j * m, m));
}

double DGFunction::deriv_limit_from_left(int j) const {
  const int m = space_->dofs_per_element();
  const int e = j - 1;
  return space_->deriv_scale(e) *
         space_->basis_deriv_at_right().dot(coeffs_.segment(e * m, m));
}

double DGFunction::deriv_limit_from_right(int j) const {
  const int m = space_->dofs_per_element();
  return space_->deriv_scale(j) *
         space_->basis_deriv_at_left().dot(coeffs_.segment(j * m, m));
}

Eigen::VectorXd DGFunction::values_at_quad(int e) const {
  const int m = space_->dofs_per_element();
  return space_->scale(e) * (space_->basis_at_quad() * coeffs_.segment(e * m, m));
}

Eigen::VectorXd DGFunction::derivs_at_quad(int e) const {
  const int m = space_->dofs_per_element();
  return space_->deriv_scale(e) *
         (space_->basis_deriv_at_quad() * coeffs_.segment(e * m, m));
}

DGFunction l2_project(std::shared_ptr<const DGSpace> space,
                      const std::function<double(double)>& g) {
  DGFunction f(space);
  const DGSpace& s = *space;
  const int m = s.dofs_per_element();
  const int q = s.quadrature().size();
  Eigen::VectorXd gvals(q);
  for (int e = 0; e < s.mesh().num_elements(); ++e) {
    for (int k = 0; k < q; ++k) {
      gvals[k] = s.quad_weight(e, k) * g(s.quad_point(e, k));
    }
    f.coeffs().segment(e * m, m) =
        s.scale(e) * (s.basis_at_quad().transpose() * gvals);
  }
  return f;
}

ModifiedL2Projector::ModifiedL2Projector(std::shared_ptr<const DGSpace> space)
    : space_(std::move(space)) {
  const DGSpace& s = *space_;
  const int m = s.dofs_per_element();
  const int last = s.mesh().num_elements() - 1;
  weight_ = 1.0 / std::sqrt(s.mesh().max_element_length());

  const Eigen::VectorXd ta = s.scale(0) * s.basis_at_left();
  const Eigen::VectorXd tb = s.scale(last) * s.basis_at_right();
  Eigen::MatrixXd first = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd lastm = Eigen::MatrixXd::Identity(m, m);
  first += weight_ * ta * ta.transpose();
  if (last == 0) {
    first += weight_ * tb * tb.transpose();
    lastm = first;
  } else {
    lastm += weight_ * tb * tb.transpose();
  }
  first_solver_.compute(first);
  last_solver_.compute(lastm);
}

DGFunction ModifiedL2Projector::apply(const Eigen::MatrixXd& quad_values,
                                      double va, double vb) const {
  const DGSpace& s = *space_;
  const int m = s.dofs_per_element();
  const int q = s.quadrature().size();
  const int ne = s.mesh().num_elements();
  DGFunction f(space_);
  Eigen::VectorXd wv(q);
  for (int e = 0; e < ne; ++e) {
    for (int k = 0; k < q; ++k) {
      wv[k] = s.quad_weight(e, k) * quad_values(e, k);
    }
    f.coeffs().segment(e * m, m) =
        s.scale(e) * (s.basis_at_quad().transpose() * wv);
  }
  const int last = ne - 1;
  Eigen::VectorXd rhs_first = f.coeffs().segment(0, m) +
                              weight_ * va * s.scale(0) * s.basis_at_left();
  if (last == 0) {
    rhs_first += weight_ * vb * s.scale(0) * s.basis_at_right();
    f.coeffs().segment(0, m) = first_solver_.solve(rhs_first);
    return f;
  }
  f.coeffs().segment(0, m) = first_solver_.solve(rhs_first);
  Eigen::VectorXd rhs_last =
      f.coeffs().segment(last * m, m) +
      weight_ * vb * s.scale(last) * s.basis_at_right();
  f.coeffs().segment(last * m, m) = last_solver_.solve(rhs_last);
  return f;
}

DGFunction ModifiedL2Projector::apply(
    const std::function<double(double)>& v) const {
  const DGSpace& s = *space_;
  const int q = s.quadrature().size();
  const int ne = s.mesh().num_elements();
  Eigen::MatrixXd vals(ne, q);
  for (int e = 0; e < ne; ++e) {
    for (int k = 0; k < q; ++k) {
      vals(e, k) = v(s.quad_point(e, k));
    }
  }
  return apply(vals, v(s.mesh().a()), v(s.mesh().b()));
}

DGFunction modified_l2_project(std::shared_ptr<const DGSpace> space,
                               const std::function<double(double)>& v) {
  return ModifiedL2Projector(std::move(space)).apply(v);
}

ErrorNorms error_norms(const DGFunction& f,
                       const std::function<double(double)>& exact) {
  const DGSpace& s = f.space();
  const int q = s.quadrature().size();
  ErrorNorms norms;
  double l2sq = 0.0;
  for (int e = 0; e < s.mesh().num_elements(); ++e) {
    const Eigen::VectorXd vals = f.values_at_quad(e);
    for (int k = 0; k < q; ++k) {
      const double diff = vals[k] - exact(s.quad_point(e, k));
      l2sq += s.quad_weight(e, k) * diff * diff;
      norms.linf = std::max(norms.linf, std::abs(diff));
    }
  }
  const Mesh& mesh = s.mesh();
  for (int j = 0; j <= mesh.num_elements(); ++j) {
    const double g = exact(mesh.node(j));
    if (j > 0) {
      norms.linf = std::max(norms.linf, std::abs(f.limit_from_left(j) - g));
    }
    if (j < mesh.num_elements()) {
      norms.linf = std::max(norms.linf, std::abs(f.limit_from_right(j) - g));
    }
  }
  norms.l2 = std::sqrt(l2sq);
  return norms;
}

double sampled_max_abs(const DGFunction& f) {
  return error_norms(f, [](double) { return 0.0; }).linf;
}

void write_csv(const DGFunction& f, std::ostream& os) {
  os << "element,index,coefficient\n";
  const int m = f.space().dofs_per_element();
  for (int e = 0; e < f.space().mesh().num_elements(); ++e) {
    for (int n = 0; n < m; ++n) {
      os << e << ',' << n << ',' << f.coeffs()[f.space().dof(e, n)] << '\n';
    }
  }
}

}  // namespace mipdg
