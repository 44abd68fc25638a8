#include "mipdg/dg_forms.hpp"

#include <cmath>
#include <iostream>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace mipdg {

void PenaltyConfig::validate() const {
  for (double g : gamma) {
    if (!(g > 0.0)) {
      throw std::invalid_argument("penalty weights must be positive");
    }
  }
  if (epsilon < -1 || epsilon > 1) {
    throw std::invalid_argument("epsilon must be -1, 0, or 1");
  }
}

bool PenaltyConfig::centered_weight_dominates() const {
  return gamma[1] > std::max(gamma[0], gamma[2]);
}

double jump(const DGFunction& v, int node) {
  const int last = v.space().mesh().num_elements();
  if (node == 0) return -v.limit_from_right(0);
  if (node == last) return v.limit_from_left(last);
  return v.limit_from_left(node) - v.limit_from_right(node);
}

double average(const DGFunction& v, int node) {
  const int last = v.space().mesh().num_elements();
  if (node == 0) return v.limit_from_right(0);
  if (node == last) return v.limit_from_left(last);
  return 0.5 * (v.limit_from_left(node) + v.limit_from_right(node));
}

double penalty_sum(const DGFunction& v, const DGFunction& w, double gamma) {
  const Mesh& mesh = v.space().mesh();
  double sum = 0.0;
  for (int j = 0; j <= mesh.num_elements(); ++j) {
    sum += gamma / mesh.node_pair_length(j) * jump(v, j) * jump(w, j);
  }
  return sum;
}

namespace {

struct ElementTraces {
  Eigen::VectorXd val_left, val_right, der_left, der_right;
};

ElementTraces element_traces(const DGSpace& s, int e) {
  ElementTraces t;
  t.val_left = s.scale(e) * s.basis_at_left();
  t.val_right = s.scale(e) * s.basis_at_right();
  t.der_left = s.deriv_scale(e) * s.basis_deriv_at_left();
  t.der_right = s.deriv_scale(e) * s.basis_deriv_at_right();
  return t;
}

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_outer(Triplets& out, const DGSpace& s, int row_elem,
               const Eigen::VectorXd& rows, int col_elem,
               const Eigen::VectorXd& cols, double factor) {
  if (factor == 0.0) return;
  const int m = s.dofs_per_element();
  for (int k = 0; k < m; ++k) {
    for (int n = 0; n < m; ++n) {
      out.emplace_back(s.dof(row_elem, k), s.dof(col_elem, n),
                       factor * rows[k] * cols[n]);
    }
  }
}

Triplets penalized_laplacian_triplets(const DGSpace& s,
                                      const PenaltyConfig& cfg, int k) {
  const Mesh& mesh = s.mesh();
  const int ne = mesh.num_elements();
  const int m = s.dofs_per_element();
  const double gamma = cfg.gamma[k];
  const double eps = cfg.epsilon;
  Triplets out;

  for (int e = 0; e < ne; ++e) {
    const double f = 4.0 / (mesh.element_length(e) * mesh.element_length(e));
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        out.emplace_back(s.dof(e, r), s.dof(e, c), f * s.ref_stiffness()(r, c));
      }
    }
  }

  const ElementTraces first = element_traces(s, 0);
  const ElementTraces last = element_traces(s, ne - 1);
  // Nitsche terms: + u'(a) w(a) - eps u(a) w'(a) - u'(b) w(b) + eps u(b) w'(b).
  add_outer(out, s, 0, first.val_left, 0, first.der_left, 1.0);
  add_outer(out, s, 0, first.der_left, 0, first.val_left, -eps);
  add_outer(out, s, ne - 1, last.val_right, ne - 1, last.der_right, -1.0);
  add_outer(out, s, ne - 1, last.der_right, ne - 1, last.val_right, eps);

  // Penalty over every node, boundary jump conventions included.
  add_outer(out, s, 0, first.val_left, 0, first.val_left,
            gamma / mesh.node_pair_length(0));
  add_outer(out, s, ne - 1, last.val_right, ne - 1, last.val_right,
            gamma / mesh.node_pair_length(ne));
  for (int j = 1; j < ne; ++j) {
    const double c = gamma / mesh.node_pair_length(j);
    const ElementTraces tl = element_traces(s, j - 1);
    const ElementTraces tr = element_traces(s, j);
    add_outer(out, s, j - 1, tl.val_right, j - 1, tl.val_right, c);
    add_outer(out, s, j - 1, tl.val_right, j, tr.val_left, -c);
    add_outer(out, s, j, tr.val_left, j - 1, tl.val_right, -c);
    add_outer(out, s, j, tr.val_left, j, tr.val_left, c);
  }
  return out;
}

// Interior flux corrections, subtracted from the penalized Laplacian:
//   sum_j  D_k(u)(x_j) [w(x_j)] - eps [u(x_j)] D_k(w)(x_j),
// where D_k takes the derivative trace from the left (k = 0), the average
// (k = 1), or the right (k = 2).
Triplets flux_correction_triplets(const DGSpace& s, const PenaltyConfig& cfg,
                                  int k) {
  const Mesh& mesh = s.mesh();
  const int ne = mesh.num_elements();
  const double eps = cfg.epsilon;
  Triplets out;
  for (int j = 1; j < ne; ++j) {
    const ElementTraces tl = element_traces(s, j - 1);
    const ElementTraces tr = element_traces(s, j);
    // (element, coefficient) pairs describing D_k and the jump at node j.
    std::vector<std::pair<int, Eigen::VectorXd>> deriv;
    if (k == 0) {
      deriv.emplace_back(j - 1, tl.der_right);
    } else if (k == 2) {
      deriv.emplace_back(j, tr.der_left);
    } else {
      deriv.emplace_back(j - 1, 0.5 * tl.der_right);
      deriv.emplace_back(j, 0.5 * tr.der_left);
    }
    const std::array<std::pair<int, Eigen::VectorXd>, 2> jmp = {
        std::make_pair(j - 1, tl.val_right), std::make_pair(j, -tr.val_left)};

    for (const auto& [je, jv] : jmp) {
      for (const auto& [de, dv] : deriv) {
        // - D_k(u) [w]  (rows from the jump, columns from the derivative)
        add_outer(out, s, je, jv, de, dv, -1.0);
        // + eps [u] D_k(w)  (rows from the derivative, columns from the jump)
        add_outer(out, s, de, dv, je, jv, eps);
      }
    }
  }
  return out;
}

Eigen::SparseMatrix<double> from_triplets(const DGSpace& s, Triplets t) {
  Eigen::SparseMatrix<double> mat(s.num_dofs(), s.num_dofs());
  mat.setFromTriplets(t.begin(), t.end());
  mat.makeCompressed();
  return mat;
}

}  // namespace

Eigen::SparseMatrix<double> assemble_penalized_laplacian(
    const DGSpace& space, const PenaltyConfig& config, int k) {
  config.validate();
  return from_triplets(space, penalized_laplacian_triplets(space, config, k));
}

AssembledForms assemble(std::shared_ptr<const DGSpace> space,
                        const PenaltyConfig& config) {
  config.validate();
  if (!config.centered_weight_dominates()) {
    std::cerr << "warning: centered penalty weight " << config.gamma[1]
              << " does not dominate the one-sided weights; the three "
                 "discrete second derivatives may coincide\n";
  }
  const DGSpace& s = *space;
  AssembledForms forms;
  forms.space = space;
  forms.config = config;
  forms.mass = Eigen::SparseMatrix<double>(s.num_dofs(), s.num_dofs());
  forms.mass.setIdentity();

  const Mesh& mesh = s.mesh();
  const int ne = mesh.num_elements();
  const int m = s.dofs_per_element();
  const ElementTraces first = element_traces(s, 0);
  const ElementTraces last = element_traces(s, ne - 1);

  for (int k = 0; k < 3; ++k) {
    Triplets t = penalized_laplacian_triplets(s, config, k);
    const Triplets corr = flux_correction_triplets(s, config, k);
    t.insert(t.end(), corr.begin(), corr.end());
    forms.flux[k] = from_triplets(s, std::move(t));

    Eigen::VectorXd fa = Eigen::VectorXd::Zero(s.num_dofs());
    Eigen::VectorXd fb = Eigen::VectorXd::Zero(s.num_dofs());
    const double eps = config.epsilon;
    fa.segment(0, m) = config.gamma[k] / mesh.node_pair_length(0) *
                           first.val_left -
                       eps * first.der_left;
    fb.segment((ne - 1) * m, m) = config.gamma[k] /
                                      mesh.node_pair_length(ne) *
                                      last.val_right +
                                  eps * last.der_right;
    forms.boundary_a[k] = std::move(fa);
    forms.boundary_b[k] = std::move(fb);
  }
  return forms;
}

std::array<double, 3> magic_formula_residuals(const DGFunction& v,
                                              const DGFunction& w, int node) {
  const double vl = v.limit_from_left(node);
  const double vr = v.limit_from_right(node);
  const double wl = w.limit_from_left(node);
  const double wr = w.limit_from_right(node);
  const double product_jump = vl * wl - vr * wr;
  const double jv = vl - vr;
  const double jw = wl - wr;
  const double av = 0.5 * (vl + vr);
  const double aw = 0.5 * (wl + wr);
  return {product_jump - (vl * jw + jv * wr),
          product_jump - (av * jw + jv * aw),
          product_jump - (vr * jw + jv * wl)};
}

void write_debug_csv(const AssembledForms& forms, std::ostream& os) {
  const int n = forms.space->num_dofs();
  if (n > 64) {
    throw std::invalid_argument("debug dump limited to 64 degrees of freedom");
  }
  const auto dump = [&](const char* name, const Eigen::MatrixXd& mat) {
    for (int r = 0; r < n; ++r) {
      os << name << ',' << r;
      for (int c = 0; c < n; ++c) os << ',' << mat(r, c);
      os << '\n';
    }
  };
  os << "matrix,row,values\n";
  dump("mass", Eigen::MatrixXd(forms.mass));
  dump("flux1", Eigen::MatrixXd(forms.flux[0]));
  dump("flux2", Eigen::MatrixXd(forms.flux[1]));
  dump("flux3", Eigen::MatrixXd(forms.flux[2]));
}

}  // namespace mipdg
