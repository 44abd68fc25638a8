#pragma once

#include <vector>

namespace mipdg {

// Partition a = x_0 < x_1 < ... < x_J = b of an interval.  Elements are
// indexed 0-based: element e spans (node(e), node(e+1)).
class Mesh {
 public:
  explicit Mesh(std::vector<double> nodes);
  static Mesh uniform(double a, double b, int num_elements);

  int num_elements() const { return static_cast<int>(nodes_.size()) - 1; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  double node(int j) const { return nodes_[j]; }
  double a() const { return nodes_.front(); }
  double b() const { return nodes_.back(); }
  const std::vector<double>& nodes() const { return nodes_; }

  double element_length(int e) const { return nodes_[e + 1] - nodes_[e]; }
  double max_element_length() const { return h_max_; }

  // Larger of the two element lengths meeting at node j; a missing neighbour
  // at the domain ends counts as length zero, so boundary nodes return the
  // length of their single adjacent element.
  double node_pair_length(int j) const;

  // Index of the element whose closure contains x.  Ties at interior nodes go
  // to the left element when from_left, else to the right; the domain ends
  // always resolve to the single adjacent element.
  int element_containing(double x, bool from_left) const;

 private:
  std::vector<double> nodes_;
  double h_max_ = 0.0;
};

}  // namespace mipdg
