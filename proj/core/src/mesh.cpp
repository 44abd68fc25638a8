#include "mipdg/mesh.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mipdg {

Mesh::Mesh(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) {
    throw std::invalid_argument("mesh needs at least two nodes");
  }
  for (std::size_t j = 1; j < nodes_.size(); ++j) {
    if (!(nodes_[j] > nodes_[j - 1])) {
      throw std::invalid_argument("mesh nodes must be strictly increasing");
    }
    h_max_ = std::max(h_max_, nodes_[j] - nodes_[j - 1]);
  }
}

Mesh Mesh::uniform(double a, double b, int num_elements) {
  if (num_elements < 1) {
    throw std::invalid_argument("mesh needs at least one element");
  }
  if (!(b > a)) {
    throw std::invalid_argument("mesh interval is empty");
  }
  std::vector<double> nodes(num_elements + 1);
  for (int j = 0; j <= num_elements; ++j) {
    nodes[j] = a + (b - a) * static_cast<double>(j) / num_elements;
  }
  nodes.front() = a;
  nodes.back() = b;
  return Mesh(std::move(nodes));
}

double Mesh::node_pair_length(int j) const {
  if (j < 0 || j >= num_nodes()) {
    throw std::out_of_range("node index " + std::to_string(j));
  }
  const double left = j > 0 ? element_length(j - 1) : 0.0;
  const double right = j < num_elements() ? element_length(j) : 0.0;
  return std::max(left, right);
}

int Mesh::element_containing(double x, bool from_left) const {
  if (x < a() || x > b()) {
    throw std::out_of_range("point outside mesh interval");
  }
  if (x <= nodes_.front()) return 0;
  if (x >= nodes_.back()) return num_elements() - 1;
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
  if (*it == x) {
    const int j = static_cast<int>(it - nodes_.begin());
    return from_left ? j - 1 : j;
  }
  return static_cast<int>(it - nodes_.begin()) - 1;
}

}  // namespace mipdg
