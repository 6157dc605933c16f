#pragma once

#include <vector>

#include "fpfv/mesh.hpp"

namespace fpfv {

/// One scalar per cell.
class CellField {
 public:
  CellField() = default;
  explicit CellField(int n, double value = 0.0) : data_(static_cast<size_t>(n), value) {}
  explicit CellField(std::vector<double> values) : data_(std::move(values)) {}

  int size() const { return static_cast<int>(data_.size()); }
  double& operator[](int k) { return data_[static_cast<size_t>(k)]; }
  double operator[](int k) const { return data_[static_cast<size_t>(k)]; }
  const std::vector<double>& values() const { return data_; }
  std::vector<double>& values() { return data_; }

  double mass(const Mesh& mesh) const;  // sum m_K rho_K
  double min() const;
  double max() const;

 private:
  std::vector<double> data_;
};

/// One conservative value per interior facet, stored in the facet's canonical
/// left -> right orientation; F_{L sigma} = -F_{K sigma} by sign convention.
class EdgeField {
 public:
  EdgeField() = default;
  explicit EdgeField(int n, double value = 0.0) : data_(static_cast<size_t>(n), value) {}

  int size() const { return static_cast<int>(data_.size()); }
  double& operator[](int f) { return data_[static_cast<size_t>(f)]; }
  double operator[](int f) const { return data_[static_cast<size_t>(f)]; }
  const std::vector<double>& values() const { return data_; }

 private:
  std::vector<double> data_;
};

/// Cellwise potential samples V_K with the Gibbs weights pi_K = exp(-V_K)
/// and facet weights pi_sigma = sqrt(pi_K pi_L).
struct PotentialField {
  CellField V;
  CellField pi;
  std::vector<double> pi_sigma;  // per interior facet
};

}  // namespace fpfv
