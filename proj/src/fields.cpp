#include "fpfv/fields.hpp"

#include <algorithm>
#include <limits>

namespace fpfv {

double CellField::mass(const Mesh& mesh) const {
  double m = 0.0;
  for (int k = 0; k < size(); ++k) m += mesh.cells[k].area * data_[static_cast<size_t>(k)];
  return m;
}

double CellField::min() const {
  return data_.empty() ? std::numeric_limits<double>::quiet_NaN()
                       : *std::min_element(data_.begin(), data_.end());
}

double CellField::max() const {
  return data_.empty() ? std::numeric_limits<double>::quiet_NaN()
                       : *std::max_element(data_.begin(), data_.end());
}

}  // namespace fpfv
