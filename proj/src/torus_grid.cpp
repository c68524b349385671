#include "expphi/torus_grid.hpp"

#include <stdexcept>
#include <string>

namespace expphi {

TorusGrid::TorusGrid(int modes_per_dim) : m_(modes_per_dim) {
  if (m_ < 8) {
    throw std::invalid_argument("grid size must be at least 8, got " + std::to_string(m_));
  }
  if ((m_ & (m_ - 1)) != 0) {
    throw std::invalid_argument("grid size must be a power of two, got " + std::to_string(m_));
  }
}

TorusGrid make_grid(int modes_per_dim) { return TorusGrid(modes_per_dim); }

}  // namespace expphi
