#pragma once

#include <cstddef>
#include <vector>

namespace mcmwc {

// Maximum-weight perfect matching on an n x n weight matrix via the O(n^3)
// potentials (Jonker-Volgenant) algorithm. Returns row -> column.
std::vector<std::size_t> max_assignment(const std::vector<std::vector<double>>& w);

}  // namespace mcmwc
