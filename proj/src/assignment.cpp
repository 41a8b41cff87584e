#include "mcmwc/assignment.hpp"

#include <limits>
#include <stdexcept>

namespace mcmwc {

std::vector<std::size_t> max_assignment(const std::vector<std::vector<double>>& w) {
    const std::size_t n = w.size();
    if (n == 0) throw std::invalid_argument("empty weight matrix");
    for (const auto& row : w)
        if (row.size() != n) throw std::invalid_argument("weight matrix not square");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // minimize -w with dual potentials; 1-based with a virtual column 0
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            std::size_t i0 = match[j0], j1 = 0;
            double delta = kInf;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = -w[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> result(n);
    for (std::size_t j = 1; j <= n; ++j) result[match[j] - 1] = j - 1;
    return result;
}

}  // namespace mcmwc
