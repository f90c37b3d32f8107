// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "core.hpp"

namespace starnoma {

/// Result of a maximum-weight square assignment; column_of[i] is the column matched to row i.
struct Assignment {
    std::vector<int> column_of;
    double value = 0.0;
    std::uint64_t inner_steps = 0; // inner-loop count, for complexity checks
};

/// Hungarian method (shortest augmenting paths with potentials), O(n^3).
template <class Matrix>
Assignment solve_assignment(const Matrix& score) {
    const auto n = static_cast<int>(score.rows());
    if (score.cols() != score.rows()) throw InvalidArgument("solve_assignment: matrix must be square");
    Assignment out;
    out.column_of.assign(n, -1);
    if (n == 0) return out;

    constexpr double inf = std::numeric_limits<double>::infinity();
    // Minimize -score; arrays are 1-based with index 0 as the virtual start.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                ++out.inner_steps;
                if (used[j]) continue;
                const double cur = -static_cast<double>(score(i0 - 1, j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    for (int j = 1; j <= n; ++j) out.column_of[p[j] - 1] = j - 1;
    for (int i = 0; i < n; ++i) out.value += static_cast<double>(score(i, out.column_of[i]));
    return out;
}

} // namespace starnoma
