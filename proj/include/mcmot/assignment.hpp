#pragma once

#include <vector>

namespace mcmot {

/// Minimum-cost assignment for a rows x cols cost matrix (Kuhn-Munkres with
/// potentials, O(n^2 m)). Returns, per row, the assigned column or -1 when
/// rows outnumber columns.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace mcmot
