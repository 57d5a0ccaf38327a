#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace finetrack::tracker {

/// Minimum-cost assignment of a rectangular matrix: every row of the
/// smaller side is matched. Returns the matched column per row, -1 if none.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

struct Assignment {
  std::vector<std::pair<int, int>> matches;  // (row, col), ascending rows
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
};

/// Minimum-cost assignment, then every match costing more than `threshold`
/// is dissolved. Throws on non-finite costs.
Assignment hungarian_assign(const Eigen::MatrixXd& cost, double threshold);

}  // namespace finetrack::tracker
