#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace finetrack::metrics {

struct RetrievalResult {
  double rank1 = 0.0;
  double map = 0.0;
  int num_queries = 0;
};

/// Average precision of a ranked 0/1 relevance list; throws when no entry is relevant.
double average_precision(std::span<const int> relevance);

/// Gallery ranked per query by descending cosine similarity (ties keep
/// gallery order). Throws when a query label has no gallery match or the
/// sets are empty.
RetrievalResult rank1_map(std::span<const Eigen::VectorXd> query, std::span<const int> query_labels,
                          std::span<const Eigen::VectorXd> gallery, std::span<const int> gallery_labels);

}  // namespace finetrack::metrics
