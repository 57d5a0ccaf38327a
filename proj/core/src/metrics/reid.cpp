#include "finetrack/metrics/reid.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace finetrack::metrics {

double average_precision(std::span<const int> relevance) {
  int hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < relevance.size(); ++i) {
    if (relevance[i]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  if (hits == 0) throw std::invalid_argument("average_precision: no relevant item");
  return sum / hits;
}

RetrievalResult rank1_map(std::span<const Eigen::VectorXd> query, std::span<const int> query_labels,
                          std::span<const Eigen::VectorXd> gallery, std::span<const int> gallery_labels) {
  if (query.empty() || gallery.empty()) throw std::invalid_argument("rank1_map: empty query or gallery");
  if (query.size() != query_labels.size() || gallery.size() != gallery_labels.size()) {
    throw std::invalid_argument("rank1_map: label count mismatch");
  }
  RetrievalResult r;
  std::vector<int> order(gallery.size());
  std::vector<double> sim(gallery.size());
  std::vector<int> relevance(gallery.size());
  for (std::size_t q = 0; q < query.size(); ++q) {
    if (std::find(gallery_labels.begin(), gallery_labels.end(), query_labels[q]) == gallery_labels.end()) {
      throw std::invalid_argument("rank1_map: query " + std::to_string(q) + " label " +
                                  std::to_string(query_labels[q]) + " is absent from the gallery");
    }
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      const double denom = query[q].norm() * gallery[g].norm();
      if (denom <= 0.0) throw std::invalid_argument("rank1_map: zero embedding");
      sim[g] = query[q].dot(gallery[g]) / denom;
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sim[a] > sim[b]; });
    for (std::size_t i = 0; i < order.size(); ++i) relevance[i] = gallery_labels[order[i]] == query_labels[q];
    r.rank1 += relevance[0];
    r.map += average_precision(relevance);
  }
  r.num_queries = static_cast<int>(query.size());
  r.rank1 /= r.num_queries;
  r.map /= r.num_queries;
  return r;
}

}  // namespace finetrack::metrics
