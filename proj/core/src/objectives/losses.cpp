#include "finetrack/objectives/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace finetrack::objectives {

namespace {

ad::Var zero_scalar() { return ad::Var::constant(ad::Tensor::scalar(0.0)); }

double stable_softplus(double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }
double stable_sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

void check_labels(std::span<const int> labels, int n, const char* what) {
  if (static_cast<int>(labels.size()) != n) {
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(n) + " rows");
  }
}

}  // namespace

TripletResult soft_margin_triplet(const ad::Var& features, std::span<const int> labels) {
  if (features.value().rank() != 2) throw std::invalid_argument("soft_margin_triplet: expected (N, D) features");
  const int N = features.dim(0), D = features.dim(1);
  check_labels(labels, N, "soft_margin_triplet");
  const double* x = features.value().ptr();

  std::vector<double> dist(static_cast<std::size_t>(N) * N, 0.0);
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      double s = 0.0;
      for (int d = 0; d < D; ++d) {
        const double diff = x[i * D + d] - x[j * D + d];
        s += diff * diff;
      }
      dist[i * N + j] = dist[j * N + i] = std::sqrt(s);
    }
  }

  struct Mined {
    int anchor, pos, neg;
  };
  std::vector<Mined> mined;
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    int pos = -1, neg = -1;
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      const double d = dist[i * N + j];
      if (labels[j] == labels[i]) {
        if (pos < 0 || d > dist[i * N + pos]) pos = j;
      } else if (neg < 0 || d < dist[i * N + neg]) {
        neg = j;
      }
    }
    if (pos < 0 || neg < 0) continue;
    mined.push_back({i, pos, neg});
    total += stable_softplus(dist[i * N + pos] - dist[i * N + neg]);
  }

  TripletResult result;
  result.valid_anchors = static_cast<int>(mined.size());
  if (mined.empty()) {
    result.loss = zero_scalar();
    return result;
  }
  const double inv = 1.0 / static_cast<double>(mined.size());
  result.loss = ad::make_op_result(
      ad::Tensor::scalar(total * inv), {features},
      [N, D, inv, mined = std::move(mined), dist = std::move(dist)](ad::Node& self) {
        ad::Node& fn = *self.inputs[0];
        if (!fn.requires_grad) return;
        const double g = self.grad[0] * inv;
        const double* xv = fn.value.ptr();
        double* gx = fn.grad_buffer().ptr();
        // d/dx_a of |x_a - x_b| is (x_a - x_b) / |x_a - x_b|; zero at coincident points.
        auto push = [&](int a, int b, double coeff) {
          const double d = dist[a * N + b];
          if (d < 1e-12) return;
          for (int k = 0; k < D; ++k) {
            const double u = (xv[a * D + k] - xv[b * D + k]) / d;
            gx[a * D + k] += coeff * u;
            gx[b * D + k] -= coeff * u;
          }
        };
        for (const Mined& m : mined) {
          const double s = g * stable_sigmoid(dist[m.anchor * N + m.pos] - dist[m.anchor * N + m.neg]);
          push(m.anchor, m.pos, s);
          push(m.anchor, m.neg, -s);
        }
      });
  return result;
}

ad::Var cross_entropy(const ad::Var& logits, std::span<const int> labels) {
  if (logits.value().rank() != 2) throw std::invalid_argument("cross_entropy: expected (N, M) logits");
  const int N = logits.dim(0), M = logits.dim(1);
  check_labels(labels, N, "cross_entropy");
  if (N == 0) throw std::invalid_argument("cross_entropy: empty batch");
  std::vector<double> prob(static_cast<std::size_t>(N) * M);
  double total = 0.0;
  for (int n = 0; n < N; ++n) {
    if (labels[n] < 0 || labels[n] >= M) {
      throw std::invalid_argument("cross_entropy: label " + std::to_string(labels[n]) + " outside [0, " +
                                  std::to_string(M) + ")");
    }
    const double* z = logits.value().ptr() + static_cast<std::size_t>(n) * M;
    double mx = z[0];
    for (int m = 1; m < M; ++m) mx = std::max(mx, z[m]);
    double s = 0.0;
    for (int m = 0; m < M; ++m) s += std::exp(z[m] - mx);
    for (int m = 0; m < M; ++m) prob[n * M + m] = std::exp(z[m] - mx) / s;
    total -= std::log(std::max(prob[n * M + labels[n]], kProbabilityFloor));
  }
  std::vector<int> y(labels.begin(), labels.end());
  return ad::make_op_result(ad::Tensor::scalar(total / N), {logits},
                            [N, M, prob = std::move(prob), y = std::move(y)](ad::Node& self) {
                              ad::Node& ln = *self.inputs[0];
                              if (!ln.requires_grad) return;
                              const double g = self.grad[0] / N;
                              double* gz = ln.grad_buffer().ptr();
                              for (int n = 0; n < N; ++n) {
                                // Clamped rows contribute a constant.
                                if (prob[n * M + y[n]] < kProbabilityFloor) continue;
                                for (int m = 0; m < M; ++m) {
                                  gz[n * M + m] += g * (prob[n * M + m] - (m == y[n] ? 1.0 : 0.0));
                                }
                              }
                            });
}

ad::Var diversity_loss(const ad::Var& part_features) {
  if (part_features.value().rank() != 3) throw std::invalid_argument("diversity_loss: expected (N, K, D)");
  const int N = part_features.dim(0), K = part_features.dim(1), D = part_features.dim(2);
  if (K < 2) throw std::invalid_argument("diversity_loss: needs at least 2 parts");
  const double* f = part_features.value().ptr();
  std::vector<double> unit(static_cast<std::size_t>(N) * K * D);
  std::vector<double> norm(static_cast<std::size_t>(N) * K);
  for (int nk = 0; nk < N * K; ++nk) {
    double s = 0.0;
    for (int d = 0; d < D; ++d) s += f[nk * D + d] * f[nk * D + d];
    norm[nk] = std::max(std::sqrt(s), kNormFloor);
    for (int d = 0; d < D; ++d) unit[nk * D + d] = f[nk * D + d] / norm[nk];
  }
  const double inv = 1.0 / (static_cast<double>(N) * K * (K - 1));
  double total = 0.0;
  for (int n = 0; n < N; ++n)
    for (int a = 0; a < K; ++a)
      for (int b = 0; b < K; ++b) {
        if (a == b) continue;
        double dot = 0.0;
        for (int d = 0; d < D; ++d) dot += unit[(n * K + a) * D + d] * unit[(n * K + b) * D + d];
        total += dot;
      }
  return ad::make_op_result(
      ad::Tensor::scalar(total * inv), {part_features},
      [N, K, D, inv, unit = std::move(unit), norm = std::move(norm)](ad::Node& self) {
        ad::Node& fn = *self.inputs[0];
        if (!fn.requires_grad) return;
        const double g = self.grad[0] * inv;
        double* gf = fn.grad_buffer().ptr();
        std::vector<double> gu(static_cast<std::size_t>(D));
        for (int n = 0; n < N; ++n) {
          for (int a = 0; a < K; ++a) {
            // d/du_a of the ordered-pair sum is 2 * sum_{b != a} u_b.
            std::fill(gu.begin(), gu.end(), 0.0);
            for (int b = 0; b < K; ++b) {
              if (b == a) continue;
              for (int d = 0; d < D; ++d) gu[d] += 2.0 * g * unit[(n * K + b) * D + d];
            }
            const double* u = &unit[(n * K + a) * D];
            const double nrm = norm[n * K + a];
            double proj = 0.0;
            const bool clamped = nrm <= kNormFloor;
            if (!clamped)
              for (int d = 0; d < D; ++d) proj += u[d] * gu[d];
            for (int d = 0; d < D; ++d) gf[(n * K + a) * D + d] += (gu[d] - proj * u[d]) / nrm;
          }
        }
      });
}

Classifiers::Classifiers(nn::ParameterSet& ps, const std::string& name, int num_parts, int part_dim, int global_dim,
                         int num_identities, Rng& rng) {
  for (int k = 0; k < num_parts; ++k) {
    part_.emplace_back(ps, name + ".part" + std::to_string(k), part_dim, num_identities, rng);
  }
  global_ = nn::Linear(ps, name + ".global", global_dim, num_identities, rng);
}

TripletLosses triplet_losses(const ad::Var& f_part, const ad::Var& f_global, std::span<const int> labels) {
  TripletLosses out;
  TripletResult g = soft_margin_triplet(f_global, labels);
  out.global = g.loss;
  if (g.degenerate()) ++out.degenerate_slices;
  if (!f_part) {
    out.part = zero_scalar();
    return out;
  }
  if (f_part.value().rank() != 3) throw std::invalid_argument("triplet_losses: f_part must be (N, K, D)");
  const int N = f_part.dim(0), K = f_part.dim(1), D = f_part.dim(2);
  std::vector<ad::Var> terms;
  for (int k = 0; k < K; ++k) {
    TripletResult r = soft_margin_triplet(ad::reshape(ad::slice(f_part, k, 1), {N, D}), labels);
    if (r.degenerate()) ++out.degenerate_slices;
    terms.push_back(r.loss);
  }
  std::vector<double> w(static_cast<std::size_t>(K), 1.0 / K);
  out.part = ad::weighted_sum(terms, w);
  return out;
}

ClassificationLosses classification_losses(const ad::Var& f_part, const ad::Var& f_global,
                                           std::span<const int> labels, const Classifiers& classifiers) {
  ClassificationLosses out;
  out.global = cross_entropy(classifiers.global()(f_global), labels);
  if (!f_part) {
    out.part = zero_scalar();
    return out;
  }
  const int N = f_part.dim(0), K = f_part.dim(1), D = f_part.dim(2);
  if (K != classifiers.num_parts()) throw std::invalid_argument("classification_losses: part count mismatch");
  std::vector<ad::Var> terms;
  for (int k = 0; k < K; ++k) {
    terms.push_back(cross_entropy(classifiers.part(k)(ad::reshape(ad::slice(f_part, k, 1), {N, D})), labels));
  }
  // Mean over k of per-part means equals the 1/(K N) double sum.
  std::vector<double> w(static_cast<std::size_t>(K), 1.0 / K);
  out.part = ad::weighted_sum(terms, w);
  return out;
}

ad::Var combine_losses(const ad::Var& cls_part, const ad::Var& tri_part, const ad::Var& cls_global,
                       const ad::Var& tri_global, const ad::Var& diversity, const LossWeights& w) {
  const ad::Var terms[] = {cls_part, tri_part, cls_global, tri_global, diversity};
  const double weights[] = {w.alpha, w.alpha, w.beta, w.beta, w.gamma};
  return ad::weighted_sum(terms, weights);
}

LossBreakdown total_loss(const ad::Var& f_part, const ad::Var& f_global, std::span<const int> labels,
                         const Classifiers& classifiers, const LossWeights& w) {
  LossBreakdown out;
  TripletLosses tri = triplet_losses(f_part, f_global, labels);
  ClassificationLosses cls = classification_losses(f_part, f_global, labels, classifiers);
  out.cls_part = cls.part;
  out.tri_part = tri.part;
  out.cls_global = cls.global;
  out.tri_global = tri.global;
  out.diversity = f_part ? diversity_loss(f_part) : zero_scalar();
  out.degenerate_triplets = tri.degenerate_slices > 0;
  out.total = combine_losses(out.cls_part, out.tri_part, out.cls_global, out.tri_global, out.diversity, w);
  return out;
}

}  // namespace finetrack::objectives
