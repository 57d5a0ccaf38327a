#include "finetrack/autograd/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace finetrack::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void require_rank(const Var& x, int rank, const char* op) {
  require(x.value().rank() == rank, std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                                        shape_string(x.shape()));
}

Node& in(Node& self, std::size_t i) { return *self.inputs[i]; }

template <typename F>
Var unary_elementwise(const Var& x, F forward, double (*deriv)(double x, double y)) {
  Tensor out(x.shape());
  const auto xs = x.value().data();
  auto ys = out.data();
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = forward(xs[i]);
  return make_op_result(std::move(out), {x}, [deriv](Node& self) {
    Node& a = in(self, 0);
    if (!a.requires_grad) return;
    auto g = a.grad_buffer().data();
    const auto xv = a.value.data();
    const auto yv = self.value.data();
    const auto go = self.grad.data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += go[i] * deriv(xv[i], yv[i]);
  });
}

struct AxisLayout {
  std::size_t outer = 1;  // product of dims before axis 1
  std::size_t inner = 1;  // product of dims after axis 1
};

AxisLayout axis1_layout(const Shape& s) {
  AxisLayout l;
  l.outer = static_cast<std::size_t>(s[0]);
  for (std::size_t i = 2; i < s.size(); ++i) l.inner *= static_cast<std::size_t>(s[i]);
  return l;
}

// Copies the receptive fields of one sample into a (C*k*k, OH*OW) matrix.
void im2col(const double* x, int C, int H, int W, int k, int stride, int pad, int OH, int OW, double* cols) {
  for (int c = 0; c < C; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = cols + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * OH * OW;
        for (int oy = 0; oy < OH; ++oy) {
          const int iy = oy * stride - pad + ky;
          for (int ox = 0; ox < OW; ++ox) {
            const int ix = ox * stride - pad + kx;
            row[oy * OW + ox] =
                (iy >= 0 && iy < H && ix >= 0 && ix < W) ? x[(static_cast<std::size_t>(c) * H + iy) * W + ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* cols, int C, int H, int W, int k, int stride, int pad, int OH, int OW, double* x) {
  for (int c = 0; c < C; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = cols + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * OH * OW;
        for (int oy = 0; oy < OH; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= H) continue;
          for (int ox = 0; ox < OW; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < W) x[(static_cast<std::size_t>(c) * H + iy) * W + ix] += row[oy * OW + ox];
          }
        }
      }
    }
  }
}

// Bilinear source index for align_corners = false resizing.
struct ResizeTap {
  int i0, i1;
  double w0, w1;
};

std::vector<ResizeTap> resize_taps(int in_size, int out_size) {
  std::vector<ResizeTap> taps(static_cast<std::size_t>(out_size));
  const double ratio = static_cast<double>(in_size) / out_size;
  for (int o = 0; o < out_size; ++o) {
    double src = ratio * (o + 0.5) - 0.5;
    if (src < 0) src = 0;
    int i0 = static_cast<int>(src);
    if (i0 > in_size - 1) i0 = in_size - 1;
    const int i1 = i0 < in_size - 1 ? i0 + 1 : i0;
    const double l1 = src - i0;
    taps[static_cast<std::size_t>(o)] = {i0, i1, 1.0 - l1, l1};
  }
  return taps;
}

// Bilinear tap with zero padding outside [0, size).
struct WarpTap {
  int x0, y0;
  double fx, fy;  // fractional parts
};

inline WarpTap warp_tap(double sx, double sy) {
  const double fx0 = std::floor(sx);
  const double fy0 = std::floor(sy);
  return {static_cast<int>(fx0), static_cast<int>(fy0), sx - fx0, sy - fy0};
}

// ROIAlign bilinear tap following the torchvision boundary policy.
struct RoiTap {
  bool valid = false;
  int y0 = 0, y1 = 0, x0 = 0, x1 = 0;
  double w00 = 0, w01 = 0, w10 = 0, w11 = 0;
};

RoiTap roi_tap(double y, double x, int H, int W) {
  RoiTap t;
  if (y < -1.0 || y > H || x < -1.0 || x > W) return t;
  if (y <= 0) y = 0;
  if (x <= 0) x = 0;
  t.y0 = static_cast<int>(y);
  t.x0 = static_cast<int>(x);
  if (t.y0 >= H - 1) {
    t.y0 = t.y1 = H - 1;
    y = t.y0;
  } else {
    t.y1 = t.y0 + 1;
  }
  if (t.x0 >= W - 1) {
    t.x0 = t.x1 = W - 1;
    x = t.x0;
  } else {
    t.x1 = t.x0 + 1;
  }
  const double ly = y - t.y0, lx = x - t.x0;
  const double hy = 1.0 - ly, hx = 1.0 - lx;
  t.w00 = hy * hx;
  t.w01 = hy * lx;
  t.w10 = ly * hx;
  t.w11 = ly * lx;
  t.valid = true;
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------

Var add(const Var& a, const Var& b) {
  check_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  out.add_(b.value());
  return make_op_result(std::move(out), {a, b}, [](Node& self) {
    for (int i = 0; i < 2; ++i)
      if (in(self, i).requires_grad) in(self, i).grad_buffer().add_(self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  out.add_scaled_(b.value(), -1.0);
  return make_op_result(std::move(out), {a, b}, [](Node& self) {
    if (in(self, 0).requires_grad) in(self, 0).grad_buffer().add_(self.grad);
    if (in(self, 1).requires_grad) in(self, 1).grad_buffer().add_scaled_(self.grad, -1.0);
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a.value(), b.value(), "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  return make_op_result(std::move(out), {a, b}, [](Node& self) {
    Node& x = in(self, 0);
    Node& y = in(self, 1);
    if (x.requires_grad) {
      auto& g = x.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * y.value[i];
    }
    if (y.requires_grad) {
      auto& g = y.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * x.value[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= s;
  return make_op_result(std::move(out), {a}, [s](Node& self) {
    if (in(self, 0).requires_grad) in(self, 0).grad_buffer().add_scaled_(self.grad, s);
  });
}

Var relu(const Var& x) {
  return unary_elementwise(
      x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(const Var& x) {
  return unary_elementwise(
      x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var softplus(const Var& x) {
  return unary_elementwise(
      x, [](double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); },
      [](double v, double) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      });
}

Var sum(const Var& x) {
  return make_op_result(Tensor::scalar(x.value().sum()), {x}, [](Node& self) {
    Node& a = in(self, 0);
    if (!a.requires_grad) return;
    const double g = self.grad[0];
    for (double& v : a.grad_buffer().data()) v += g;
  });
}

Var mean(const Var& x) {
  require(x.value().size() > 0, "mean of empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.value().size()));
}

Var weighted_sum(std::span<const Var> scalars, std::span<const double> weights) {
  require(scalars.size() == weights.size(), "weighted_sum: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    require(scalars[i].value().size() == 1, "weighted_sum: operands must be scalars");
    total += weights[i] * scalars[i].value()[0];
  }
  std::vector<double> w(weights.begin(), weights.end());
  return make_op_result(Tensor::scalar(total), std::vector<Var>(scalars.begin(), scalars.end()),
                        [w = std::move(w)](Node& self) {
                          for (std::size_t i = 0; i < w.size(); ++i) {
                            if (in(self, i).requires_grad) in(self, i).grad_buffer()[0] += w[i] * self.grad[0];
                          }
                        });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return make_op_result(std::move(out), {x}, [](Node& self) {
    Node& a = in(self, 0);
    if (!a.requires_grad) return;
    auto g = a.grad_buffer().data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Var concat(std::span<const Var> parts) {
  require(!parts.empty(), "concat: no inputs");
  const Shape& s0 = parts[0].shape();
  require(s0.size() >= 2, "concat: rank must be >= 2");
  int total = 0;
  for (const Var& p : parts) {
    const Shape& s = p.shape();
    require(s.size() == s0.size() && s[0] == s0[0] && std::equal(s.begin() + 2, s.end(), s0.begin() + 2),
            "concat: incompatible shapes " + shape_string(s0) + " and " + shape_string(s));
    total += s[1];
  }
  Shape out_shape = s0;
  out_shape[1] = total;
  Tensor out(out_shape);
  const AxisLayout l = axis1_layout(out_shape);
  std::vector<int> offsets;
  int off = 0;
  for (const Var& p : parts) {
    offsets.push_back(off);
    const int c = p.shape()[1];
    for (std::size_t o = 0; o < l.outer; ++o) {
      std::copy_n(p.value().ptr() + o * c * l.inner, c * l.inner,
                  out.ptr() + (o * total + static_cast<std::size_t>(off)) * l.inner);
    }
    off += c;
  }
  return make_op_result(std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                        [offsets, total, l](Node& self) {
                          for (std::size_t i = 0; i < self.inputs.size(); ++i) {
                            Node& p = in(self, i);
                            if (!p.requires_grad) continue;
                            const int c = p.value.shape()[1];
                            double* g = p.grad_buffer().ptr();
                            for (std::size_t o = 0; o < l.outer; ++o) {
                              const double* src = self.grad.ptr() + (o * total + offsets[i]) * l.inner;
                              double* dst = g + o * c * l.inner;
                              for (std::size_t j = 0; j < c * l.inner; ++j) dst[j] += src[j];
                            }
                          }
                        });
}

Var slice(const Var& x, int begin, int count) {
  const Shape& s = x.shape();
  require(s.size() >= 2, "slice: rank must be >= 2");
  require(begin >= 0 && count >= 1 && begin + count <= s[1], "slice: range out of bounds for " + shape_string(s));
  Shape out_shape = s;
  out_shape[1] = count;
  Tensor out(out_shape);
  const AxisLayout l = axis1_layout(s);
  const int total = s[1];
  for (std::size_t o = 0; o < l.outer; ++o) {
    std::copy_n(x.value().ptr() + (o * total + begin) * l.inner, count * l.inner, out.ptr() + o * count * l.inner);
  }
  return make_op_result(std::move(out), {x}, [l, total, begin, count](Node& self) {
    Node& a = in(self, 0);
    if (!a.requires_grad) return;
    double* g = a.grad_buffer().ptr();
    for (std::size_t o = 0; o < l.outer; ++o) {
      const double* src = self.grad.ptr() + o * count * l.inner;
      double* dst = g + (o * total + begin) * l.inner;
      for (std::size_t j = 0; j < count * l.inner; ++j) dst[j] += src[j];
    }
  });
}

// ---------------------------------------------------------------------------

Var linear(const Var& x, const Var& weight, const Var& bias) {
  require_rank(x, 2, "linear");
  require_rank(weight, 2, "linear weight");
  const int N = x.dim(0), I = x.dim(1), O = weight.dim(0);
  require(weight.dim(1) == I, "linear: weight " + shape_string(weight.shape()) + " incompatible with input " +
                                  shape_string(x.shape()));
  const bool has_bias = static_cast<bool>(bias);
  if (has_bias) require(bias.value().size() == static_cast<std::size_t>(O), "linear: bias size mismatch");

  Tensor out({N, O});
  MapMat Y(out.ptr(), N, O);
  Y.noalias() = CMapMat(x.value().ptr(), N, I) * CMapMat(weight.value().ptr(), O, I).transpose();
  if (has_bias) {
    for (int n = 0; n < N; ++n)
      for (int o = 0; o < O; ++o) Y(n, o) += bias.value()[static_cast<std::size_t>(o)];
  }
  std::vector<Var> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return make_op_result(std::move(out), std::move(inputs), [N, I, O, has_bias](Node& self) {
    CMapMat G(self.grad.ptr(), N, O);
    Node& xn = in(self, 0);
    Node& wn = in(self, 1);
    if (xn.requires_grad) MapMat(xn.grad_buffer().ptr(), N, I).noalias() += G * CMapMat(wn.value.ptr(), O, I);
    if (wn.requires_grad)
      MapMat(wn.grad_buffer().ptr(), O, I).noalias() += G.transpose() * CMapMat(xn.value.ptr(), N, I);
    if (has_bias && in(self, 2).requires_grad) {
      auto& gb = in(self, 2).grad_buffer();
      for (int o = 0; o < O; ++o) gb[static_cast<std::size_t>(o)] += G.col(o).sum();
    }
  });
}

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int padding) {
  require_rank(x, 4, "conv2d");
  require_rank(weight, 4, "conv2d weight");
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int O = weight.dim(0), k = weight.dim(2);
  require(weight.dim(1) == C && weight.dim(3) == k,
          "conv2d: weight " + shape_string(weight.shape()) + " incompatible with input " + shape_string(x.shape()));
  require(stride >= 1 && padding >= 0, "conv2d: invalid stride/padding");
  const int OH = (H + 2 * padding - k) / stride + 1;
  const int OW = (W + 2 * padding - k) / stride + 1;
  require(OH >= 1 && OW >= 1, "conv2d: input smaller than kernel");
  const bool has_bias = static_cast<bool>(bias);
  if (has_bias) require(bias.value().size() == static_cast<std::size_t>(O), "conv2d: bias size mismatch");

  const bool pointwise = (k == 1 && stride == 1 && padding == 0);
  const int CK = C * k * k;
  const int P = OH * OW;
  Tensor out({N, O, OH, OW});
  CMapMat Wm(weight.value().ptr(), O, CK);
  std::vector<double> cols(pointwise ? 0 : static_cast<std::size_t>(CK) * P);
  for (int n = 0; n < N; ++n) {
    const double* xn = x.value().ptr() + static_cast<std::size_t>(n) * C * H * W;
    MapMat Yn(out.ptr() + static_cast<std::size_t>(n) * O * P, O, P);
    if (pointwise) {
      Yn.noalias() = Wm * CMapMat(xn, C, P);
    } else {
      im2col(xn, C, H, W, k, stride, padding, OH, OW, cols.data());
      Yn.noalias() = Wm * CMapMat(cols.data(), CK, P);
    }
    if (has_bias) Yn.colwise() += Eigen::Map<const Eigen::VectorXd>(bias.value().ptr(), O);
  }

  std::vector<Var> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return make_op_result(std::move(out), std::move(inputs),
                        [=](Node& self) {
                          Node& xnode = in(self, 0);
                          Node& wnode = in(self, 1);
                          CMapMat Wv(wnode.value.ptr(), O, CK);
                          std::vector<double> col_buf(pointwise ? 0 : static_cast<std::size_t>(CK) * P);
                          std::vector<double> dcol(pointwise ? 0 : static_cast<std::size_t>(CK) * P);
                          for (int n = 0; n < N; ++n) {
                            CMapMat Gn(self.grad.ptr() + static_cast<std::size_t>(n) * O * P, O, P);
                            const double* xn = xnode.value.ptr() + static_cast<std::size_t>(n) * C * H * W;
                            if (wnode.requires_grad) {
                              MapMat dW(wnode.grad_buffer().ptr(), O, CK);
                              if (pointwise) {
                                dW.noalias() += Gn * CMapMat(xn, C, P).transpose();
                              } else {
                                im2col(xn, C, H, W, k, stride, padding, OH, OW, col_buf.data());
                                dW.noalias() += Gn * CMapMat(col_buf.data(), CK, P).transpose();
                              }
                            }
                            if (xnode.requires_grad) {
                              double* dx = xnode.grad_buffer().ptr() + static_cast<std::size_t>(n) * C * H * W;
                              if (pointwise) {
                                MapMat(dx, C, P).noalias() += Wv.transpose() * Gn;
                              } else {
                                MapMat(dcol.data(), CK, P).noalias() = Wv.transpose() * Gn;
                                col2im(dcol.data(), C, H, W, k, stride, padding, OH, OW, dx);
                              }
                            }
                            if (has_bias && in(self, 2).requires_grad) {
                              Eigen::Map<Eigen::VectorXd>(in(self, 2).grad_buffer().ptr(), O) += Gn.rowwise().sum();
                            }
                          }
                        });
}

Var batch_norm(const Var& x, const Var& gamma, const Var& beta, BatchNormState& state, bool training) {
  require_rank(x, 4, "batch_norm");
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t HW = static_cast<std::size_t>(H) * W;
  require(gamma.value().size() == static_cast<std::size_t>(C) && beta.value().size() == static_cast<std::size_t>(C),
          "batch_norm: affine parameter size mismatch");
  require(state.running_mean.size() == static_cast<std::size_t>(C) &&
              state.running_var.size() == static_cast<std::size_t>(C),
          "batch_norm: running statistics size mismatch");
  const double m = static_cast<double>(N) * HW;
  const double eps = state.eps;

  std::vector<double> mu(C), inv_std(C);
  const Tensor& xv = x.value();
  if (training) {
    for (int c = 0; c < C; ++c) {
      double s = 0.0;
      for (int n = 0; n < N; ++n) {
        const double* p = xv.ptr() + (static_cast<std::size_t>(n) * C + c) * HW;
        for (std::size_t i = 0; i < HW; ++i) s += p[i];
      }
      const double mean_c = s / m;
      double v = 0.0;
      for (int n = 0; n < N; ++n) {
        const double* p = xv.ptr() + (static_cast<std::size_t>(n) * C + c) * HW;
        for (std::size_t i = 0; i < HW; ++i) v += (p[i] - mean_c) * (p[i] - mean_c);
      }
      const double var_c = v / m;
      mu[c] = mean_c;
      inv_std[c] = 1.0 / std::sqrt(var_c + eps);
      const double unbiased = m > 1 ? v / (m - 1) : var_c;
      state.running_mean[c] = (1 - state.momentum) * state.running_mean[c] + state.momentum * mean_c;
      state.running_var[c] = (1 - state.momentum) * state.running_var[c] + state.momentum * unbiased;
    }
  } else {
    for (int c = 0; c < C; ++c) {
      mu[c] = state.running_mean[c];
      inv_std[c] = 1.0 / std::sqrt(state.running_var[c] + eps);
    }
  }

  Tensor out(x.shape());
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const std::size_t base = (static_cast<std::size_t>(n) * C + c) * HW;
      const double g = gamma.value()[c] * inv_std[c];
      const double b = beta.value()[c] - g * mu[c];
      for (std::size_t i = 0; i < HW; ++i) out[base + i] = g * xv[base + i] + b;
    }
  }

  return make_op_result(std::move(out), {x, gamma, beta}, [=](Node& self) {
    Node& xn = in(self, 0);
    Node& gn = in(self, 1);
    Node& bn = in(self, 2);
    const Tensor& G = self.grad;
    for (int c = 0; c < C; ++c) {
      double sum_g = 0.0, sum_gx = 0.0;
      for (int n = 0; n < N; ++n) {
        const std::size_t base = (static_cast<std::size_t>(n) * C + c) * HW;
        for (std::size_t i = 0; i < HW; ++i) {
          const double xhat = (xn.value[base + i] - mu[c]) * inv_std[c];
          sum_g += G[base + i];
          sum_gx += G[base + i] * xhat;
        }
      }
      if (gn.requires_grad) gn.grad_buffer()[c] += sum_gx;
      if (bn.requires_grad) bn.grad_buffer()[c] += sum_g;
      if (!xn.requires_grad) continue;
      const double gam = gn.value[c];
      auto& dx = xn.grad_buffer();
      for (int n = 0; n < N; ++n) {
        const std::size_t base = (static_cast<std::size_t>(n) * C + c) * HW;
        for (std::size_t i = 0; i < HW; ++i) {
          if (training) {
            const double xhat = (xn.value[base + i] - mu[c]) * inv_std[c];
            dx[base + i] += gam * inv_std[c] / m * (m * G[base + i] - sum_g - xhat * sum_gx);
          } else {
            dx[base + i] += gam * inv_std[c] * G[base + i];
          }
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------

Var bilinear_resize(const Var& x, int out_h, int out_w) {
  require_rank(x, 4, "bilinear_resize");
  require(out_h >= 1 && out_w >= 1, "bilinear_resize: output size must be positive");
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const auto ty = resize_taps(H, out_h);
  const auto tx = resize_taps(W, out_w);
  Tensor out({N, C, out_h, out_w});
  const Tensor& xv = x.value();
  for (int nc = 0; nc < N * C; ++nc) {
    const double* src = xv.ptr() + static_cast<std::size_t>(nc) * H * W;
    double* dst = out.ptr() + static_cast<std::size_t>(nc) * out_h * out_w;
    for (int oy = 0; oy < out_h; ++oy) {
      const ResizeTap& a = ty[oy];
      for (int ox = 0; ox < out_w; ++ox) {
        const ResizeTap& b = tx[ox];
        dst[oy * out_w + ox] = a.w0 * (b.w0 * src[a.i0 * W + b.i0] + b.w1 * src[a.i0 * W + b.i1]) +
                               a.w1 * (b.w0 * src[a.i1 * W + b.i0] + b.w1 * src[a.i1 * W + b.i1]);
      }
    }
  }
  return make_op_result(std::move(out), {x}, [=](Node& self) {
    Node& xn = in(self, 0);
    if (!xn.requires_grad) return;
    auto& g = xn.grad_buffer();
    for (int nc = 0; nc < N * C; ++nc) {
      double* dsrc = g.ptr() + static_cast<std::size_t>(nc) * H * W;
      const double* go = self.grad.ptr() + static_cast<std::size_t>(nc) * out_h * out_w;
      for (int oy = 0; oy < out_h; ++oy) {
        const ResizeTap& a = ty[oy];
        for (int ox = 0; ox < out_w; ++ox) {
          const ResizeTap& b = tx[ox];
          const double v = go[oy * out_w + ox];
          dsrc[a.i0 * W + b.i0] += a.w0 * b.w0 * v;
          dsrc[a.i0 * W + b.i1] += a.w0 * b.w1 * v;
          dsrc[a.i1 * W + b.i0] += a.w1 * b.w0 * v;
          dsrc[a.i1 * W + b.i1] += a.w1 * b.w1 * v;
        }
      }
    }
  });
}

Var warp(const Var& x, const Var& flow) {
  require_rank(x, 4, "warp");
  require_rank(flow, 4, "warp flow");
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  require(flow.dim(0) == N && flow.dim(1) == 2 && flow.dim(2) == H && flow.dim(3) == W,
          "warp: flow " + shape_string(flow.shape()) + " does not match input " + shape_string(x.shape()));
  const std::size_t HW = static_cast<std::size_t>(H) * W;
  Tensor out(x.shape());
  const Tensor& xv = x.value();
  const Tensor& fv = flow.value();

  auto sample = [&](const double* plane, int yy, int xx) {
    return (yy >= 0 && yy < H && xx >= 0 && xx < W) ? plane[yy * W + xx] : 0.0;
  };

  for (int n = 0; n < N; ++n) {
    const double* fx = fv.ptr() + static_cast<std::size_t>(n) * 2 * HW;
    const double* fy = fx + HW;
    for (int h = 0; h < H; ++h) {
      for (int w = 0; w < W; ++w) {
        const std::size_t p = static_cast<std::size_t>(h) * W + w;
        const WarpTap t = warp_tap(w + fx[p], h + fy[p]);
        for (int c = 0; c < C; ++c) {
          const double* plane = xv.ptr() + (static_cast<std::size_t>(n) * C + c) * HW;
          const double v00 = sample(plane, t.y0, t.x0), v01 = sample(plane, t.y0, t.x0 + 1);
          const double v10 = sample(plane, t.y0 + 1, t.x0), v11 = sample(plane, t.y0 + 1, t.x0 + 1);
          out[(static_cast<std::size_t>(n) * C + c) * HW + p] =
              (1 - t.fy) * ((1 - t.fx) * v00 + t.fx * v01) + t.fy * ((1 - t.fx) * v10 + t.fx * v11);
        }
      }
    }
  }

  return make_op_result(std::move(out), {x, flow}, [N, C, H, W, HW](Node& self) {
    Node& xn = in(self, 0);
    Node& fn = in(self, 1);
    const double* fxp = fn.value.ptr();
    double* gx = xn.requires_grad ? xn.grad_buffer().ptr() : nullptr;
    double* gf = fn.requires_grad ? fn.grad_buffer().ptr() : nullptr;
    auto inb = [&](int yy, int xx) { return yy >= 0 && yy < H && xx >= 0 && xx < W; };
    auto sample = [&](const double* plane, int yy, int xx) { return inb(yy, xx) ? plane[yy * W + xx] : 0.0; };
    for (int n = 0; n < N; ++n) {
      const double* fx = fxp + static_cast<std::size_t>(n) * 2 * HW;
      const double* fy = fx + HW;
      for (int h = 0; h < H; ++h) {
        for (int w = 0; w < W; ++w) {
          const std::size_t p = static_cast<std::size_t>(h) * W + w;
          const WarpTap t = warp_tap(w + fx[p], h + fy[p]);
          double dfx = 0.0, dfy = 0.0;
          for (int c = 0; c < C; ++c) {
            const std::size_t plane_off = (static_cast<std::size_t>(n) * C + c) * HW;
            const double go = self.grad[plane_off + p];
            if (go == 0.0) continue;
            const double* plane = xn.value.ptr() + plane_off;
            const double v00 = sample(plane, t.y0, t.x0), v01 = sample(plane, t.y0, t.x0 + 1);
            const double v10 = sample(plane, t.y0 + 1, t.x0), v11 = sample(plane, t.y0 + 1, t.x0 + 1);
            if (gf) {
              dfx += go * ((1 - t.fy) * (v01 - v00) + t.fy * (v11 - v10));
              dfy += go * ((1 - t.fx) * (v10 - v00) + t.fx * (v11 - v01));
            }
            if (gx) {
              double* gp = gx + plane_off;
              if (inb(t.y0, t.x0)) gp[t.y0 * W + t.x0] += go * (1 - t.fy) * (1 - t.fx);
              if (inb(t.y0, t.x0 + 1)) gp[t.y0 * W + t.x0 + 1] += go * (1 - t.fy) * t.fx;
              if (inb(t.y0 + 1, t.x0)) gp[(t.y0 + 1) * W + t.x0] += go * t.fy * (1 - t.fx);
              if (inb(t.y0 + 1, t.x0 + 1)) gp[(t.y0 + 1) * W + t.x0 + 1] += go * t.fy * t.fx;
            }
          }
          if (gf) {
            gf[static_cast<std::size_t>(n) * 2 * HW + p] += dfx;
            gf[static_cast<std::size_t>(n) * 2 * HW + HW + p] += dfy;
          }
        }
      }
    }
  });
}

Var roi_align(const Var& feature_map, std::span<const RoiBox> rois, int out_h, int out_w, double stride) {
  require_rank(feature_map, 4, "roi_align");
  require(out_h >= 1 && out_w >= 1 && stride > 0, "roi_align: invalid output size or stride");
  const int B = feature_map.dim(0), C = feature_map.dim(1), H = feature_map.dim(2), W = feature_map.dim(3);
  const std::size_t HW = static_cast<std::size_t>(H) * W;
  const int R = static_cast<int>(rois.size());

  // Precompute taps per (roi, cell); shared by forward and backward.
  std::vector<RoiTap> taps(static_cast<std::size_t>(R) * out_h * out_w);
  std::vector<int> batch(static_cast<std::size_t>(R));
  for (int r = 0; r < R; ++r) {
    const RoiBox& b = rois[static_cast<std::size_t>(r)];
    require(b.batch_index >= 0 && b.batch_index < B, "roi_align: batch index out of range");
    const double x1 = b.x1 / stride - 0.5, y1 = b.y1 / stride - 0.5;
    const double rw = (b.x2 - b.x1) / stride, rh = (b.y2 - b.y1) / stride;
    require(rw > 0 && rh > 0 && std::isfinite(rw) && std::isfinite(rh),
            "roi_align: degenerate box (" + std::to_string(b.x1) + ", " + std::to_string(b.y1) + ", " +
                std::to_string(b.x2) + ", " + std::to_string(b.y2) + ")");
    batch[static_cast<std::size_t>(r)] = b.batch_index;
    const double bin_h = rh / out_h, bin_w = rw / out_w;
    for (int oy = 0; oy < out_h; ++oy)
      for (int ox = 0; ox < out_w; ++ox)
        taps[(static_cast<std::size_t>(r) * out_h + oy) * out_w + ox] =
            roi_tap(y1 + (oy + 0.5) * bin_h, x1 + (ox + 0.5) * bin_w, H, W);
  }

  Tensor out({R, C, out_h, out_w});
  const std::size_t OP = static_cast<std::size_t>(out_h) * out_w;
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) {
      const double* plane = feature_map.value().ptr() + (static_cast<std::size_t>(batch[r]) * C + c) * HW;
      double* dst = out.ptr() + (static_cast<std::size_t>(r) * C + c) * OP;
      for (std::size_t q = 0; q < OP; ++q) {
        const RoiTap& t = taps[r * OP + q];
        dst[q] = t.valid ? t.w00 * plane[t.y0 * W + t.x0] + t.w01 * plane[t.y0 * W + t.x1] +
                               t.w10 * plane[t.y1 * W + t.x0] + t.w11 * plane[t.y1 * W + t.x1]
                         : 0.0;
      }
    }
  }

  return make_op_result(std::move(out), {feature_map}, [=, taps = std::move(taps)](Node& self) {
    Node& fm = in(self, 0);
    if (!fm.requires_grad) return;
    auto& g = fm.grad_buffer();
    for (int r = 0; r < R; ++r) {
      for (int c = 0; c < C; ++c) {
        double* plane = g.ptr() + (static_cast<std::size_t>(batch[r]) * C + c) * HW;
        const double* go = self.grad.ptr() + (static_cast<std::size_t>(r) * C + c) * OP;
        for (std::size_t q = 0; q < OP; ++q) {
          const RoiTap& t = taps[r * OP + q];
          if (!t.valid) continue;
          plane[t.y0 * W + t.x0] += t.w00 * go[q];
          plane[t.y0 * W + t.x1] += t.w01 * go[q];
          plane[t.y1 * W + t.x0] += t.w10 * go[q];
          plane[t.y1 * W + t.x1] += t.w11 * go[q];
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------

Var channel_max(const Var& x) {
  require_rank(x, 4, "channel_max");
  const int N = x.dim(0), K = x.dim(1);
  const std::size_t HW = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  Tensor out({N, 1, x.dim(2), x.dim(3)});
  std::vector<int> arg(static_cast<std::size_t>(N) * HW, 0);
  for (int n = 0; n < N; ++n) {
    for (std::size_t p = 0; p < HW; ++p) {
      int best = 0;
      double bv = x.value()[(static_cast<std::size_t>(n) * K) * HW + p];
      for (int k = 1; k < K; ++k) {
        const double v = x.value()[(static_cast<std::size_t>(n) * K + k) * HW + p];
        if (v > bv) {
          bv = v;
          best = k;
        }
      }
      out[static_cast<std::size_t>(n) * HW + p] = bv;
      arg[static_cast<std::size_t>(n) * HW + p] = best;
    }
  }
  return make_op_result(std::move(out), {x}, [=, arg = std::move(arg)](Node& self) {
    Node& xn = in(self, 0);
    if (!xn.requires_grad) return;
    auto& g = xn.grad_buffer();
    for (int n = 0; n < N; ++n)
      for (std::size_t p = 0; p < HW; ++p) {
        const std::size_t i = static_cast<std::size_t>(n) * HW + p;
        g[(static_cast<std::size_t>(n) * K + arg[i]) * HW + p] += self.grad[i];
      }
  });
}

Var weighted_pool(const Var& features, const Var& mask, double eps) {
  require_rank(features, 4, "weighted_pool");
  require_rank(mask, 4, "weighted_pool mask");
  const int N = features.dim(0), C = features.dim(1);
  const std::size_t HW = static_cast<std::size_t>(features.dim(2)) * features.dim(3);
  require(mask.dim(0) == N && mask.dim(1) == 1 && mask.dim(2) == features.dim(2) && mask.dim(3) == features.dim(3),
          "weighted_pool: mask " + shape_string(mask.shape()) + " incompatible with features " +
              shape_string(features.shape()));
  Tensor out({N, C});
  std::vector<double> denom(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) {
    const double* m = mask.value().ptr() + static_cast<std::size_t>(n) * HW;
    double s = eps;
    for (std::size_t p = 0; p < HW; ++p) s += m[p];
    denom[n] = s;
    for (int c = 0; c < C; ++c) {
      const double* f = features.value().ptr() + (static_cast<std::size_t>(n) * C + c) * HW;
      double acc = 0.0;
      for (std::size_t p = 0; p < HW; ++p) acc += f[p] * m[p];
      out[static_cast<std::size_t>(n) * C + c] = acc / s;
    }
  }
  return make_op_result(std::move(out), {features, mask}, [=, denom = std::move(denom)](Node& self) {
    Node& fn = in(self, 0);
    Node& mn = in(self, 1);
    for (int n = 0; n < N; ++n) {
      const double* m = mn.value.ptr() + static_cast<std::size_t>(n) * HW;
      const double s = denom[n];
      for (int c = 0; c < C; ++c) {
        const double go = self.grad[static_cast<std::size_t>(n) * C + c];
        const double* f = fn.value.ptr() + (static_cast<std::size_t>(n) * C + c) * HW;
        if (fn.requires_grad) {
          double* gf = fn.grad_buffer().ptr() + (static_cast<std::size_t>(n) * C + c) * HW;
          for (std::size_t p = 0; p < HW; ++p) gf[p] += go * m[p] / s;
        }
        if (mn.requires_grad) {
          const double o = self.value[static_cast<std::size_t>(n) * C + c];
          double* gm = mn.grad_buffer().ptr() + static_cast<std::size_t>(n) * HW;
          for (std::size_t p = 0; p < HW; ++p) gm[p] += go * (f[p] - o) / s;
        }
      }
    }
  });
}

Var spatial_attention(const Var& q, const Var& k, const Var& v) {
  require_rank(q, 3, "spatial_attention q");
  require_rank(k, 3, "spatial_attention k");
  require_rank(v, 3, "spatial_attention v");
  const int N = q.dim(0), d = q.dim(1), P = q.dim(2), dv = v.dim(1);
  require(k.shape() == q.shape() && v.dim(0) == N && v.dim(2) == P, "spatial_attention: shape mismatch");
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  Tensor out({N, dv, P});
  Tensor attn({N, P, P});
  for (int n = 0; n < N; ++n) {
    CMapMat Q(q.value().ptr() + static_cast<std::size_t>(n) * d * P, d, P);
    CMapMat K(k.value().ptr() + static_cast<std::size_t>(n) * d * P, d, P);
    CMapMat V(v.value().ptr() + static_cast<std::size_t>(n) * dv * P, dv, P);
    MapMat A(attn.ptr() + static_cast<std::size_t>(n) * P * P, P, P);
    A.noalias() = (Q.transpose() * K) * inv_sqrt_d;
    for (int i = 0; i < P; ++i) {
      const double mx = A.row(i).maxCoeff();
      A.row(i) = (A.row(i).array() - mx).exp();
      A.row(i) /= A.row(i).sum();
    }
    MapMat(out.ptr() + static_cast<std::size_t>(n) * dv * P, dv, P).noalias() = V * A.transpose();
  }

  return make_op_result(std::move(out), {q, k, v}, [=, attn = std::move(attn)](Node& self) {
    Node& qn = in(self, 0);
    Node& kn = in(self, 1);
    Node& vn = in(self, 2);
    RowMat dA(P, P), dL(P, P);
    for (int n = 0; n < N; ++n) {
      CMapMat A(attn.ptr() + static_cast<std::size_t>(n) * P * P, P, P);
      CMapMat G(self.grad.ptr() + static_cast<std::size_t>(n) * dv * P, dv, P);
      CMapMat V(vn.value.ptr() + static_cast<std::size_t>(n) * dv * P, dv, P);
      if (vn.requires_grad)
        MapMat(vn.grad_buffer().ptr() + static_cast<std::size_t>(n) * dv * P, dv, P).noalias() += G * A;
      if (!qn.requires_grad && !kn.requires_grad) continue;
      dA.noalias() = G.transpose() * V;
      for (int i = 0; i < P; ++i) {
        const double dot = A.row(i).dot(dA.row(i));
        dL.row(i) = A.row(i).array() * (dA.row(i).array() - dot);
      }
      dL *= inv_sqrt_d;
      CMapMat Q(qn.value.ptr() + static_cast<std::size_t>(n) * d * P, d, P);
      CMapMat K(kn.value.ptr() + static_cast<std::size_t>(n) * d * P, d, P);
      if (qn.requires_grad)
        MapMat(qn.grad_buffer().ptr() + static_cast<std::size_t>(n) * d * P, d, P).noalias() += K * dL.transpose();
      if (kn.requires_grad)
        MapMat(kn.grad_buffer().ptr() + static_cast<std::size_t>(n) * d * P, d, P).noalias() += Q * dL;
    }
  });
}

}  // namespace finetrack::ad
