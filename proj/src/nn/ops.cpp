#include "lact/nn/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "lact/fft.hpp"

namespace lact::nn {

namespace {

using detail::Node;

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(op) + ": shapes " + a.shape().str() + " and " +
                                b.shape().str() + " differ");
}

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same(a, b, "add");
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      Node& p = parent(self, k);
      if (!p.requires_grad) continue;
      auto& g = p.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same(a, b, "sub");
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      Node& p = parent(self, k);
      if (!p.requires_grad) continue;
      const double sign = k == 0 ? 1.0 : -1.0;
      auto& g = p.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign * self.grad[i];
    }
  });
}

Tensor scale(const Tensor& a, double k) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= k;
  return Tensor::make_result(a.shape(), std::move(out), {a}, [k](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += k * self.grad[i];
  });
}

Tensor mul_scalar(const Tensor& a, const Tensor& s) {
  if (s.size() != 1) throw std::invalid_argument("mul_scalar: second operand must be scalar");
  const double k = s.item();
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= k;
  return Tensor::make_result(a.shape(), std::move(out), {a, s}, [k](Node& self) {
    Node& pa = parent(self, 0);
    Node& ps = parent(self, 1);
    if (pa.requires_grad) {
      auto& g = pa.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += k * self.grad[i];
    }
    if (ps.requires_grad) {
      double acc = 0.0;
      for (std::size_t i = 0; i < self.grad.size(); ++i) acc += self.grad[i] * pa.value[i];
      ps.ensure_grad()[0] += acc;
    }
  });
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (auto& v : out) v = v > 0.0 ? v : 0.0;
  return Tensor::make_result(x.shape(), std::move(out), {x}, [](Node& self) {
    Node& p = parent(self, 0);
    auto& g = p.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (p.value[i] > 0.0) g[i] += self.grad[i];
  });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  return Tensor::make_result(Shape{}, {acc}, {x}, [](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor dot(const Tensor& a, const Tensor& b) {
  require_same(a, b, "dot");
  double acc = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  return Tensor::make_result(Shape{}, {acc}, {a, b}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    const double g = self.grad[0];
    if (pa.requires_grad) {
      auto& ga = pa.ensure_grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * pb.value[i];
    }
    if (pb.requires_grad) {
      auto& gb = pb.ensure_grad();
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g * pa.value[i];
    }
  });
}

Tensor sum_squares(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v * v;
  return Tensor::make_result(Shape{}, {acc}, {x}, [](Node& self) {
    Node& p = parent(self, 0);
    auto& g = p.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * p.value[i] * self.grad[0];
  });
}

namespace {

constexpr std::size_t kColBudget = std::size_t{1} << 21;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
// Fixed-alignment staging for Eigen operands; results stay bit-reproducible.
using Scratch = std::vector<double, Eigen::aligned_allocator<double>>;

struct ConvDims {
  std::size_t b, h, w, cin, k, cout, r;
  std::size_t patch() const { return k * k * cin; }
  std::size_t rows_per_chunk() const {
    return std::max<std::size_t>(1, kColBudget / std::max<std::size_t>(1, w * patch()));
  }
};

auto idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

// Patch-major columns for output rows [i0, i1): col(q, (di*k + dj)*cin + c)
// = x(i+di-r, j+dj-r, c), q = (i-i0)*w + j; zero outside the image.
void im2col(const double* x, const ConvDims& d, std::size_t i0, std::size_t i1, double* col) {
  const std::size_t kk = d.patch();
  for (std::size_t i = i0; i < i1; ++i) {
    for (std::size_t j = 0; j < d.w; ++j) {
      double* row = col + ((i - i0) * d.w + j) * kk;
      for (std::size_t di = 0; di < d.k; ++di) {
        const auto si = static_cast<std::ptrdiff_t>(i + di) - static_cast<std::ptrdiff_t>(d.r);
        double* dst = row + di * d.k * d.cin;
        if (si < 0 || si >= static_cast<std::ptrdiff_t>(d.h)) {
          std::fill(dst, dst + d.k * d.cin, 0.0);
          continue;
        }
        for (std::size_t dj = 0; dj < d.k; ++dj, dst += d.cin) {
          const auto sj = static_cast<std::ptrdiff_t>(j + dj) - static_cast<std::ptrdiff_t>(d.r);
          if (sj < 0 || sj >= static_cast<std::ptrdiff_t>(d.w)) {
            std::fill(dst, dst + d.cin, 0.0);
          } else {
            const double* src =
                x + (static_cast<std::size_t>(si) * d.w + static_cast<std::size_t>(sj)) * d.cin;
            std::copy(src, src + d.cin, dst);
          }
        }
      }
    }
  }
}

void col2im(const double* col, const ConvDims& d, std::size_t i0, std::size_t i1, double* dx) {
  const std::size_t kk = d.patch();
  for (std::size_t i = i0; i < i1; ++i) {
    for (std::size_t j = 0; j < d.w; ++j) {
      const double* row = col + ((i - i0) * d.w + j) * kk;
      for (std::size_t di = 0; di < d.k; ++di) {
        const auto si = static_cast<std::ptrdiff_t>(i + di) - static_cast<std::ptrdiff_t>(d.r);
        if (si < 0 || si >= static_cast<std::ptrdiff_t>(d.h)) continue;
        const double* src = row + di * d.k * d.cin;
        for (std::size_t dj = 0; dj < d.k; ++dj, src += d.cin) {
          const auto sj = static_cast<std::ptrdiff_t>(j + dj) - static_cast<std::ptrdiff_t>(d.r);
          if (sj < 0 || sj >= static_cast<std::ptrdiff_t>(d.w)) continue;
          double* dst =
              dx + (static_cast<std::size_t>(si) * d.w + static_cast<std::size_t>(sj)) * d.cin;
          for (std::size_t c = 0; c < d.cin; ++c) dst[c] += src[c];
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& filters, const Tensor& bias) {
  const Shape xs = x.shape();
  const Shape fs = filters.shape();
  if (fs.n != fs.h || fs.n % 2 == 0)
    throw std::invalid_argument("conv2d: filters must be square with odd size, got " + fs.str());
  if (fs.w != xs.c)
    throw std::invalid_argument("conv2d: filters " + fs.str() + " do not match input " + xs.str());
  if (bias.size() != fs.c) throw std::invalid_argument("conv2d: bias size does not match filters");

  const ConvDims d{xs.n, xs.h, xs.w, xs.c, fs.n, fs.c, fs.n / 2};
  const std::size_t kk = d.patch();
  const std::size_t plane_in = d.h * d.w * d.cin;
  const std::size_t plane_out = d.h * d.w * d.cout;
  const std::size_t chunk = std::min(d.h, d.rows_per_chunk());

  std::vector<double> out(d.b * plane_out);
  Scratch col(chunk * d.w * kk);
  Scratch prod(chunk * d.w * d.cout);
  const Scratch f_copy(filters.values().begin(), filters.values().end());
  const ConstMatMap f(f_copy.data(), idx(kk), idx(d.cout));
  const auto xv = x.values();
  const auto bv = bias.values();
  for (std::size_t b = 0; b < d.b; ++b) {
    for (std::size_t i0 = 0; i0 < d.h; i0 += chunk) {
      const std::size_t i1 = std::min(d.h, i0 + chunk);
      const std::size_t p = (i1 - i0) * d.w;
      im2col(xv.data() + b * plane_in, d, i0, i1, col.data());
      MatMap(prod.data(), idx(p), idx(d.cout)).noalias() = ConstMatMap(col.data(), idx(p), idx(kk)) * f;
      double* dst = out.data() + b * plane_out + i0 * d.w * d.cout;
      for (std::size_t q = 0; q < p; ++q)
        for (std::size_t o = 0; o < d.cout; ++o) dst[q * d.cout + o] = prod[q * d.cout + o] + bv[o];
    }
  }

  return Tensor::make_result(Shape{d.b, d.h, d.w, d.cout}, std::move(out), {x, filters, bias},
                             [d, chunk](Node& self) {
    Node& px = parent(self, 0);
    Node& pf = parent(self, 1);
    Node& pb = parent(self, 2);
    const std::size_t kk = d.patch();
    const std::size_t plane_in = d.h * d.w * d.cin;
    const std::size_t plane_out = d.h * d.w * d.cout;
    if (pb.requires_grad) {
      auto& gb = pb.ensure_grad();
      for (std::size_t q = 0; q < d.b * d.h * d.w; ++q)
        for (std::size_t o = 0; o < d.cout; ++o) gb[o] += self.grad[q * d.cout + o];
    }
    if (!px.requires_grad && !pf.requires_grad) return;
    Scratch col(chunk * d.w * kk);
    Scratch g_copy(chunk * d.w * d.cout);
    Scratch gf(pf.requires_grad ? kk * d.cout : 0, 0.0);
    const Scratch f_copy(pf.value.begin(), pf.value.end());
    const ConstMatMap f(f_copy.data(), idx(kk), idx(d.cout));
    double* gx = px.requires_grad ? px.ensure_grad().data() : nullptr;
    for (std::size_t b = 0; b < d.b; ++b) {
      for (std::size_t i0 = 0; i0 < d.h; i0 += chunk) {
        const std::size_t i1 = std::min(d.h, i0 + chunk);
        const std::size_t p = (i1 - i0) * d.w;
        const double* g_src = self.grad.data() + b * plane_out + i0 * d.w * d.cout;
        std::copy(g_src, g_src + p * d.cout, g_copy.begin());
        const ConstMatMap g(g_copy.data(), idx(p), idx(d.cout));
        MatMap c(col.data(), idx(p), idx(kk));
        if (pf.requires_grad) {
          im2col(px.value.data() + b * plane_in, d, i0, i1, col.data());
          MatMap(gf.data(), idx(kk), idx(d.cout)).noalias() += c.transpose() * g;
        }
        if (gx) {
          c.noalias() = g * f.transpose();
          col2im(col.data(), d, i0, i1, gx + b * plane_in);
        }
      }
    }
    if (pf.requires_grad) {
      auto& dst = pf.ensure_grad();
      for (std::size_t i = 0; i < gf.size(); ++i) dst[i] += gf[i];
    }
  });
}

ConvParams make_conv(std::size_t k, std::size_t in, std::size_t out, Rng& rng,
                     const std::string& name) {
  if (k == 0 || k % 2 == 0 || in == 0 || out == 0)
    throw std::invalid_argument("make_conv: bad dimensions for " + name);
  const double fan_in = static_cast<double>(k * k * in);
  const double fan_out = static_cast<double>(k * k * out);
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  const Shape fs{k, k, in, out};
  std::vector<double> w(fs.size());
  for (auto& v : w) v = rng.uniform(-limit, limit);
  return {Tensor::parameter(fs, std::move(w), name + ".filters"),
          Tensor::parameter(Shape{1, 1, 1, out}, std::vector<double>(out, 0.0), name + ".bias")};
}

BnParams make_bn(std::size_t channels, const std::string& name) {
  BnParams p;
  p.scale = Tensor::parameter(Shape{1, 1, 1, channels}, std::vector<double>(channels, 1.0),
                              name + ".scale");
  p.offset = Tensor::parameter(Shape{1, 1, 1, channels}, std::vector<double>(channels, 0.0),
                               name + ".offset");
  p.running_mean.assign(channels, 0.0);
  p.running_var.assign(channels, 1.0);
  return p;
}

Tensor batchnorm(const Tensor& x, BnParams& p, bool training) {
  const Shape s = x.shape();
  const std::size_t ch = s.c;
  if (p.channels() != ch || p.scale.size() != ch || p.offset.size() != ch)
    throw std::invalid_argument("batchnorm: parameters do not match input " + s.str());
  const std::size_t count = s.n * s.h * s.w;
  const auto xv = x.values();

  std::vector<double> mean(ch, 0.0);
  std::vector<double> var(ch, 0.0);
  if (training) {
    for (std::size_t q = 0; q < count; ++q)
      for (std::size_t c = 0; c < ch; ++c) mean[c] += xv[q * ch + c];
    for (auto& m : mean) m /= static_cast<double>(count);
    for (std::size_t q = 0; q < count; ++q)
      for (std::size_t c = 0; c < ch; ++c) {
        const double dlt = xv[q * ch + c] - mean[c];
        var[c] += dlt * dlt;
      }
    for (auto& v : var) v /= static_cast<double>(count);
    for (std::size_t c = 0; c < ch; ++c) {
      p.running_mean[c] = p.momentum * p.running_mean[c] + (1.0 - p.momentum) * mean[c];
      p.running_var[c] = p.momentum * p.running_var[c] + (1.0 - p.momentum) * var[c];
    }
  } else {
    mean = p.running_mean;
    var = p.running_var;
  }

  std::vector<double> inv(ch);
  for (std::size_t c = 0; c < ch; ++c) inv[c] = 1.0 / std::sqrt(var[c] + p.eps);
  const auto tau = p.scale.values();
  const auto kappa = p.offset.values();
  std::vector<double> xhat(xv.size());
  std::vector<double> out(xv.size());
  for (std::size_t q = 0; q < count; ++q)
    for (std::size_t c = 0; c < ch; ++c) {
      const std::size_t i = q * ch + c;
      xhat[i] = (xv[i] - mean[c]) * inv[c];
      out[i] = tau[c] * xhat[i] + kappa[c];
    }

  return Tensor::make_result(s, std::move(out), {x, p.scale, p.offset},
                             [ch, count, training, inv = std::move(inv),
                              xhat = std::move(xhat)](Node& self) {
    Node& px = parent(self, 0);
    Node& pt = parent(self, 1);
    Node& pk = parent(self, 2);
    const auto& g = self.grad;
    std::vector<double> sum_g(ch, 0.0);
    std::vector<double> sum_gx(ch, 0.0);
    for (std::size_t q = 0; q < count; ++q)
      for (std::size_t c = 0; c < ch; ++c) {
        sum_g[c] += g[q * ch + c];
        sum_gx[c] += g[q * ch + c] * xhat[q * ch + c];
      }
    if (pk.requires_grad) {
      auto& gk = pk.ensure_grad();
      for (std::size_t c = 0; c < ch; ++c) gk[c] += sum_g[c];
    }
    if (pt.requires_grad) {
      auto& gt = pt.ensure_grad();
      for (std::size_t c = 0; c < ch; ++c) gt[c] += sum_gx[c];
    }
    if (!px.requires_grad) return;
    auto& gx = px.ensure_grad();
    const auto n = static_cast<double>(count);
    for (std::size_t q = 0; q < count; ++q)
      for (std::size_t c = 0; c < ch; ++c) {
        const std::size_t i = q * ch + c;
        const double t = pt.value[c] * inv[c];
        if (training)
          gx[i] += t * (g[i] - sum_g[c] / n - xhat[i] * sum_gx[c] / n);
        else
          gx[i] += t * g[i];
      }
  });
}

namespace {

void require_complex(const Tensor& x, const char* op) {
  if (x.shape().c != 2)
    throw std::invalid_argument(std::string(op) + ": expected 2 channels, got " + x.shape().str());
}

std::vector<double> dft_planes(std::span<const double> in, const Shape& s, fft::Direction dir) {
  std::vector<double> out(in.size());
  std::vector<std::complex<double>> buf(s.h * s.w);
  for (std::size_t b = 0; b < s.n; ++b) {
    const double* src = in.data() + b * s.h * s.w * 2;
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = {src[2 * i], src[2 * i + 1]};
    fft::unitary_2d(buf, s.h, s.w, dir);
    double* dst = out.data() + b * s.h * s.w * 2;
    for (std::size_t i = 0; i < buf.size(); ++i) {
      dst[2 * i] = buf[i].real();
      dst[2 * i + 1] = buf[i].imag();
    }
  }
  return out;
}

Tensor dft_op(const Tensor& x, fft::Direction dir) {
  const Shape s = x.shape();
  const fft::Direction back =
      dir == fft::Direction::forward ? fft::Direction::inverse : fft::Direction::forward;
  return Tensor::make_result(s, dft_planes(x.values(), s, dir), {x}, [s, back](Node& self) {
    const auto gin = dft_planes(self.grad, s, back);
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gin[i];
  });
}

}  // namespace

Tensor fft2(const Tensor& x) {
  require_complex(x, "fft2");
  return dft_op(x, fft::Direction::forward);
}

Tensor ifft2(const Tensor& x) {
  require_complex(x, "ifft2");
  return dft_op(x, fft::Direction::inverse);
}

Tensor to_complex(const Tensor& x) {
  const Shape s = x.shape();
  if (s.c != 1) throw std::invalid_argument("to_complex: expected 1 channel, got " + s.str());
  std::vector<double> out(2 * x.size(), 0.0);
  const auto xv = x.values();
  for (std::size_t i = 0; i < xv.size(); ++i) out[2 * i] = xv[i];
  return Tensor::make_result(Shape{s.n, s.h, s.w, 2}, std::move(out), {x}, [](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[2 * i];
  });
}

Tensor real_part(const Tensor& x) {
  require_complex(x, "real_part");
  const Shape s = x.shape();
  std::vector<double> out(x.size() / 2);
  const auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[2 * i];
  return Tensor::make_result(Shape{s.n, s.h, s.w, 1}, std::move(out), {x}, [](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[2 * i] += self.grad[i];
  });
}

Tensor channels_to_batch(const Tensor& x) {
  const Shape s = x.shape();
  const std::size_t plane = s.h * s.w;
  std::vector<double> out(x.size());
  const auto xv = x.values();
  for (std::size_t b = 0; b < s.n; ++b)
    for (std::size_t k = 0; k < s.c; ++k)
      for (std::size_t q = 0; q < plane; ++q)
        out[(b * s.c + k) * plane + q] = xv[(b * plane + q) * s.c + k];
  return Tensor::make_result(Shape{s.n * s.c, s.h, s.w, 1}, std::move(out), {x},
                             [s, plane](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t b = 0; b < s.n; ++b)
      for (std::size_t k = 0; k < s.c; ++k)
        for (std::size_t q = 0; q < plane; ++q)
          g[(b * plane + q) * s.c + k] += self.grad[(b * s.c + k) * plane + q];
  });
}

Tensor batch_to_channels(const Tensor& x, std::size_t channels) {
  const Shape s = x.shape();
  if (s.c != 1 || channels == 0 || s.n % channels != 0)
    throw std::invalid_argument("batch_to_channels: cannot split " + s.str() + " into " +
                                std::to_string(channels) + " channels");
  const Shape o{s.n / channels, s.h, s.w, channels};
  const std::size_t plane = s.h * s.w;
  std::vector<double> out(x.size());
  const auto xv = x.values();
  for (std::size_t b = 0; b < o.n; ++b)
    for (std::size_t k = 0; k < channels; ++k)
      for (std::size_t q = 0; q < plane; ++q)
        out[(b * plane + q) * channels + k] = xv[(b * channels + k) * plane + q];
  return Tensor::make_result(o, std::move(out), {x}, [o, plane](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t b = 0; b < o.n; ++b)
      for (std::size_t k = 0; k < o.c; ++k)
        for (std::size_t q = 0; q < plane; ++q)
          g[(b * o.c + k) * plane + q] += self.grad[(b * plane + q) * o.c + k];
  });
}

}  // namespace lact::nn
