#include "stegsan/nn/layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

#include "stegsan/error.hpp"

namespace stegsan::nn {
inline namespace STEGSAN_NN_NS {
namespace {

using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

// Sliding-window geometry of a convolution from (channels, height, width)
// images to (out_h, out_w) outputs.
struct Window {
  int channels, batch, height, width, kernel, stride, pad;
  int out_h() const { return (height + 2 * pad - kernel) / stride + 1; }
  int out_w() const { return (width + 2 * pad - kernel) / stride + 1; }
  int rows() const { return channels * kernel * kernel; }
  std::size_t cols() const { return static_cast<std::size_t>(batch) * out_h() * out_w(); }
};

// col[(c*k + ky)*k + kx][(n*Ho + oy)*Wo + ox] = x[c][n][oy*s - p + ky][ox*s - p + kx]
void im2col(const Real* x, const Window& g, std::vector<Real>& col) {
  const int ho = g.out_h(), wo = g.out_w();
  const std::size_t ncols = g.cols();
  col.assign(static_cast<std::size_t>(g.rows()) * ncols, Real(0));
  const std::size_t plane = static_cast<std::size_t>(g.height) * g.width;
  for (int c = 0; c < g.channels; ++c) {
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        Real* row = col.data() + static_cast<std::size_t>((c * g.kernel + ky) * g.kernel + kx) * ncols;
        for (int n = 0; n < g.batch; ++n) {
          const Real* src = x + (static_cast<std::size_t>(c) * g.batch + n) * plane;
          Real* dst = row + static_cast<std::size_t>(n) * ho * wo;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * g.stride - g.pad + ky;
            if (iy < 0 || iy >= g.height) continue;
            const Real* srow = src + static_cast<std::size_t>(iy) * g.width;
            Real* drow = dst + static_cast<std::size_t>(oy) * wo;
            if (g.stride == 1) {
              const int lo = std::max(0, g.pad - kx);
              const int hi = std::min(wo, g.width + g.pad - kx);
              for (int ox = lo; ox < hi; ++ox) drow[ox] = srow[ox - g.pad + kx];
            } else {
              for (int ox = 0; ox < wo; ++ox) {
                const int ix = ox * g.stride - g.pad + kx;
                if (ix >= 0 && ix < g.width) drow[ox] = srow[ix];
              }
            }
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add columns back into an image batch.
void col2im(const std::vector<Real>& col, const Window& g, Real* x) {
  const int ho = g.out_h(), wo = g.out_w();
  const std::size_t ncols = g.cols();
  const std::size_t plane = static_cast<std::size_t>(g.height) * g.width;
  std::fill(x, x + static_cast<std::size_t>(g.channels) * g.batch * plane, Real(0));
  for (int c = 0; c < g.channels; ++c) {
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        const Real* row =
            col.data() + static_cast<std::size_t>((c * g.kernel + ky) * g.kernel + kx) * ncols;
        for (int n = 0; n < g.batch; ++n) {
          Real* dst = x + (static_cast<std::size_t>(c) * g.batch + n) * plane;
          const Real* src = row + static_cast<std::size_t>(n) * ho * wo;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * g.stride - g.pad + ky;
            if (iy < 0 || iy >= g.height) continue;
            Real* drow = dst + static_cast<std::size_t>(iy) * g.width;
            const Real* srow = src + static_cast<std::size_t>(oy) * wo;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * g.stride - g.pad + kx;
              if (ix >= 0 && ix < g.width) drow[ix] += srow[ox];
            }
          }
        }
      }
    }
  }
}

void uniform_init(std::vector<Real>& v, Real bound, RngStream& rng) {
  for (auto& x : v) x = static_cast<Real>((2.0 * rng.uniform() - 1.0) * bound);
}

void add_channel_bias(Tensor& t, const std::vector<Real>& bias) {
  const std::size_t block = static_cast<std::size_t>(t.n) * t.plane();
  for (int c = 0; c < t.c; ++c) {
    Real* p = t.data.data() + c * block;
    const Real b = bias[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < block; ++i) p[i] += b;
  }
}

void accumulate_channel_sums(const Tensor& t, std::vector<Real>& sums) {
  const std::size_t block = static_cast<std::size_t>(t.n) * t.plane();
  for (int c = 0; c < t.c; ++c) {
    const Real* p = t.data.data() + c * block;
    Real s = 0;
    for (std::size_t i = 0; i < block; ++i) s += p[i];
    sums[static_cast<std::size_t>(c)] += s;
  }
}

void require_channels(const Tensor& x, int expected, const char* layer) {
  if (x.c != expected) {
    throw UsageError(std::string(layer) + ": expected " + std::to_string(expected) +
                     " input channels, got tensor " + x.shape_string());
  }
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding)
    : cin_(in_channels), cout_(out_channels), k_(kernel), stride_(stride), pad_(padding),
      weight_(static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel),
      bias_(static_cast<std::size_t>(out_channels)),
      gweight_(weight_.size()), gbias_(bias_.size()) {}

Tensor Conv2d::run(const Tensor& x, std::vector<Real>& col) const {
  require_channels(x, cin_, "Conv2d");
  const Window g{cin_, x.n, x.h, x.w, k_, stride_, pad_};
  im2col(x.data.data(), g, col);
  Tensor y(cout_, x.n, g.out_h(), g.out_w());
  ConstMatMap w(weight_.data(), cout_, g.rows());
  ConstMatMap c(col.data(), g.rows(), static_cast<Eigen::Index>(g.cols()));
  MatMap out(y.data.data(), cout_, static_cast<Eigen::Index>(g.cols()));
  out.noalias() = w * c;
  add_channel_bias(y, bias_);
  return y;
}

Tensor Conv2d::forward(const Tensor& x) {
  input_shape_ = Tensor(x.c, x.n, x.h, x.w);
  input_shape_.data.clear();
  return run(x, col_);
}

Tensor Conv2d::infer(const Tensor& x) const {
  std::vector<Real> col;
  return run(x, col);
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  const Window g{cin_, input_shape_.n, input_shape_.h, input_shape_.w, k_, stride_, pad_};
  const auto ncols = static_cast<Eigen::Index>(g.cols());
  ConstMatMap dy(grad_out.data.data(), cout_, ncols);
  ConstMatMap c(col_.data(), g.rows(), ncols);
  MatMap gw(gweight_.data(), cout_, g.rows());
  gw.noalias() += dy * c.transpose();
  accumulate_channel_sums(grad_out, gbias_);

  std::vector<Real> dcol(static_cast<std::size_t>(g.rows()) * g.cols());
  MatMap dc(dcol.data(), g.rows(), ncols);
  ConstMatMap w(weight_.data(), cout_, g.rows());
  dc.noalias() = w.transpose() * dy;
  Tensor dx(cin_, g.batch, g.height, g.width);
  col2im(dcol, g, dx.data.data());
  return dx;
}

void Conv2d::collect(std::vector<ParamView>& out, const std::string& prefix) {
  out.push_back({prefix + "weight", {cout_, cin_, k_, k_}, &weight_, &gweight_});
  out.push_back({prefix + "bias", {cout_}, &bias_, &gbias_});
}

void Conv2d::init(RngStream& rng) {
  const Real bound = Real(1) / std::sqrt(static_cast<Real>(cin_ * k_ * k_));
  uniform_init(weight_, bound, rng);
  uniform_init(bias_, bound, rng);
}

std::string Conv2d::describe() const {
  return "Conv2d(" + std::to_string(cin_) + "->" + std::to_string(cout_) + ",k" +
         std::to_string(k_) + ",s" + std::to_string(stride_) + ",p" + std::to_string(pad_) + ")";
}

// ------------------------------------------------------- ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride, int padding)
    : cin_(in_channels), cout_(out_channels), k_(kernel), stride_(stride), pad_(padding),
      weight_(static_cast<std::size_t>(in_channels) * out_channels * kernel * kernel),
      bias_(static_cast<std::size_t>(out_channels)),
      gweight_(weight_.size()), gbias_(bias_.size()) {}

// The transposed convolution is the adjoint of a Conv2d that maps the
// (cout, Ho, Wo) output space onto the (cin, Hi, Wi) input space.
Tensor ConvTranspose2d::infer(const Tensor& x) const {
  require_channels(x, cin_, "ConvTranspose2d");
  const int ho = (x.h - 1) * stride_ - 2 * pad_ + k_;
  const int wo = (x.w - 1) * stride_ - 2 * pad_ + k_;
  const Window g{cout_, x.n, ho, wo, k_, stride_, pad_};
  const auto ncols = static_cast<Eigen::Index>(g.cols());
  ConstMatMap w(weight_.data(), cin_, g.rows());
  ConstMatMap in(x.data.data(), cin_, ncols);
  std::vector<Real> col(static_cast<std::size_t>(g.rows()) * g.cols());
  MatMap c(col.data(), g.rows(), ncols);
  c.noalias() = w.transpose() * in;
  Tensor y(cout_, x.n, ho, wo);
  col2im(col, g, y.data.data());
  add_channel_bias(y, bias_);
  return y;
}

Tensor ConvTranspose2d::forward(const Tensor& x) {
  input_ = x;
  return infer(x);
}

Tensor ConvTranspose2d::backward(const Tensor& grad_out) {
  const Window g{cout_, grad_out.n, grad_out.h, grad_out.w, k_, stride_, pad_};
  const auto ncols = static_cast<Eigen::Index>(g.cols());
  std::vector<Real> dcol;
  im2col(grad_out.data.data(), g, dcol);
  ConstMatMap dc(dcol.data(), g.rows(), ncols);
  ConstMatMap in(input_.data.data(), cin_, ncols);
  MatMap gw(gweight_.data(), cin_, g.rows());
  gw.noalias() += in * dc.transpose();
  accumulate_channel_sums(grad_out, gbias_);

  Tensor dx(cin_, input_.n, input_.h, input_.w);
  MatMap dxm(dx.data.data(), cin_, ncols);
  ConstMatMap w(weight_.data(), cin_, g.rows());
  dxm.noalias() = w * dc;
  return dx;
}

void ConvTranspose2d::collect(std::vector<ParamView>& out, const std::string& prefix) {
  out.push_back({prefix + "weight", {cin_, cout_, k_, k_}, &weight_, &gweight_});
  out.push_back({prefix + "bias", {cout_}, &bias_, &gbias_});
}

void ConvTranspose2d::init(RngStream& rng) {
  const Real fan_in = static_cast<Real>(cin_ * k_ * k_) / static_cast<Real>(stride_ * stride_);
  const Real bound = Real(1) / std::sqrt(std::max(fan_in, Real(1)));
  uniform_init(weight_, bound, rng);
  uniform_init(bias_, bound, rng);
}

std::string ConvTranspose2d::describe() const {
  return "ConvTranspose2d(" + std::to_string(cin_) + "->" + std::to_string(cout_) + ",k" +
         std::to_string(k_) + ",s" + std::to_string(stride_) + ",p" + std::to_string(pad_) + ")";
}

// ----------------------------------------------------------------- Linear

Linear::Linear(int in_features, int out_features)
    : in_(in_features), out_(out_features),
      weight_(static_cast<std::size_t>(in_features) * out_features),
      bias_(static_cast<std::size_t>(out_features)),
      gweight_(weight_.size()), gbias_(bias_.size()) {}

Tensor Linear::infer(const Tensor& x) const {
  if (x.h != 1 || x.w != 1 || x.c != in_) {
    throw UsageError("Linear: expected (" + std::to_string(in_) + ",N,1,1), got " + x.shape_string());
  }
  Tensor y(out_, x.n, 1, 1);
  ConstMatMap w(weight_.data(), out_, in_);
  ConstMatMap in(x.data.data(), in_, x.n);
  MatMap out(y.data.data(), out_, x.n);
  out.noalias() = w * in;
  add_channel_bias(y, bias_);
  return y;
}

Tensor Linear::forward(const Tensor& x) {
  input_ = x;
  return infer(x);
}

Tensor Linear::backward(const Tensor& grad_out) {
  ConstMatMap dy(grad_out.data.data(), out_, grad_out.n);
  ConstMatMap in(input_.data.data(), in_, input_.n);
  MatMap gw(gweight_.data(), out_, in_);
  gw.noalias() += dy * in.transpose();
  accumulate_channel_sums(grad_out, gbias_);
  Tensor dx(in_, input_.n, 1, 1);
  MatMap dxm(dx.data.data(), in_, input_.n);
  ConstMatMap w(weight_.data(), out_, in_);
  dxm.noalias() = w.transpose() * dy;
  return dx;
}

void Linear::collect(std::vector<ParamView>& out, const std::string& prefix) {
  out.push_back({prefix + "weight", {out_, in_}, &weight_, &gweight_});
  out.push_back({prefix + "bias", {out_}, &bias_, &gbias_});
}

void Linear::init(RngStream& rng) {
  const Real bound = Real(1) / std::sqrt(static_cast<Real>(in_));
  uniform_init(weight_, bound, rng);
  uniform_init(bias_, bound, rng);
}

std::string Linear::describe() const {
  return "Linear(" + std::to_string(in_) + "->" + std::to_string(out_) + ")";
}

// -------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(int channels, Real eps, Real momentum)
    : channels_(channels), eps_(eps), momentum_(momentum),
      gamma_(static_cast<std::size_t>(channels), Real(1)), beta_(static_cast<std::size_t>(channels)),
      ggamma_(static_cast<std::size_t>(channels)), gbeta_(static_cast<std::size_t>(channels)),
      running_mean_(static_cast<std::size_t>(channels)),
      running_var_(static_cast<std::size_t>(channels), Real(1)) {}

Tensor BatchNorm::forward(const Tensor& x) {
  require_channels(x, channels_, "BatchNorm");
  const std::size_t block = static_cast<std::size_t>(x.n) * x.plane();
  xhat_ = Tensor(x.c, x.n, x.h, x.w);
  inv_std_.assign(static_cast<std::size_t>(channels_), Real(0));
  Tensor y(x.c, x.n, x.h, x.w);
  for (int c = 0; c < channels_; ++c) {
    const Real* p = x.data.data() + c * block;
    double mean = 0;
    for (std::size_t i = 0; i < block; ++i) mean += p[i];
    mean /= static_cast<double>(block);
    double var = 0;
    for (std::size_t i = 0; i < block; ++i) var += (p[i] - mean) * (p[i] - mean);
    var /= static_cast<double>(block);
    const auto cs = static_cast<std::size_t>(c);
    const Real inv = static_cast<Real>(1.0 / std::sqrt(var + eps_));
    inv_std_[cs] = inv;
    Real* xh = xhat_.data.data() + c * block;
    Real* out = y.data.data() + c * block;
    for (std::size_t i = 0; i < block; ++i) {
      xh[i] = static_cast<Real>((p[i] - mean)) * inv;
      out[i] = gamma_[cs] * xh[i] + beta_[cs];
    }
    const double unbiased = block > 1 ? var * block / static_cast<double>(block - 1) : var;
    running_mean_[cs] = static_cast<Real>((1 - momentum_) * running_mean_[cs] + momentum_ * mean);
    running_var_[cs] = static_cast<Real>((1 - momentum_) * running_var_[cs] + momentum_ * unbiased);
  }
  return y;
}

Tensor BatchNorm::infer(const Tensor& x) const {
  require_channels(x, channels_, "BatchNorm");
  const std::size_t block = static_cast<std::size_t>(x.n) * x.plane();
  Tensor y(x.c, x.n, x.h, x.w);
  for (int c = 0; c < channels_; ++c) {
    const auto cs = static_cast<std::size_t>(c);
    const Real scale = gamma_[cs] / std::sqrt(running_var_[cs] + eps_);
    const Real shift = beta_[cs] - running_mean_[cs] * scale;
    const Real* p = x.data.data() + c * block;
    Real* out = y.data.data() + c * block;
    for (std::size_t i = 0; i < block; ++i) out[i] = p[i] * scale + shift;
  }
  return y;
}

Tensor BatchNorm::backward(const Tensor& grad_out) {
  const std::size_t block = static_cast<std::size_t>(grad_out.n) * grad_out.plane();
  Tensor dx(grad_out.c, grad_out.n, grad_out.h, grad_out.w);
  const Real m = static_cast<Real>(block);
  for (int c = 0; c < channels_; ++c) {
    const auto cs = static_cast<std::size_t>(c);
    const Real* dy = grad_out.data.data() + c * block;
    const Real* xh = xhat_.data.data() + c * block;
    Real sum_dy = 0, sum_dy_xh = 0;
    for (std::size_t i = 0; i < block; ++i) {
      sum_dy += dy[i];
      sum_dy_xh += dy[i] * xh[i];
    }
    ggamma_[cs] += sum_dy_xh;
    gbeta_[cs] += sum_dy;
    const Real k = gamma_[cs] * inv_std_[cs] / m;
    Real* out = dx.data.data() + c * block;
    for (std::size_t i = 0; i < block; ++i) {
      out[i] = k * (m * dy[i] - sum_dy - xh[i] * sum_dy_xh);
    }
  }
  return dx;
}

void BatchNorm::collect(std::vector<ParamView>& out, const std::string& prefix) {
  out.push_back({prefix + "gamma", {channels_}, &gamma_, &ggamma_});
  out.push_back({prefix + "beta", {channels_}, &beta_, &gbeta_});
  out.push_back({prefix + "running_mean", {channels_}, &running_mean_, nullptr});
  out.push_back({prefix + "running_var", {channels_}, &running_var_, nullptr});
}

std::string BatchNorm::describe() const { return "BatchNorm(" + std::to_string(channels_) + ")"; }

// ------------------------------------------------------------ activations

Tensor ReLU::infer(const Tensor& x) const {
  Tensor y = x;
  for (auto& v : y.data) v = v > 0 ? v : Real(0);
  return y;
}
Tensor ReLU::forward(const Tensor& x) {
  output_ = infer(x);
  return output_;
}
Tensor ReLU::backward(const Tensor& grad_out) {
  Tensor dx = grad_out;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(output_.data[i] > 0)) dx.data[i] = 0;
  }
  return dx;
}

Tensor LeakyReLU::infer(const Tensor& x) const {
  Tensor y = x;
  for (auto& v : y.data) v = v > 0 ? v : v * slope_;
  return y;
}
Tensor LeakyReLU::forward(const Tensor& x) {
  input_ = x;
  return infer(x);
}
Tensor LeakyReLU::backward(const Tensor& grad_out) {
  Tensor dx = grad_out;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(input_.data[i] > 0)) dx.data[i] *= slope_;
  }
  return dx;
}

Tensor Sigmoid::infer(const Tensor& x) const {
  Tensor y = x;
  for (auto& v : y.data) v = Real(1) / (Real(1) + std::exp(-v));
  return y;
}
Tensor Sigmoid::forward(const Tensor& x) {
  output_ = infer(x);
  return output_;
}
Tensor Sigmoid::backward(const Tensor& grad_out) {
  Tensor dx = grad_out;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const Real s = output_.data[i];
    dx.data[i] *= s * (Real(1) - s);
  }
  return dx;
}

Tensor Tanh::infer(const Tensor& x) const {
  Tensor y = x;
  for (auto& v : y.data) v = std::tanh(v);
  return y;
}
Tensor Tanh::forward(const Tensor& x) {
  output_ = infer(x);
  return output_;
}
Tensor Tanh::backward(const Tensor& grad_out) {
  Tensor dx = grad_out;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const Real t = output_.data[i];
    dx.data[i] *= Real(1) - t * t;
  }
  return dx;
}

// ---------------------------------------------------------------- pooling

Tensor MaxPool2::run(const Tensor& x, std::vector<std::size_t>* argmax) const {
  const int ho = x.h / 2, wo = x.w / 2;
  Tensor y(x.c, x.n, ho, wo);
  if (argmax) argmax->assign(y.size(), 0);
  std::size_t o = 0;
  for (int c = 0; c < x.c; ++c) {
    for (int n = 0; n < x.n; ++n) {
      const Real* src = x.plane_ptr(c, n);
      const std::size_t base = static_cast<std::size_t>(src - x.data.data());
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox, ++o) {
          std::size_t best = static_cast<std::size_t>(2 * oy) * x.w + 2 * ox;
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              const std::size_t idx = static_cast<std::size_t>(2 * oy + dy) * x.w + 2 * ox + dx;
              if (src[idx] > src[best]) best = idx;
            }
          }
          y.data[o] = src[best];
          if (argmax) (*argmax)[o] = base + best;
        }
      }
    }
  }
  return y;
}

Tensor MaxPool2::forward(const Tensor& x) {
  input_shape_ = Tensor(x.c, x.n, x.h, x.w);
  input_shape_.data.clear();
  return run(x, &argmax_);
}
Tensor MaxPool2::infer(const Tensor& x) const { return run(x, nullptr); }
Tensor MaxPool2::backward(const Tensor& grad_out) {
  Tensor dx(input_shape_.c, input_shape_.n, input_shape_.h, input_shape_.w);
  for (std::size_t o = 0; o < grad_out.size(); ++o) dx.data[argmax_[o]] += grad_out.data[o];
  return dx;
}

// ---------------------------------------------------------------- reshape

Tensor flatten_features(const Tensor& x) {
  const std::size_t plane = x.plane();
  Tensor y(static_cast<int>(x.c * plane), x.n, 1, 1);
  for (int c = 0; c < x.c; ++c) {
    for (int n = 0; n < x.n; ++n) {
      const Real* src = x.plane_ptr(c, n);
      for (std::size_t p = 0; p < plane; ++p) {
        y.data[(c * plane + p) * static_cast<std::size_t>(x.n) + n] = src[p];
      }
    }
  }
  return y;
}

Tensor unflatten_features(const Tensor& x, int c, int h, int w) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  if (x.h != 1 || x.w != 1 || static_cast<std::size_t>(x.c) != c * plane) {
    throw UsageError("Unflatten: cannot reshape " + x.shape_string());
  }
  Tensor y(c, x.n, h, w);
  for (int ch = 0; ch < c; ++ch) {
    for (int n = 0; n < x.n; ++n) {
      Real* dst = y.plane_ptr(ch, n);
      for (std::size_t p = 0; p < plane; ++p) {
        dst[p] = x.data[(ch * plane + p) * static_cast<std::size_t>(x.n) + n];
      }
    }
  }
  return y;
}

Tensor Flatten::forward(const Tensor& x) {
  c_ = x.c;
  h_ = x.h;
  w_ = x.w;
  return flatten_features(x);
}
Tensor Flatten::infer(const Tensor& x) const { return flatten_features(x); }
Tensor Flatten::backward(const Tensor& grad_out) { return unflatten_features(grad_out, c_, h_, w_); }

Tensor Unflatten::infer(const Tensor& x) const { return unflatten_features(x, c_, h_, w_); }
Tensor Unflatten::backward(const Tensor& grad_out) { return flatten_features(grad_out); }
std::string Unflatten::describe() const {
  return "Unflatten(" + std::to_string(c_) + "," + std::to_string(h_) + "," + std::to_string(w_) + ")";
}

// ------------------------------------------------------------- Sequential

Tensor Sequential::forward(const Tensor& x) {
  Tensor h = x;
  for (auto& l : layers_) h = l->forward(h);
  return h;
}

Tensor Sequential::infer(const Tensor& x) const {
  Tensor h = x;
  for (const auto& l : layers_) h = l->infer(h);
  return h;
}

Tensor Sequential::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

void Sequential::collect(std::vector<ParamView>& out, const std::string& prefix) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->collect(out, prefix + std::to_string(i) + ".");
  }
}

void Sequential::init(RngStream& rng) {
  for (auto& l : layers_) l->init(rng);
}

std::string Sequential::describe() const {
  std::string s;
  for (const auto& l : layers_) {
    if (!s.empty()) s += " -> ";
    s += l->describe();
  }
  return s;
}

std::size_t parameter_count(const std::vector<ParamView>& params) {
  std::size_t n = 0;
  for (const auto& p : params) {
    if (p.grad) n += p.value->size();
  }
  return n;
}

void zero_grad(const std::vector<ParamView>& params) {
  for (const auto& p : params) {
    if (p.grad) std::fill(p.grad->begin(), p.grad->end(), Real(0));
  }
}

bool all_finite(const std::vector<ParamView>& params) {
  for (const auto& p : params) {
    for (Real v : *p.value) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace STEGSAN_NN_NS
}  // namespace stegsan::nn
