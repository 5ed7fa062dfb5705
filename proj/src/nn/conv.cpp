#include "mlr/nn/conv.hpp"

#include "lane_sum.hpp"

#include <Eigen/Core>

namespace mlr::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

struct Geometry {
  std::size_t channels, height, width;
  std::size_t out_h, out_w;
  int kh, kw, ph, pw, sh, sw;

  std::size_t col_rows() const { return channels * static_cast<std::size_t>(kh * kw); }
  std::size_t col_cols() const { return out_h * out_w; }
};

Geometry geometry_for(const Shape& in, const ConvLayerSpec& spec) {
  const auto out = spec.output_extent({static_cast<int>(in[2]), static_cast<int>(in[3])});
  return {in[1],
          in[2],
          in[3],
          static_cast<std::size_t>(out.h),
          static_cast<std::size_t>(out.w),
          spec.kernel.h,
          spec.kernel.w,
          spec.padding.h,
          spec.padding.w,
          spec.stride.h,
          spec.stride.w};
}

// Unfolds one [C,H,W] image into a [C*kh*kw, Ho*Wo] matrix; padded cells are 0.
template <typename T>
void im2col(const T* image, const Geometry& g, T* col) {
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        T* row = col + ((c * g.kh + ky) * g.kw + kx) * g.col_cols();
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy) * g.sh - g.ph + ky;
          T* dst = row + oy * g.out_w;
          if (iy < 0 || iy >= static_cast<long>(g.height)) {
            std::fill(dst, dst + g.out_w, T(0));
            continue;
          }
          const T* src = image + (c * g.height + iy) * g.width;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox) * g.sw - g.pw + kx;
            dst[ox] = (ix < 0 || ix >= static_cast<long>(g.width)) ? T(0) : src[ix];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters-adds column entries back into the image.
template <typename T>
void col2im(const T* col, const Geometry& g, T* image) {
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        const T* row = col + ((c * g.kh + ky) * g.kw + kx) * g.col_cols();
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy) * g.sh - g.ph + ky;
          if (iy < 0 || iy >= static_cast<long>(g.height)) continue;
          const T* src = row + oy * g.out_w;
          T* dst = image + (c * g.height + iy) * g.width;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox) * g.sw - g.pw + kx;
            if (ix >= 0 && ix < static_cast<long>(g.width)) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <typename T>
void check_operands(const Tensor<T>& input, const Tensor<T>& weights, const ConvLayerSpec& spec) {
  spec.validate();
  if (input.rank() != 4) {
    throw ShapeError("conv2d expects [B,C,H,W] input, got " + shape_str(input.dims()));
  }
  const Shape expected_w{static_cast<std::size_t>(spec.out_channels),
                         static_cast<std::size_t>(spec.in_channels),
                         static_cast<std::size_t>(spec.kernel.h),
                         static_cast<std::size_t>(spec.kernel.w)};
  if (input.dim(1) != static_cast<std::size_t>(spec.in_channels)) {
    throw ShapeError("conv2d input " + shape_str(input.dims()) + " does not have " +
                     std::to_string(spec.in_channels) + " channels (weights " +
                     shape_str(weights.dims()) + ")");
  }
  if (weights.dims() != expected_w) {
    throw ShapeError("conv2d weights " + shape_str(weights.dims()) + " do not match spec " +
                     shape_str(expected_w));
  }
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::gelu: return "gelu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "gelu") return Activation::gelu;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "identity") return Activation::identity;
  throw FormatError("unknown activation '" + s + "'");
}

void ConvLayerSpec::validate() const {
  if (in_channels <= 0 || out_channels <= 0) throw ShapeError("conv channels must be positive");
  if (kernel.h <= 0 || kernel.w <= 0) throw ShapeError("conv kernel must be positive");
  if (stride.h <= 0 || stride.w <= 0) throw ShapeError("conv stride must be positive");
  if (padding.h < 0 || padding.w < 0) throw ShapeError("conv padding must be non-negative");
}

Extent2 ConvLayerSpec::output_extent(Extent2 in) const {
  validate();
  const int ph = in.h + 2 * padding.h;
  const int pw = in.w + 2 * padding.w;
  if (in.h <= 0 || in.w <= 0 || ph < kernel.h || pw < kernel.w) {
    throw ShapeError("conv input " + std::to_string(in.h) + "x" + std::to_string(in.w) +
                     " with padding " + std::to_string(padding.h) + "x" +
                     std::to_string(padding.w) + " is smaller than kernel " +
                     std::to_string(kernel.h) + "x" + std::to_string(kernel.w));
  }
  return {(ph - kernel.h) / stride.h + 1, (pw - kernel.w) / stride.w + 1};
}

std::size_t ConvLayerSpec::conv_parameter_count() const {
  return static_cast<std::size_t>(out_channels) *
             (static_cast<std::size_t>(in_channels) * kernel.h * kernel.w) +
         static_cast<std::size_t>(out_channels);
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias,
                         const ConvLayerSpec& spec) {
  check_operands(input, weights, spec);
  if (bias.size() != static_cast<std::size_t>(spec.out_channels)) {
    throw ShapeError("conv2d bias " + shape_str(bias.dims()) + " vs " +
                     std::to_string(spec.out_channels) + " output channels");
  }
  const auto g = geometry_for(input.dims(), spec);
  const std::size_t batch = input.dim(0);
  const std::size_t out_c = static_cast<std::size_t>(spec.out_channels);
  Tensor<T> out({batch, out_c, g.out_h, g.out_w});

  std::vector<T> col(g.col_rows() * g.col_cols());
  ConstMapMat<T> w(weights.data(), out_c, g.col_rows());
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(bias.data(), out_c);
  const std::size_t in_stride = g.channels * g.height * g.width;
  for (std::size_t n = 0; n < batch; ++n) {
    im2col(input.data() + n * in_stride, g, col.data());
    ConstMapMat<T> c(col.data(), g.col_rows(), g.col_cols());
    MapMat<T> o(out.data() + n * out_c * g.col_cols(), out_c, g.col_cols());
    o.noalias() = w * c;
    o.colwise() += b;
  }
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& cached_input,
                             const Tensor<T>& weights, const ConvLayerSpec& spec) {
  if (cached_input.empty()) {
    throw UsageError("conv2d_backward called without a cached forward input");
  }
  check_operands(cached_input, weights, spec);
  const auto g = geometry_for(cached_input.dims(), spec);
  const std::size_t batch = cached_input.dim(0);
  const std::size_t out_c = static_cast<std::size_t>(spec.out_channels);
  require_same_dims(grad_out.dims(), Shape{batch, out_c, g.out_h, g.out_w},
                    "conv2d_backward grad_out vs forward output");

  ConvGrads<T> grads{Tensor<T>(cached_input.dims()), Tensor<T>(weights.dims()),
                     Tensor<T>(Shape{out_c})};
  std::vector<T> col(g.col_rows() * g.col_cols());
  std::vector<T> dcol(col.size());
  ConstMapMat<T> w(weights.data(), out_c, g.col_rows());
  MapMat<T> dw(grads.weights.data(), out_c, g.col_rows());
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> db(grads.bias.data(), out_c);
  const std::size_t in_stride = g.channels * g.height * g.width;
  for (std::size_t n = 0; n < batch; ++n) {
    im2col(cached_input.data() + n * in_stride, g, col.data());
    ConstMapMat<T> c(col.data(), g.col_rows(), g.col_cols());
    ConstMapMat<T> go(grad_out.data() + n * out_c * g.col_cols(), out_c, g.col_cols());
    dw.noalias() += go * c.transpose();
    for (std::size_t o = 0; o < out_c; ++o) {
      const T* row = grad_out.data() + (n * out_c + o) * g.col_cols();
      db[o] += static_cast<T>(detail::lane_sum<T>(g.col_cols(), [row](std::size_t i) { return row[i]; }));
    }
    MapMat<T> dc(dcol.data(), g.col_rows(), g.col_cols());
    dc.noalias() = w.transpose() * go;
    col2im(dcol.data(), g, grads.input.data() + n * in_stride);
  }
  return grads;
}

template Tensor<float> conv2d_forward(const Tensor<float>&, const Tensor<float>&,
                                      const Tensor<float>&, const ConvLayerSpec&);
template Tensor<double> conv2d_forward(const Tensor<double>&, const Tensor<double>&,
                                       const Tensor<double>&, const ConvLayerSpec&);
template ConvGrads<float> conv2d_backward(const Tensor<float>&, const Tensor<float>&,
                                          const Tensor<float>&, const ConvLayerSpec&);
template ConvGrads<double> conv2d_backward(const Tensor<double>&, const Tensor<double>&,
                                           const Tensor<double>&, const ConvLayerSpec&);

}  // namespace mlr::nn
