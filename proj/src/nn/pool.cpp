#include "mlr/nn/pool.hpp"

namespace mlr::nn {

namespace {

void require_rank4(const Shape& dims, const char* op) {
  if (dims.size() != 4) {
    throw ShapeError(std::string(op) + " expects [B,C,H,W], got " + shape_str(dims));
  }
}

// Source coordinate along one axis for nearest-neighbour upsampling.
inline std::size_t source_index(std::size_t dst, std::size_t src_len, std::size_t dst_len) {
  return dst * src_len / dst_len;
}

}  // namespace

template <typename T>
PoolResult<T> maxpool2x2_forward(const Tensor<T>& input) {
  require_rank4(input.dims(), "maxpool2x2");
  const std::size_t batch = input.dim(0), ch = input.dim(1), h = input.dim(2), w = input.dim(3);
  if (h < 2 || w < 2) {
    throw ShapeError("maxpool2x2 needs H,W >= 2, got " + shape_str(input.dims()));
  }
  const std::size_t oh = h / 2, ow = w / 2;
  PoolResult<T> r{Tensor<T>({batch, ch, oh, ow}), {input.dims(), {batch, ch, oh, ow}, {}}};
  r.argmax.index.resize(r.output.size());
  const T* in = input.data();
  T* out = r.output.data();
  std::size_t o = 0;
  for (std::size_t plane = 0; plane < batch * ch; ++plane) {
    const std::size_t base = plane * h * w;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x, ++o) {
        std::size_t best = base + (2 * y) * w + 2 * x;
        const std::size_t cand[3] = {best + 1, best + w, best + w + 1};
        for (auto c : cand) {
          if (in[c] > in[best]) best = c;
        }
        out[o] = in[best];
        r.argmax.index[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return r;
}

template <typename T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_out, const ArgmaxMap& argmax,
                              const Shape& input_dims) {
  if (argmax.input_dims != input_dims || argmax.output_dims != grad_out.dims() ||
      argmax.index.size() != grad_out.size()) {
    throw UsageError("maxpool2x2_backward: argmax map for input " + shape_str(argmax.input_dims) +
                     " / output " + shape_str(argmax.output_dims) +
                     " does not match grad_out " + shape_str(grad_out.dims()) + " and input " +
                     shape_str(input_dims));
  }
  Tensor<T> grad_in(input_dims);
  for (std::size_t i = 0; i < argmax.index.size(); ++i) {
    grad_in[argmax.index[i]] += grad_out[i];
  }
  return grad_in;
}

template <typename T>
Tensor<T> upsample_to_forward(const Tensor<T>& input, std::size_t target_h, std::size_t target_w) {
  require_rank4(input.dims(), "upsample_to");
  const std::size_t batch = input.dim(0), ch = input.dim(1), h = input.dim(2), w = input.dim(3);
  if (target_h < h || target_w < w) {
    throw ShapeError("upsample_to target " + std::to_string(target_h) + "x" +
                     std::to_string(target_w) + " is smaller than input " +
                     shape_str(input.dims()));
  }
  Tensor<T> out({batch, ch, target_h, target_w});
  std::vector<std::size_t> col_src(target_w);
  for (std::size_t x = 0; x < target_w; ++x) col_src[x] = source_index(x, w, target_w);
  for (std::size_t plane = 0; plane < batch * ch; ++plane) {
    const T* src = input.data() + plane * h * w;
    T* dst = out.data() + plane * target_h * target_w;
    for (std::size_t y = 0; y < target_h; ++y) {
      const T* src_row = src + source_index(y, h, target_h) * w;
      T* dst_row = dst + y * target_w;
      for (std::size_t x = 0; x < target_w; ++x) dst_row[x] = src_row[col_src[x]];
    }
  }
  return out;
}

template <typename T>
Tensor<T> upsample_to_backward(const Tensor<T>& grad_out, const Shape& input_dims) {
  require_rank4(input_dims, "upsample_to_backward");
  require_rank4(grad_out.dims(), "upsample_to_backward");
  const std::size_t batch = input_dims[0], ch = input_dims[1], h = input_dims[2],
                    w = input_dims[3];
  const std::size_t th = grad_out.dim(2), tw = grad_out.dim(3);
  if (grad_out.dim(0) != batch || grad_out.dim(1) != ch || th < h || tw < w) {
    throw ShapeError("upsample_to_backward grad " + shape_str(grad_out.dims()) +
                     " incompatible with input " + shape_str(input_dims));
  }
  Tensor<T> grad_in(input_dims);
  std::vector<std::size_t> col_src(tw);
  for (std::size_t x = 0; x < tw; ++x) col_src[x] = source_index(x, w, tw);
  for (std::size_t plane = 0; plane < batch * ch; ++plane) {
    const T* src = grad_out.data() + plane * th * tw;
    T* dst = grad_in.data() + plane * h * w;
    for (std::size_t y = 0; y < th; ++y) {
      T* dst_row = dst + source_index(y, h, th) * w;
      const T* src_row = src + y * tw;
      for (std::size_t x = 0; x < tw; ++x) dst_row[col_src[x]] += src_row[x];
    }
  }
  return grad_in;
}

template PoolResult<float> maxpool2x2_forward(const Tensor<float>&);
template PoolResult<double> maxpool2x2_forward(const Tensor<double>&);
template Tensor<float> maxpool2x2_backward(const Tensor<float>&, const ArgmaxMap&, const Shape&);
template Tensor<double> maxpool2x2_backward(const Tensor<double>&, const ArgmaxMap&, const Shape&);
template Tensor<float> upsample_to_forward(const Tensor<float>&, std::size_t, std::size_t);
template Tensor<double> upsample_to_forward(const Tensor<double>&, std::size_t, std::size_t);
template Tensor<float> upsample_to_backward(const Tensor<float>&, const Shape&);
template Tensor<double> upsample_to_backward(const Tensor<double>&, const Shape&);

}  // namespace mlr::nn
