#include "mlr/cae/model.hpp"

#include "mlr/nn/activation.hpp"
#include "mlr/nn/init.hpp"

namespace mlr::cae {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 step, so neighbouring tensors get unrelated streams
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

template <typename T>
CaeModel<T>::CaeModel(CaeArchitecture arch, Extent2 input, std::uint64_t seed, double init_std)
    : arch_(std::move(arch)), chain_(compute_shape_chain(arch_, input)) {
  if (!(init_std >= 0)) throw ConfigError("init_std must be non-negative");
  std::size_t tensor_index = 0;
  auto add_layer = [&](const std::string& prefix, const ConvLayerSpec& s) {
    LayerRefs r;
    const std::size_t o = s.out_channels;
    const Shape wdims{o, std::size_t(s.in_channels), std::size_t(s.kernel.h), std::size_t(s.kernel.w)};
    r.weight = params_.size();
    params_.push_back({prefix + ".conv.weight",
                       nn::normal_init<T>(wdims, derive_seed(seed, tensor_index++), init_std),
                       Tensor<T>(wdims)});
    r.bias = params_.size();
    params_.push_back({prefix + ".conv.bias", Tensor<T>({o}), Tensor<T>({o})});
    if (s.has_batchnorm) {
      r.gamma = params_.size();
      params_.push_back({prefix + ".bn.gamma", Tensor<T>({o}, T(1)), Tensor<T>({o})});
      r.beta = params_.size();
      params_.push_back({prefix + ".bn.beta", Tensor<T>({o}), Tensor<T>({o})});
      r.stats = static_cast<int>(stats_.size());
      nn::RunningStats<T> rs(o);
      rs.initialized = true;
      stats_.push_back({prefix + ".bn", std::move(rs)});
    }
    return r;
  };
  for (std::size_t i = 0; i < arch_.encoder.size(); ++i) {
    enc_refs_.push_back(add_layer("encoder." + std::to_string(i), arch_.encoder[i]));
  }
  for (std::size_t i = 0; i < arch_.decoder.size(); ++i) {
    dec_refs_.push_back(add_layer("decoder." + std::to_string(i), arch_.decoder[i]));
  }
}

template <typename T>
Shape CaeModel<T>::code_dims() const {
  const auto e = chain_.code_extent();
  return {std::size_t(chain_.code_channels()), std::size_t(e.h), std::size_t(e.w)};
}

template <typename T>
Parameter<T>& CaeModel<T>::parameter(const std::string& name) {
  for (auto& p : params_)
    if (p.name == name) return p;
  throw UsageError("no parameter named '" + name + "'");
}

template <typename T>
const Parameter<T>& CaeModel<T>::parameter(const std::string& name) const {
  return const_cast<CaeModel*>(this)->parameter(name);
}

template <typename T>
std::size_t CaeModel<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <typename T>
void CaeModel<T>::check_input(const Tensor<T>& x) const {
  const auto in = chain_.input;
  if (x.rank() != 4 || x.dim(1) != 1 || x.dim(2) != std::size_t(in.h) ||
      x.dim(3) != std::size_t(in.w)) {
    throw ShapeError("model built for [B,1," + std::to_string(in.h) + "," + std::to_string(in.w) +
                     "] inputs, got " + shape_str(x.dims()));
  }
}

template <typename T>
Tensor<T> CaeModel<T>::run_layer(bool encoder, std::size_t i, Tensor<T> x,
                                 std::vector<NamedStats<T>>& stats, Mode mode,
                                 LayerCache* cache) const {
  const auto& spec = encoder ? arch_.encoder[i] : arch_.decoder[i];
  const auto& refs = encoder ? enc_refs_[i] : dec_refs_[i];
  if (!encoder) {
    const auto& target = chain_.decoder[i].in;
    if (cache) cache->upsample_in = x.dims();
    x = nn::upsample_to_forward(x, std::size_t(target.h), std::size_t(target.w));
  }
  Tensor<T> y = nn::conv2d_forward(x, params_[refs.weight].value, params_[refs.bias].value, spec);
  if (cache) cache->conv_in = std::move(x);
  if (spec.has_batchnorm) {
    y = nn::batchnorm_forward(y, params_[refs.gamma].value, params_[refs.beta].value,
                              stats[refs.stats].stats, mode, cache ? &cache->bn : nullptr);
  }
  Tensor<T> a = nn::activation_forward(spec.activation, y);
  if (cache) {
    cache->act_in = std::move(y);
    if (spec.activation == nn::Activation::sigmoid) cache->act_out = a;
  }
  if (!encoder) return a;
  auto pooled = nn::maxpool2x2_forward(a);
  if (cache) {
    cache->pool_in = a.dims();
    cache->argmax = std::move(pooled.argmax);
  }
  return std::move(pooled.output);
}

template <typename T>
Tensor<T> CaeModel<T>::back_layer(bool encoder, std::size_t i, const Tensor<T>& grad,
                                  const LayerCache& cache) {
  const auto& spec = encoder ? arch_.encoder[i] : arch_.decoder[i];
  const auto& refs = encoder ? enc_refs_[i] : dec_refs_[i];
  Tensor<T> g = encoder ? nn::maxpool2x2_backward(grad, cache.argmax, cache.pool_in) : grad;
  g = nn::activation_backward(spec.activation, g, cache.act_in, cache.act_out);
  if (spec.has_batchnorm) {
    auto bg = nn::batchnorm_backward(g, params_[refs.gamma].value, cache.bn);
    params_[refs.gamma].grad = std::move(bg.gamma);
    params_[refs.beta].grad = std::move(bg.beta);
    g = std::move(bg.input);
  }
  auto cg = nn::conv2d_backward(g, cache.conv_in, params_[refs.weight].value, spec);
  params_[refs.weight].grad = std::move(cg.weights);
  params_[refs.bias].grad = std::move(cg.bias);
  if (encoder) return std::move(cg.input);
  return nn::upsample_to_backward(cg.input, cache.upsample_in);
}

template <typename T>
Tensor<T> CaeModel<T>::run_encoder(const Tensor<T>& x, std::vector<NamedStats<T>>& stats, Mode mode,
                                   std::vector<LayerCache>* caches) const {
  check_input(x);
  Tensor<T> h = x;
  for (std::size_t i = 0; i < arch_.encoder.size(); ++i) {
    h = run_layer(true, i, std::move(h), stats, mode, caches ? &(*caches)[i] : nullptr);
  }
  return h;
}

template <typename T>
Tensor<T> CaeModel<T>::run_decoder(const Tensor<T>& code, std::vector<NamedStats<T>>& stats,
                                   Mode mode, std::vector<LayerCache>* caches) const {
  Tensor<T> h = code;
  for (std::size_t i = 0; i < arch_.decoder.size(); ++i) {
    h = run_layer(false, i, std::move(h), stats, mode, caches ? &(*caches)[i] : nullptr);
  }
  return h;
}

template <typename T>
Tensor<T> CaeModel<T>::forward(const Tensor<T>& x, Mode mode) {
  enc_cache_.assign(arch_.encoder.size(), LayerCache{});
  dec_cache_.assign(arch_.decoder.size(), LayerCache{});
  has_cache_ = false;
  auto code = run_encoder(x, stats_, mode, &enc_cache_);
  auto out = run_decoder(code, stats_, mode, &dec_cache_);
  has_cache_ = true;
  return out;
}

template <typename T>
Tensor<T> CaeModel<T>::backward(const Tensor<T>& grad_reconstruction) {
  if (!has_cache_) throw UsageError("CaeModel::backward called without a forward pass");
  Tensor<T> g = grad_reconstruction;
  for (std::size_t i = arch_.decoder.size(); i-- > 0;) g = back_layer(false, i, g, dec_cache_[i]);
  for (std::size_t i = arch_.encoder.size(); i-- > 0;) g = back_layer(true, i, g, enc_cache_[i]);
  return g;
}

template <typename T>
Tensor<T> CaeModel<T>::encode(const Tensor<T>& x) const {
  auto stats = stats_;
  auto code = run_encoder(x, stats, Mode::eval, nullptr);
  return code.reshaped({x.dim(0), code_size()});
}

template <typename T>
Tensor<T> CaeModel<T>::decode(const Tensor<T>& code) const {
  if (code.rank() != 2 || code.dim(1) != code_size()) {
    throw ShapeError("decode expects [B," + std::to_string(code_size()) + "] codes, got " +
                     shape_str(code.dims()));
  }
  auto stats = stats_;
  Shape dims{code.dim(0)};
  for (auto d : code_dims()) dims.push_back(d);
  return run_decoder(code.reshaped(dims), stats, Mode::eval, nullptr);
}

template <typename T>
template <typename U>
CaeModel<U> CaeModel<T>::cast() const {
  CaeModel<U> m;
  m.arch_ = arch_;
  m.chain_ = chain_;
  for (const auto& p : params_) {
    m.params_.push_back({p.name, p.value.template cast<U>(), Tensor<U>(p.value.dims())});
  }
  for (const auto& s : stats_) {
    nn::RunningStats<U> rs;
    rs.mean = s.stats.mean.template cast<U>();
    rs.var = s.stats.var.template cast<U>();
    rs.initialized = s.stats.initialized;
    m.stats_.push_back({s.name, std::move(rs)});
  }
  for (const auto* src : {&enc_refs_, &dec_refs_}) {
    auto& dst = src == &enc_refs_ ? m.enc_refs_ : m.dec_refs_;
    for (const auto& r : *src) dst.push_back({r.weight, r.bias, r.gamma, r.beta, r.stats});
  }
  return m;
}

template class CaeModel<float>;
template class CaeModel<double>;
template CaeModel<double> CaeModel<float>::cast<double>() const;
template CaeModel<float> CaeModel<double>::cast<float>() const;
template CaeModel<float> CaeModel<float>::cast<float>() const;

ParamBreakdown count_parameters(const CaeModel<float>& model) {
  ParamBreakdown b;
  for (const auto& p : model.parameters()) {
    // "<part>.<i>.<conv|bn>.<tensor>" -> layer key "<part>.<i>.<conv|bn>"
    const std::string key = p.name.substr(0, p.name.rfind('.'));
    if (b.layers.empty() || b.layers.back().name != key) b.layers.push_back({key, 0});
    b.layers.back().count += p.value.size();
    (p.name.starts_with("encoder.") ? b.encoder_total : b.decoder_total) += p.value.size();
  }
  b.total = b.encoder_total + b.decoder_total;
  return b;
}

}  // namespace mlr::cae
