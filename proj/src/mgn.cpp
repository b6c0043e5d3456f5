#include "lact/mgn.hpp"

#include <cmath>
#include <limits>

#include "lact/data.hpp"
#include "lact/io.hpp"
#include "lact/nn/ct_layers.hpp"

namespace lact::mgn {

using nn::Shape;
using nn::Tensor;

namespace {

constexpr std::size_t kKernel = 5;

void set_all(Tensor t, double v) {
  for (auto& x : t.mutable_values()) x = v;
}

}  // namespace

ResBlockParams ResBlockParams::make(std::size_t features, Rng& rng, const std::string& name) {
  if (features == 0) throw std::invalid_argument("ResBlockParams: features must be positive");
  ResBlockParams p;
  const std::array<std::size_t, 5> ch{1, features, features, features, 1};
  for (std::size_t k = 0; k < 4; ++k)
    p.conv[k] = nn::make_conv(kKernel, ch[k], ch[k + 1], rng, name + ".conv" + std::to_string(k + 1));
  for (std::size_t k = 0; k < 3; ++k)
    p.bn[k] = nn::make_bn(ch[k + 2], name + ".bn" + std::to_string(k + 2));
  return p;
}

std::vector<Tensor> ResBlockParams::parameters() const {
  std::vector<Tensor> out;
  for (const auto& c : conv) {
    out.push_back(c.filters);
    out.push_back(c.bias);
  }
  for (const auto& b : bn) {
    out.push_back(b.scale);
    out.push_back(b.offset);
  }
  return out;
}

void ResBlockParams::zero() {
  for (auto& c : conv) {
    set_all(c.filters, 0.0);
    set_all(c.bias, 0.0);
  }
  for (auto& b : bn) set_all(b.offset, 0.0);
}

MergeParams MergeParams::make(double t1, double t2, double t3, double t4) {
  return {Tensor::scalar_parameter(t1, "merge.t1"), Tensor::scalar_parameter(t2, "merge.t2"),
          Tensor::scalar_parameter(t3, "merge.t3"), Tensor::scalar_parameter(t4, "merge.t4")};
}

std::vector<Tensor> MergeParams::parameters() const { return {t1, t2, t3, t4}; }

MgnModel::MgnModel(const ModelConfig& config)
    : config_(config),
      geom_(config.scan.geometry()),
      sel_(config.scan.selection()),
      fbp_(std::make_shared<FbpOperator>(geom_)),
      merge_(MergeParams::make(1.0, 0.1, 0.1, 0.1)) {
  if (config.n_iter == 0) throw std::invalid_argument("MgnModel: n_iter must be at least 1");
  Rng rng(config.seed);
  for (std::size_t n = 1; n <= config.n_iter; ++n) {
    sigma_.push_back(ResBlockParams::make(config.features, rng, "sigma" + std::to_string(n)));
    z_.push_back(ResBlockParams::make(config.features, rng, "z" + std::to_string(n)));
  }
}

std::vector<Tensor> MgnModel::parameters() const {
  std::vector<Tensor> out;
  for (const auto& b : sigma_)
    for (auto& t : b.parameters()) out.push_back(t);
  for (const auto& b : z_)
    for (auto& t : b.parameters()) out.push_back(t);
  for (auto& t : merge_.parameters()) out.push_back(t);
  return out;
}

nn::Checkpoint MgnModel::to_checkpoint() const {
  nn::Checkpoint ck;
  for (const auto& [k, v] : config_.scan.to_key_values()) ck.meta["scan." + k] = v;
  ck.meta["n_iter"] = std::to_string(config_.n_iter);
  ck.meta["features"] = std::to_string(config_.features);
  ck.meta["seed"] = std::to_string(config_.seed);
  for (const auto& t : parameters()) {
    const auto v = t.values();
    ck.arrays.push_back({t.name(), t.shape(), std::vector<double>(v.begin(), v.end())});
  }
  for (const auto* blocks : {&sigma_, &z_})
    for (const auto& b : *blocks)
      for (const auto& bn : b.bn) {
        const std::string base = bn.scale.name().substr(0, bn.scale.name().size() - 6);
        const Shape s{1, 1, 1, bn.channels()};
        ck.arrays.push_back({base + ".running_mean", s, bn.running_mean});
        ck.arrays.push_back({base + ".running_var", s, bn.running_var});
      }
  return ck;
}

MgnModel MgnModel::from_checkpoint(const nn::Checkpoint& ck) {
  KeyValues scan_kv;
  for (const auto& [k, v] : ck.meta)
    if (k.rfind("scan.", 0) == 0) scan_kv[k.substr(5)] = v;
  const KeyValues& meta = ck.meta;
  ModelConfig cfg;
  cfg.scan = ScanSpec::from_key_values(scan_kv);
  cfg.n_iter = get_size(meta, "n_iter", 0);
  cfg.features = get_size(meta, "features", 0);
  cfg.seed = get_u64(meta, "seed", 0);
  MgnModel model(cfg);

  const auto fill = [&](std::span<double> dst, const Shape& shape, const std::string& name) {
    const auto& a = ck.at(name);
    if (a.shape != shape)
      throw std::invalid_argument("checkpoint tensor '" + name + "' has shape " + a.shape.str() +
                                  ", model expects " + shape.str());
    std::copy(a.values.begin(), a.values.end(), dst.begin());
  };
  for (auto t : model.parameters()) fill(t.mutable_values(), t.shape(), t.name());
  for (auto* blocks : {&model.sigma_, &model.z_})
    for (auto& b : *blocks)
      for (auto& bn : b.bn) {
        const std::string base = bn.scale.name().substr(0, bn.scale.name().size() - 6);
        const Shape s{1, 1, 1, bn.channels()};
        fill(bn.running_mean, s, base + ".running_mean");
        fill(bn.running_var, s, base + ".running_var");
      }
  return model;
}

Tensor res_block(const Tensor& x, ResBlockParams& p, bool training) {
  if (x.shape().c != 1)
    throw std::invalid_argument("res_block: expected one channel, got " + x.shape().str());
  Tensor h = nn::relu(nn::conv2d(x, p.conv[0].filters, p.conv[0].bias));
  for (std::size_t k = 1; k < 4; ++k)
    h = nn::relu(nn::batchnorm(nn::conv2d(h, p.conv[k].filters, p.conv[k].bias), p.bn[k - 1],
                               training));
  return nn::add(x, h);
}

namespace {

Tensor sigma_from_projection(const Tensor& wu, ResBlockParams& p, bool training) {
  const Tensor spectrum = nn::fft2(nn::to_complex(wu));
  const Tensor stacked = nn::channels_to_batch(spectrum);
  return nn::batch_to_channels(res_block(stacked, p, training), 2);
}

void require_grid(const Tensor& u, const ImageGrid& grid, const char* op) {
  const Shape& s = u.shape();
  if (s.h != grid.height || s.w != grid.width || s.c != 1)
    throw std::invalid_argument(std::string(op) + ": image batch " + s.str() +
                                " does not match the grid");
}

}  // namespace

Tensor res_sigma_forward(const Tensor& u, ResBlockParams& p, const Geometry& geom, bool training) {
  require_grid(u, grid_of(geom), "res_sigma_forward");
  return sigma_from_projection(nn::project_layer(u, geom), p, training);
}

Tensor res_z_forward(const Tensor& u, ResBlockParams& p, bool training) {
  return res_block(u, p, training);
}

Tensor merge_forward(const Tensor& u, const Tensor& z, const Tensor& sigma, const Tensor& g,
                     const MergeParams& p, const Geometry& geom, const ViewSelection& sel,
                     const std::shared_ptr<const FbpOperator>& fbp) {
  require_grid(u, grid_of(geom), "merge_forward");
  if (z.shape() != u.shape())
    throw std::invalid_argument("merge_forward: z " + z.shape().str() + " differs from u " +
                                u.shape().str());
  const Shape full{u.shape().n, n_angles(geom), n_detectors(geom), 2};
  if (sigma.shape() != full)
    throw std::invalid_argument("merge_forward: sigma " + sigma.shape().str() + ", expected " +
                                full.str());
  const Shape lim{u.shape().n, sel.size(), n_detectors(geom), 1};
  if (g.shape() != lim)
    throw std::invalid_argument("merge_forward: g " + g.shape().str() + ", expected " + lim.str());

  const Tensor wu = nn::project_layer(u, geom);
  const Tensor data = nn::fbp_layer(nn::pad_layer(nn::sub(nn::restrict_layer(wu, sel), g), sel), fbp);
  const Tensor completed = nn::real_part(nn::ifft2(sigma));
  const Tensor consistency = nn::fbp_layer(nn::sub(wu, completed), fbp);
  Tensor out = nn::mul_scalar(u, p.t1);
  out = nn::add(out, nn::mul_scalar(data, p.t2));
  out = nn::add(out, nn::mul_scalar(consistency, p.t3));
  return nn::add(out, nn::mul_scalar(z, p.t4));
}

Outputs mgn_forward(const Tensor& g, const Tensor& u0, MgnModel& model, bool training) {
  Outputs out{u0, {}, {}};
  for (std::size_t n = 0; n < model.n_iter(); ++n) {
    out.sigma = res_sigma_forward(out.u, model.sigma_blocks()[n], model.geometry(), training);
    out.z = res_z_forward(out.u, model.z_blocks()[n], training);
    out.u = merge_forward(out.u, out.z, out.sigma, g, model.merge(), model.geometry(),
                          model.selection(), model.fbp());
  }
  return out;
}

Tensor mgn_loss(const Tensor& z, const Tensor& sigma, const Tensor& image_label,
                const Tensor& sino_label, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("mgn_loss: lambda must lie in [0, 1]");
  if (z.shape() != image_label.shape())
    throw std::invalid_argument("mgn_loss: z " + z.shape().str() + " vs label " +
                                image_label.shape().str());
  const Tensor target = nn::fft2(nn::to_complex(sino_label));
  if (sigma.shape() != target.shape())
    throw std::invalid_argument("mgn_loss: sigma " + sigma.shape().str() + " vs label spectrum " +
                                target.shape().str());
  const Tensor image_term = nn::sum_squares(nn::sub(z, image_label));
  const Tensor spectrum_term = nn::sum_squares(nn::sub(sigma, target));
  const double inv_b = 1.0 / static_cast<double>(z.shape().n);
  return nn::add(nn::scale(image_term, lambda * inv_b),
                 nn::scale(spectrum_term, (1.0 - lambda) * inv_b));
}

Batch make_batch(const std::vector<const Sample*>& samples) {
  std::vector<Array2> g, u0, image, sino;
  for (const auto* s : samples) {
    g.push_back(s->limited.values);
    u0.push_back(s->u0.values);
    image.push_back(s->image_label.values);
    sino.push_back(s->sino_label.values);
  }
  return {nn::array_batch(g), nn::array_batch(u0), nn::array_batch(image), nn::array_batch(sino)};
}

std::vector<Image> reconstruct(MgnModel& model, const std::vector<const Sample*>& samples) {
  std::vector<Image> out;
  const ImageGrid& grid = grid_of(model.geometry());
  for (const auto* s : samples) {
    const Batch b = make_batch({s});
    out.push_back(nn::image_at(mgn_forward(b.g, b.u0, model, false).u, 0, grid));
  }
  return out;
}

TrainResult train(MgnModel& model, const Dataset& data, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  if (config.batch_size == 0) throw std::invalid_argument("train: batch_size must be positive");
  const auto train_set = data.split("train");
  if (train_set.empty()) throw std::invalid_argument("train: dataset has no train samples");
  const auto val_set = data.split("val");

  std::vector<Tensor> params = model.parameters();
  nn::AdamState adam;
  adam.lr = config.lr;
  Rng rng(config.seed);
  TrainResult result;
  std::vector<std::size_t> order(train_set.size());

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double loss_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      std::vector<const Sample*> members;
      for (std::size_t i = start; i < std::min(order.size(), start + config.batch_size); ++i)
        members.push_back(train_set[order[i]]);
      ++steps;
      for (auto& p : params) p.zero_grad();
      const Batch b = make_batch(members);
      const Outputs out = mgn_forward(b.g, b.u0, model, true);
      const Tensor loss = mgn_loss(out.z, out.sigma, b.image, b.sino, config.lambda);
      const double value = loss.item();
      if (!std::isfinite(value)) throw TrainingDiverged(epoch, steps, "loss is not finite");
      nn::backward(loss);
      try {
        nn::adam_step(params, adam);
      } catch (const nn::NonFiniteGradient& e) {
        throw TrainingDiverged(epoch, steps, e.what());
      }
      loss_sum += value;
      result.step_losses.push_back(value);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = loss_sum / static_cast<double>(steps);
    rec.val_psnr = std::numeric_limits<double>::quiet_NaN();
    if (!val_set.empty()) {
      const auto images = reconstruct(model, val_set);
      double acc = 0.0;
      for (std::size_t i = 0; i < images.size(); ++i)
        acc += psnr(images[i], val_set[i]->image_label);
      rec.val_psnr = acc / static_cast<double>(images.size());
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

}  // namespace lact::mgn
