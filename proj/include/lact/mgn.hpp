#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lact/analytic.hpp"
#include "lact/dataset.hpp"
#include "lact/nn/adam.hpp"
#include "lact/nn/checkpoint.hpp"
#include "lact/nn/ops.hpp"
#include "lact/scan.hpp"

namespace lact::mgn {

/// Four 5x5 conv layers (1->f, f->f, f->f, f->1) with batch norm on
/// layers 2-4 and a skip connection around the stack.
struct ResBlockParams {
  std::array<nn::ConvParams, 4> conv;
  std::array<nn::BnParams, 3> bn;

  static ResBlockParams make(std::size_t features, Rng& rng, const std::string& name);
  std::vector<nn::Tensor> parameters() const;
  /// Sets every filter, bias and BN offset to zero.
  void zero();
};

/// Step scalars of the merge update, shared by every iteration block.
struct MergeParams {
  nn::Tensor t1, t2, t3, t4;

  static MergeParams make(double t1, double t2, double t3, double t4);
  std::vector<nn::Tensor> parameters() const;
};

struct ModelConfig {
  ScanSpec scan;
  std::size_t n_iter = 5;
  std::size_t features = 64;
  std::uint64_t seed = 0;
};

class MgnModel {
 public:
  /// Glorot-uniform filters drawn in block order from Rng(config.seed),
  /// zero biases, BN scale 1 and offset 0, t = (1, 0.1, 0.1, 0.1).
  explicit MgnModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  std::size_t n_iter() const { return config_.n_iter; }
  const Geometry& geometry() const { return geom_; }
  const ViewSelection& selection() const { return sel_; }
  const std::shared_ptr<const FbpOperator>& fbp() const { return fbp_; }

  std::vector<ResBlockParams>& sigma_blocks() { return sigma_; }
  std::vector<ResBlockParams>& z_blocks() { return z_; }
  MergeParams& merge() { return merge_; }
  const MergeParams& merge() const { return merge_; }

  /// Every trainable tensor, in checkpoint order.
  std::vector<nn::Tensor> parameters() const;

  nn::Checkpoint to_checkpoint() const;
  /// Rebuilds a model from a checkpoint, including BN running statistics.
  static MgnModel from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  ModelConfig config_;
  Geometry geom_;
  ViewSelection sel_;
  std::shared_ptr<const FbpOperator> fbp_;
  std::vector<ResBlockParams> sigma_;
  std::vector<ResBlockParams> z_;
  MergeParams merge_;
};

/// conv+ReLU, two conv+BN+ReLU, conv+BN+ReLU, plus the input.
nn::Tensor res_block(const nn::Tensor& x, ResBlockParams& p, bool training);

/// Spectrum branch: F(W u) with real and imaginary planes stacked on the
/// batch axis through one res_block, returned as (b, views, dets, 2).
nn::Tensor res_sigma_forward(const nn::Tensor& u, ResBlockParams& p, const Geometry& geom,
                             bool training);
/// Image branch: u + res_block residual.
nn::Tensor res_z_forward(const nn::Tensor& u, ResBlockParams& p, bool training);

/// u+ = t1 u + t2 R^-1 S*(S W u - g) + t3 R^-1 (W u - Re F^-1 sigma) + t4 z.
nn::Tensor merge_forward(const nn::Tensor& u, const nn::Tensor& z, const nn::Tensor& sigma,
                         const nn::Tensor& g, const MergeParams& p, const Geometry& geom,
                         const ViewSelection& sel, const std::shared_ptr<const FbpOperator>& fbp);

struct Outputs {
  nn::Tensor u;      // reported reconstruction
  nn::Tensor z;
  nn::Tensor sigma;
};

/// g: (b, kept views, dets, 1); u0: (b, size, size, 1).
Outputs mgn_forward(const nn::Tensor& g, const nn::Tensor& u0, MgnModel& model, bool training);

/// lambda ||z - image||^2 + (1 - lambda) ||sigma - F(sino)||^2, averaged
/// over the batch.
nn::Tensor mgn_loss(const nn::Tensor& z, const nn::Tensor& sigma, const nn::Tensor& image_label,
                    const nn::Tensor& sino_label, double lambda);

/// Inputs of a batch of samples as tensors.
struct Batch {
  nn::Tensor g, u0, image, sino;
};
Batch make_batch(const std::vector<const Sample*>& samples);

/// Reconstructs each sample (inference mode, one at a time).
std::vector<Image> reconstruct(MgnModel& model, const std::vector<const Sample*>& samples);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 1;
  double lr = 0.001;
  double lambda = 0.5;
  std::uint64_t seed = 0;  // shuffling
};

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double val_psnr = 0.0;  // mean PSNR of u_N on the val split; NaN when empty
};

/// Loss went non-finite.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t epoch, std::size_t step, const std::string& what)
      : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + " step " +
                           std::to_string(step) + ": " + what),
        epoch_(epoch),
        step_(step) {}
  std::size_t epoch() const { return epoch_; }
  std::size_t step() const { return step_; }

 private:
  std::size_t epoch_;
  std::size_t step_;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::vector<double> step_losses;
};

/// Adam on the train split, reshuffled each epoch from Rng(config.seed).
/// on_epoch, if set, runs after each epoch's record is added.
TrainResult train(MgnModel& model, const Dataset& data, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace lact::mgn
