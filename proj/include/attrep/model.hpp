#pragma once

#include <Eigen/Dense>
#include <vector>

#include "attrep/image.hpp"
#include "attrep/losses.hpp"
#include "attrep/rng.hpp"

namespace attrep {

// Plain convolutional classifier: per stage, blocks of 3x3 conv (pad 1, no
// bias) + group norm + ReLU; 2x2 average pooling between stages; global
// average pooling, dropout and a linear head at the end. An auxiliary head
// (GAP + linear) taps the output of stage `aux_stage`. An optional two-layer
// MLP projector on the penultimate features backs the feature-space
// contrastive mode.
struct ModelSpec {
  std::vector<int> stage_widths{64, 128, 256};
  int blocks_per_stage = 2;
  int aux_stage = 2;  // 1-based; aux head attaches after this stage, strictly before the last
  double dropout_prob = 0.3;
  int num_classes = 10;
  int in_channels = 3;
  int norm_groups = 8;
  bool projector = false;

  int num_stages() const { return static_cast<int>(stage_widths.size()); }
  int feature_width() const { return stage_widths.back(); }
  int aux_feature_width() const { return stage_widths[static_cast<std::size_t>(aux_stage - 1)]; }
  void validate() const;
};

// Per-image outputs of the model.
struct ModelOutput {
  Vec logits;
  Vec aux_logits;
  Vec features;
};

// Batch outputs, one row per image.
struct BatchOutput {
  Eigen::MatrixXd logits;
  Eigen::MatrixXd aux_logits;
  Eigen::MatrixXd features;
  Eigen::MatrixXd proj;  // empty unless spec.projector
  int size() const { return static_cast<int>(logits.rows()); }
};

class Network {
 public:
  explicit Network(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  long param_count() const { return param_count_; }
  // Weight-decay eligibility per parameter (conv/linear weights only).
  const std::vector<char>& decay_mask() const { return decay_mask_; }
  // Parameters exclusive to the auxiliary head.
  const std::vector<char>& aux_mask() const { return aux_mask_; }

  Eigen::VectorXd init_params(Rng& rng) const;

  // Activation cache produced by a training-mode forward and consumed by
  // backward. Layout mirrors the stage/block structure.
  struct Tape {
    struct Block {
      Eigen::MatrixXd input;    // C_in x B*H*W
      Eigen::MatrixXd xhat;     // normalized conv output
      Eigen::MatrixXd inv_std;  // B x groups
      Eigen::MatrixXd output;   // post-ReLU
    };
    struct Stage {
      std::vector<Block> blocks;
      int height = 0, width = 0;
    };
    std::vector<Stage> stages;
    Eigen::MatrixXd features;      // B x F (post GAP, pre dropout)
    Eigen::MatrixXd dropout_mask;  // B x F; empty in eval mode
    Eigen::MatrixXd aux_features;  // B x F_aux
    Eigen::MatrixXd proj_hidden;   // B x F (post ReLU) when projector enabled
    int batch = 0;
  };

  // Forward pass over a batch. Dropout is applied only when training is true
  // (rng required then); eval-mode forwards are deterministic. tape may be
  // null when no backward pass will follow.
  BatchOutput forward(const Eigen::VectorXd& params, const std::vector<Image>& batch, bool training,
                      Rng* rng = nullptr, Tape* tape = nullptr) const;

  // Accumulates d(loss)/d(params) into grad, given upstream gradients on the
  // heads. Any of the gradient matrices may be empty (treated as zero).
  void backward(const Eigen::VectorXd& params, const Tape& tape, const Eigen::MatrixXd& dlogits,
                const Eigen::MatrixXd& daux_logits, const Eigen::MatrixXd& dproj,
                Eigen::VectorXd& grad) const;

  ModelOutput forward_single(const Eigen::VectorXd& params, const Image& image) const;

 private:
  struct ConvBlockLayout {
    int in_channels, out_channels;
    long w_off, gamma_off, beta_off;
  };
  ModelSpec spec_;
  std::vector<std::vector<ConvBlockLayout>> layout_;  // [stage][block]
  long aux_w_off_ = 0, aux_b_off_ = 0;
  long head_w_off_ = 0, head_b_off_ = 0;
  long proj_w1_off_ = 0, proj_b1_off_ = 0, proj_w2_off_ = 0, proj_b2_off_ = 0;
  long param_count_ = 0;
  std::vector<char> decay_mask_, aux_mask_;
};

// (1 - w) * final_probs + w * aux_probs. Both inputs on the simplex.
Vec aux_fusion(const Vec& final_probs, const Vec& aux_probs, double fusion_weight);

// Average of fused predictions over the 4 corner crops + center crop and
// their horizontal flips. fusion_weight 0 disables the aux head.
Vec tencrop_predict(const Network& net, const Eigen::VectorXd& params, const Image& image,
                    int crop_size, double fusion_weight);

}  // namespace attrep
