#pragma once

#include <array>
#include <vector>

#include "attrep/image.hpp"
#include "attrep/losses.hpp"
#include "attrep/rng.hpp"

namespace attrep {

// Fixed stochastic augmentation policy: horizontal flip, zero-pad + crop back
// to the original size, per-channel normalization, random erasing (square
// patch, zero fill in normalized space).
struct AugPolicy {
  double flip_prob = 0.5;
  int crop_padding = 4;
  double erase_prob = 0.25;
  double erase_area_lo = 0.02;
  double erase_area_hi = 0.2;
  std::array<double, 3> norm_mean{0.4914, 0.4822, 0.4465};
  std::array<double, 3> norm_std{0.2470, 0.2435, 0.2616};

  void validate() const;
};

// One stochastic view of an image (input in [0,1], output normalized).
// Deterministic given the rng state.
Image sample_view(const Image& image, Rng& rng, const AugPolicy& policy);

// How a batch's labels were mixed; enough to replay the label arithmetic.
struct MixRecord {
  enum class Kind { none, mixup, cutmix };
  Kind kind = Kind::none;
  double lambda = 1.0;      // drawn coefficient
  double lambda_eff = 1.0;  // label weight actually applied (cutmix: realized area ratio)
  std::vector<int> perm;
  int box_y0 = 0, box_x0 = 0, box_h = 0, box_w = 0;
};

// image_i <- lambda*image_i + (1-lambda)*image_perm(i), labels alike.
void mixup_batch(std::vector<Image>& images, std::vector<Vec>& labels, double lambda,
                 const std::vector<int>& perm);

// Replaces the box region of image_i with image_perm(i)'s; labels weighted by
// the realized pixel-area ratio lambda_eff = 1 - box_area/image_area.
// Returns lambda_eff.
double cutmix_batch(std::vector<Image>& images, std::vector<Vec>& labels, int box_y0, int box_x0,
                    int box_h, int box_w, const std::vector<int>& perm);

// Standard CutMix box: side lengths scaled by sqrt(1 - lambda), center
// uniform, clamped to the image borders.
MixRecord draw_cutmix_box(int height, int width, double lambda, Rng& rng);

// Two augmented views per sample sharing one soft label.
struct TwoViewBatch {
  std::vector<Image> views_a;
  std::vector<Image> views_b;
  std::vector<Vec> mixed_labels;
  MixRecord mix;
  int size() const { return static_cast<int>(views_a.size()); }
};

struct TwoViewConfig {
  AugPolicy policy;
  double epsilon_smooth = 0.1;
  int num_classes = 10;
  double mix_prob = 0.5;     // probability that any mixing happens at all
  double mixup_alpha = 0.5;  // Beta(alpha, alpha) for mixup
  double cutmix_alpha = 1.0; // Beta(alpha, alpha) for cutmix
};

// Algorithm: two independent views per image, label smoothing, then with
// probability mix_prob one of {mixup, cutmix} (picked uniformly) applied with
// the SAME lambda/permutation/box to both view sets, so the two views of each
// sample always carry one identical soft label.
TwoViewBatch make_two_view_batch(const std::vector<std::pair<Image, int>>& samples, Rng& rng,
                                 const TwoViewConfig& config);

}  // namespace attrep
