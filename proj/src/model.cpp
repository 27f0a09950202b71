#include "attrep/model.hpp"

#include <cmath>
#include <stdexcept>

namespace attrep {

namespace {

constexpr double kGnEps = 1e-5;

using MatMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

// 3x3, pad 1, stride 1 patch matrix for one image: (C*9) x (H*W), column
// per output pixel. Zero padding outside the border.
void im2col3x3(const Eigen::Ref<const Eigen::MatrixXd>& x, int height, int width,
               Eigen::MatrixXd& col) {
  const int channels = static_cast<int>(x.rows());
  col.setZero();
  for (int y = 0; y < height; ++y) {
    for (int xx = 0; xx < width; ++xx) {
      const int out = y * width + xx;
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = y + ky - 1;
        if (sy < 0 || sy >= height) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = xx + kx - 1;
          if (sx < 0 || sx >= width) continue;
          const int in = sy * width + sx;
          const int kidx = ky * 3 + kx;
          for (int c = 0; c < channels; ++c) col(c * 9 + kidx, out) = x(c, in);
        }
      }
    }
  }
}

void col2im3x3(const Eigen::MatrixXd& col, int height, int width,
               Eigen::Ref<Eigen::MatrixXd> dx) {
  const int channels = static_cast<int>(dx.rows());
  dx.setZero();
  for (int y = 0; y < height; ++y) {
    for (int xx = 0; xx < width; ++xx) {
      const int out = y * width + xx;
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = y + ky - 1;
        if (sy < 0 || sy >= height) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = xx + kx - 1;
          if (sx < 0 || sx >= width) continue;
          const int in = sy * width + sx;
          const int kidx = ky * 3 + kx;
          for (int c = 0; c < channels; ++c) dx(c, in) += col(c * 9 + kidx, out);
        }
      }
    }
  }
}

// 2x2 average pooling, stride 2, floor semantics on odd dims.
Eigen::MatrixXd avgpool2(const Eigen::MatrixXd& x, int batch, int height, int width) {
  const int channels = static_cast<int>(x.rows());
  const int oh = height / 2, ow = width / 2;
  Eigen::MatrixXd out(channels, static_cast<Eigen::Index>(batch) * oh * ow);
  for (int b = 0; b < batch; ++b) {
    const auto xb = x.middleCols(static_cast<Eigen::Index>(b) * height * width, height * width);
    auto ob = out.middleCols(static_cast<Eigen::Index>(b) * oh * ow, oh * ow);
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        ob.col(oy * ow + ox) =
            0.25 * (xb.col((2 * oy) * width + 2 * ox) + xb.col((2 * oy) * width + 2 * ox + 1) +
                    xb.col((2 * oy + 1) * width + 2 * ox) + xb.col((2 * oy + 1) * width + 2 * ox + 1));
      }
    }
  }
  return out;
}

Eigen::MatrixXd avgpool2_backward(const Eigen::MatrixXd& dout, int batch, int height, int width) {
  const int channels = static_cast<int>(dout.rows());
  const int oh = height / 2, ow = width / 2;
  Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(channels, static_cast<Eigen::Index>(batch) * height * width);
  for (int b = 0; b < batch; ++b) {
    const auto db = dout.middleCols(static_cast<Eigen::Index>(b) * oh * ow, oh * ow);
    auto xb = dx.middleCols(static_cast<Eigen::Index>(b) * height * width, height * width);
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const Eigen::VectorXd g = 0.25 * db.col(oy * ow + ox);
        xb.col((2 * oy) * width + 2 * ox) += g;
        xb.col((2 * oy) * width + 2 * ox + 1) += g;
        xb.col((2 * oy + 1) * width + 2 * ox) += g;
        xb.col((2 * oy + 1) * width + 2 * ox + 1) += g;
      }
    }
  }
  return dx;
}

// features(b, c) = spatial mean of channel c in image b.
Eigen::MatrixXd global_avg_pool(const Eigen::MatrixXd& x, int batch, int pixels) {
  const int channels = static_cast<int>(x.rows());
  Eigen::MatrixXd f(batch, channels);
  for (int b = 0; b < batch; ++b)
    f.row(b) = x.middleCols(static_cast<Eigen::Index>(b) * pixels, pixels).rowwise().mean().transpose();
  return f;
}

void global_avg_pool_backward(const Eigen::MatrixXd& dfeat, int pixels, Eigen::MatrixXd& dx) {
  const int batch = static_cast<int>(dfeat.rows());
  for (int b = 0; b < batch; ++b)
    dx.middleCols(static_cast<Eigen::Index>(b) * pixels, pixels).colwise() +=
        Eigen::VectorXd(dfeat.row(b).transpose() / pixels);
}

}  // namespace

void ModelSpec::validate() const {
  if (stage_widths.size() < 2)
    throw std::invalid_argument("ModelSpec: need at least two stages (aux head attaches strictly before the last)");
  if (norm_groups < 1) throw std::invalid_argument("ModelSpec: norm_groups must be >= 1");
  for (int w : stage_widths) {
    if (w <= 0) throw std::invalid_argument("ModelSpec: stage widths must be positive");
    if (w % norm_groups != 0)
      throw std::invalid_argument("ModelSpec: every stage width must be divisible by norm_groups");
  }
  if (blocks_per_stage < 1) throw std::invalid_argument("ModelSpec: blocks_per_stage must be >= 1");
  if (aux_stage < 1 || aux_stage >= num_stages())
    throw std::invalid_argument("ModelSpec: aux_stage must attach strictly before the final stage");
  if (dropout_prob < 0.0 || dropout_prob >= 1.0)
    throw std::invalid_argument("ModelSpec: dropout_prob must be in [0, 1)");
  if (num_classes < 2) throw std::invalid_argument("ModelSpec: num_classes must be >= 2");
  if (in_channels < 1) throw std::invalid_argument("ModelSpec: in_channels must be >= 1");
}

Network::Network(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  long off = 0;
  auto claim = [&](long n, bool decay, bool aux) {
    decay_mask_.insert(decay_mask_.end(), static_cast<std::size_t>(n), decay ? 1 : 0);
    aux_mask_.insert(aux_mask_.end(), static_cast<std::size_t>(n), aux ? 1 : 0);
    const long at = off;
    off += n;
    return at;
  };
  int cin = spec_.in_channels;
  layout_.resize(spec_.stage_widths.size());
  for (std::size_t s = 0; s < spec_.stage_widths.size(); ++s) {
    const int cout = spec_.stage_widths[s];
    for (int blk = 0; blk < spec_.blocks_per_stage; ++blk) {
      ConvBlockLayout l;
      l.in_channels = blk == 0 ? cin : cout;
      l.out_channels = cout;
      l.w_off = claim(static_cast<long>(cout) * l.in_channels * 9, true, false);
      l.gamma_off = claim(cout, false, false);
      l.beta_off = claim(cout, false, false);
      layout_[s].push_back(l);
    }
    cin = cout;
  }
  const int fa = spec_.aux_feature_width();
  const int f = spec_.feature_width();
  const int c = spec_.num_classes;
  aux_w_off_ = claim(static_cast<long>(c) * fa, true, true);
  aux_b_off_ = claim(c, false, true);
  head_w_off_ = claim(static_cast<long>(c) * f, true, false);
  head_b_off_ = claim(c, false, false);
  if (spec_.projector) {
    proj_w1_off_ = claim(static_cast<long>(f) * f, true, false);
    proj_b1_off_ = claim(f, false, false);
    proj_w2_off_ = claim(static_cast<long>(f) * f, true, false);
    proj_b2_off_ = claim(f, false, false);
  }
  param_count_ = off;
}

Eigen::VectorXd Network::init_params(Rng& rng) const {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(param_count_);
  for (const auto& stage : layout_) {
    for (const auto& blk : stage) {
      const long n = static_cast<long>(blk.out_channels) * blk.in_channels * 9;
      const double std = std::sqrt(2.0 / (blk.in_channels * 9));
      for (long i = 0; i < n; ++i) p[blk.w_off + i] = rng.normal(0.0, std);
      p.segment(blk.gamma_off, blk.out_channels).setOnes();
      // beta stays zero
    }
  }
  auto init_linear = [&](long w_off, long rows, long cols) {
    const double std = std::sqrt(1.0 / static_cast<double>(cols));
    for (long i = 0; i < rows * cols; ++i) p[w_off + i] = rng.normal(0.0, std);
  };
  init_linear(aux_w_off_, spec_.num_classes, spec_.aux_feature_width());
  init_linear(head_w_off_, spec_.num_classes, spec_.feature_width());
  if (spec_.projector) {
    const int f = spec_.feature_width();
    init_linear(proj_w1_off_, f, f);
    init_linear(proj_w2_off_, f, f);
  }
  return p;
}

BatchOutput Network::forward(const Eigen::VectorXd& params, const std::vector<Image>& batch,
                             bool training, Rng* rng, Tape* tape) const {
  if (params.size() != param_count_) throw std::invalid_argument("Network::forward: bad parameter vector size");
  if (batch.empty()) throw std::invalid_argument("Network::forward: empty batch");
  const int b = static_cast<int>(batch.size());
  const int h0 = batch[0].height, w0 = batch[0].width;
  if (batch[0].channels != spec_.in_channels)
    throw std::invalid_argument("Network::forward: channel count does not match the model spec");
  const int min_dim = 1 << (spec_.num_stages() - 1);
  if (h0 < min_dim || w0 < min_dim)
    throw std::invalid_argument("Network::forward: image too small for the stage count");
  for (const auto& img : batch)
    if (!img.same_shape(batch[0])) throw std::invalid_argument("Network::forward: mixed image shapes in batch");
  if (training && spec_.dropout_prob > 0.0 && rng == nullptr)
    throw std::invalid_argument("Network::forward: training-mode dropout needs an rng");

  Tape local_tape;
  Tape& t = tape ? *tape : local_tape;
  t.stages.assign(layout_.size(), {});
  t.batch = b;

  // Stack the batch: activation matrices are (channels) x (batch * pixels).
  int h = h0, w = w0;
  Eigen::MatrixXd x(spec_.in_channels, static_cast<Eigen::Index>(b) * h * w);
  for (int i = 0; i < b; ++i)
    x.middleCols(static_cast<Eigen::Index>(i) * h * w, h * w) =
        ConstMatMap(batch[static_cast<std::size_t>(i)].data.data(), h * w, spec_.in_channels).transpose();

  Eigen::MatrixXd col;
  Eigen::MatrixXd aux_features;
  for (std::size_t s = 0; s < layout_.size(); ++s) {
    if (s > 0) {
      x = avgpool2(x, b, h, w);
      h /= 2;
      w /= 2;
    }
    auto& stage_tape = t.stages[s];
    stage_tape.height = h;
    stage_tape.width = w;
    const int pixels = h * w;
    for (const auto& blk : layout_[s]) {
      Tape::Block bt;
      bt.input = std::move(x);
      const ConstMatMap wmat(params.data() + blk.w_off, blk.out_channels, blk.in_channels * 9);
      Eigen::MatrixXd y(blk.out_channels, static_cast<Eigen::Index>(b) * pixels);
      col.resize(static_cast<Eigen::Index>(blk.in_channels) * 9, pixels);
      for (int i = 0; i < b; ++i) {
        im2col3x3(bt.input.middleCols(static_cast<Eigen::Index>(i) * pixels, pixels), h, w, col);
        y.middleCols(static_cast<Eigen::Index>(i) * pixels, pixels).noalias() = wmat * col;
      }
      // Group norm + affine + ReLU.
      const int groups = spec_.norm_groups;
      const int cpg = blk.out_channels / groups;
      bt.inv_std.resize(b, groups);
      bt.xhat.resizeLike(y);
      for (int i = 0; i < b; ++i) {
        for (int g = 0; g < groups; ++g) {
          auto block = y.block(g * cpg, static_cast<Eigen::Index>(i) * pixels, cpg, pixels);
          const double mean = block.mean();
          const double var = (block.array() - mean).square().mean();
          const double inv_std = 1.0 / std::sqrt(var + kGnEps);
          bt.inv_std(i, g) = inv_std;
          bt.xhat.block(g * cpg, static_cast<Eigen::Index>(i) * pixels, cpg, pixels) =
              (block.array() - mean) * inv_std;
        }
      }
      const ConstVecMap gamma(params.data() + blk.gamma_off, blk.out_channels);
      const ConstVecMap beta(params.data() + blk.beta_off, blk.out_channels);
      bt.output = ((bt.xhat.array().colwise() * gamma.array()).colwise() + beta.array()).cwiseMax(0.0);
      x = bt.output;
      stage_tape.blocks.push_back(std::move(bt));
    }
    if (static_cast<int>(s) == spec_.aux_stage - 1) aux_features = global_avg_pool(x, b, pixels);
  }

  t.features = global_avg_pool(x, b, h * w);
  t.aux_features = aux_features;

  Eigen::MatrixXd dropped = t.features;
  if (training && spec_.dropout_prob > 0.0) {
    const double keep = 1.0 - spec_.dropout_prob;
    t.dropout_mask.resize(t.features.rows(), t.features.cols());
    for (Eigen::Index r = 0; r < t.dropout_mask.rows(); ++r)
      for (Eigen::Index c = 0; c < t.dropout_mask.cols(); ++c)
        t.dropout_mask(r, c) = rng->uniform() < spec_.dropout_prob ? 0.0 : 1.0 / keep;
    dropped = dropped.cwiseProduct(t.dropout_mask);
  }

  BatchOutput out;
  const ConstMatMap head_w(params.data() + head_w_off_, spec_.num_classes, spec_.feature_width());
  const ConstVecMap head_b(params.data() + head_b_off_, spec_.num_classes);
  out.logits = (dropped * head_w.transpose()).rowwise() + head_b.transpose();
  const ConstMatMap aux_w(params.data() + aux_w_off_, spec_.num_classes, spec_.aux_feature_width());
  const ConstVecMap aux_b(params.data() + aux_b_off_, spec_.num_classes);
  out.aux_logits = (aux_features * aux_w.transpose()).rowwise() + aux_b.transpose();
  out.features = t.features;
  if (spec_.projector) {
    const int f = spec_.feature_width();
    const ConstMatMap w1(params.data() + proj_w1_off_, f, f);
    const ConstVecMap b1(params.data() + proj_b1_off_, f);
    const ConstMatMap w2(params.data() + proj_w2_off_, f, f);
    const ConstVecMap b2(params.data() + proj_b2_off_, f);
    t.proj_hidden = (((t.features * w1.transpose()).rowwise() + b1.transpose())).cwiseMax(0.0);
    out.proj = (t.proj_hidden * w2.transpose()).rowwise() + b2.transpose();
  }
  if (!out.logits.allFinite() || !out.aux_logits.allFinite())
    throw std::runtime_error("Network::forward: non-finite logits");
  return out;
}

void Network::backward(const Eigen::VectorXd& params, const Tape& tape,
                       const Eigen::MatrixXd& dlogits, const Eigen::MatrixXd& daux_logits,
                       const Eigen::MatrixXd& dproj, Eigen::VectorXd& grad) const {
  if (grad.size() != param_count_) throw std::invalid_argument("Network::backward: bad gradient vector size");
  const int b = tape.batch;
  const int f = spec_.feature_width();
  const int fa = spec_.aux_feature_width();
  const int c = spec_.num_classes;

  Eigen::MatrixXd dfeatures = Eigen::MatrixXd::Zero(b, f);

  if (dlogits.size() > 0) {
    Eigen::MatrixXd dropped = tape.features;
    if (tape.dropout_mask.size() > 0) dropped = dropped.cwiseProduct(tape.dropout_mask);
    MatMap dw(grad.data() + head_w_off_, c, f);
    VecMap db(grad.data() + head_b_off_, c);
    dw.noalias() += dlogits.transpose() * dropped;
    db += dlogits.colwise().sum().transpose();
    const ConstMatMap head_w(params.data() + head_w_off_, c, f);
    Eigen::MatrixXd ddropped = dlogits * head_w;
    if (tape.dropout_mask.size() > 0) ddropped = ddropped.cwiseProduct(tape.dropout_mask);
    dfeatures += ddropped;
  }

  if (spec_.projector && dproj.size() > 0) {
    const ConstMatMap w1(params.data() + proj_w1_off_, f, f);
    const ConstMatMap w2(params.data() + proj_w2_off_, f, f);
    MatMap dw2(grad.data() + proj_w2_off_, f, f);
    VecMap db2(grad.data() + proj_b2_off_, f);
    dw2.noalias() += dproj.transpose() * tape.proj_hidden;
    db2 += dproj.colwise().sum().transpose();
    Eigen::MatrixXd dhidden = dproj * w2;
    dhidden = dhidden.cwiseProduct((tape.proj_hidden.array() > 0.0).cast<double>().matrix());
    MatMap dw1(grad.data() + proj_w1_off_, f, f);
    VecMap db1(grad.data() + proj_b1_off_, f);
    dw1.noalias() += dhidden.transpose() * tape.features;
    db1 += dhidden.colwise().sum().transpose();
    dfeatures += dhidden * w1;
  }

  Eigen::MatrixXd daux_features = Eigen::MatrixXd::Zero(b, fa);
  if (daux_logits.size() > 0) {
    MatMap dw(grad.data() + aux_w_off_, c, fa);
    VecMap db(grad.data() + aux_b_off_, c);
    dw.noalias() += daux_logits.transpose() * tape.aux_features;
    db += daux_logits.colwise().sum().transpose();
    const ConstMatMap aux_w(params.data() + aux_w_off_, c, fa);
    daux_features = daux_logits * aux_w;
  }

  // Gradient flowing into the output of the last stage.
  const auto& last_stage = tape.stages.back();
  Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(
      f, static_cast<Eigen::Index>(b) * last_stage.height * last_stage.width);
  global_avg_pool_backward(dfeatures, last_stage.height * last_stage.width, dx);

  Eigen::MatrixXd col;
  for (int s = static_cast<int>(layout_.size()) - 1; s >= 0; --s) {
    const auto& stage_tape = tape.stages[static_cast<std::size_t>(s)];
    const int h = stage_tape.height, w = stage_tape.width;
    const int pixels = h * w;
    for (int blk_i = static_cast<int>(layout_[static_cast<std::size_t>(s)].size()) - 1; blk_i >= 0; --blk_i) {
      const auto& blk = layout_[static_cast<std::size_t>(s)][static_cast<std::size_t>(blk_i)];
      const auto& bt = stage_tape.blocks[static_cast<std::size_t>(blk_i)];
      // ReLU
      Eigen::MatrixXd dz = dx.cwiseProduct((bt.output.array() > 0.0).cast<double>().matrix());
      // Affine part of group norm
      const ConstVecMap gamma(params.data() + blk.gamma_off, blk.out_channels);
      VecMap dgamma(grad.data() + blk.gamma_off, blk.out_channels);
      VecMap dbeta(grad.data() + blk.beta_off, blk.out_channels);
      dgamma += dz.cwiseProduct(bt.xhat).rowwise().sum();
      dbeta += dz.rowwise().sum();
      Eigen::MatrixXd dxhat = dz.array().colwise() * gamma.array();
      // Normalization part
      const int groups = spec_.norm_groups;
      const int cpg = blk.out_channels / groups;
      Eigen::MatrixXd dy(blk.out_channels, static_cast<Eigen::Index>(b) * pixels);
      for (int i = 0; i < b; ++i) {
        for (int g = 0; g < groups; ++g) {
          const auto dxh = dxhat.block(g * cpg, static_cast<Eigen::Index>(i) * pixels, cpg, pixels);
          const auto xh = bt.xhat.block(g * cpg, static_cast<Eigen::Index>(i) * pixels, cpg, pixels);
          const double mean_dxh = dxh.mean();
          const double mean_dxh_xh = dxh.cwiseProduct(xh).mean();
          dy.block(g * cpg, static_cast<Eigen::Index>(i) * pixels, cpg, pixels) =
              bt.inv_std(i, g) * (dxh.array() - mean_dxh - xh.array() * mean_dxh_xh);
        }
      }
      // Conv
      const ConstMatMap wmat(params.data() + blk.w_off, blk.out_channels, blk.in_channels * 9);
      MatMap dwmat(grad.data() + blk.w_off, blk.out_channels, blk.in_channels * 9);
      const bool need_dx = !(s == 0 && blk_i == 0);
      Eigen::MatrixXd dinput;
      if (need_dx) dinput.resize(blk.in_channels, static_cast<Eigen::Index>(b) * pixels);
      col.resize(static_cast<Eigen::Index>(blk.in_channels) * 9, pixels);
      for (int i = 0; i < b; ++i) {
        const auto dyb = dy.middleCols(static_cast<Eigen::Index>(i) * pixels, pixels);
        im2col3x3(bt.input.middleCols(static_cast<Eigen::Index>(i) * pixels, pixels), h, w, col);
        dwmat.noalias() += dyb * col.transpose();
        if (need_dx) {
          const Eigen::MatrixXd dcol = wmat.transpose() * dyb;
          col2im3x3(dcol, h, w, dinput.middleCols(static_cast<Eigen::Index>(i) * pixels, pixels));
        }
      }
      dx = std::move(dinput);
    }
    if (s > 0) {
      const auto& prev = tape.stages[static_cast<std::size_t>(s - 1)];
      dx = avgpool2_backward(dx, b, prev.height, prev.width);
      if (s - 1 == spec_.aux_stage - 1 && daux_logits.size() > 0)
        global_avg_pool_backward(daux_features, prev.height * prev.width, dx);
    }
  }
}

ModelOutput Network::forward_single(const Eigen::VectorXd& params, const Image& image) const {
  const BatchOutput out = forward(params, {image}, /*training=*/false);
  ModelOutput o;
  o.logits = out.logits.row(0).transpose();
  o.aux_logits = out.aux_logits.row(0).transpose();
  o.features = out.features.row(0).transpose();
  return o;
}

Vec aux_fusion(const Vec& final_probs, const Vec& aux_probs, double fusion_weight) {
  if (fusion_weight < 0.0 || fusion_weight > 1.0)
    throw std::invalid_argument("aux_fusion: fusion_weight must be in [0, 1]");
  if (final_probs.size() != aux_probs.size())
    throw std::invalid_argument("aux_fusion: length mismatch");
  return (1.0 - fusion_weight) * final_probs + fusion_weight * aux_probs;
}

Vec tencrop_predict(const Network& net, const Eigen::VectorXd& params, const Image& image,
                    int crop_size, double fusion_weight) {
  if (crop_size <= 0 || image.height < crop_size || image.width < crop_size)
    throw std::invalid_argument("tencrop_predict: image smaller than the crop size");
  const int ch = image.channels;
  const int oy[5] = {0, 0, image.height - crop_size, image.height - crop_size,
                     (image.height - crop_size) / 2};
  const int ox[5] = {0, image.width - crop_size, 0, image.width - crop_size,
                     (image.width - crop_size) / 2};
  std::vector<Image> views;
  views.reserve(10);
  for (int v = 0; v < 5; ++v) {
    Image crop(ch, crop_size, crop_size);
    for (int c = 0; c < ch; ++c)
      for (int y = 0; y < crop_size; ++y)
        for (int x = 0; x < crop_size; ++x) crop.at(c, y, x) = image.at(c, oy[v] + y, ox[v] + x);
    Image flipped(ch, crop_size, crop_size);
    for (int c = 0; c < ch; ++c)
      for (int y = 0; y < crop_size; ++y)
        for (int x = 0; x < crop_size; ++x) flipped.at(c, y, x) = crop.at(c, y, crop_size - 1 - x);
    views.push_back(std::move(crop));
    views.push_back(std::move(flipped));
  }
  const BatchOutput out = net.forward(params, views, /*training=*/false);
  Vec mean = Vec::Zero(net.spec().num_classes);
  for (int v = 0; v < 10; ++v) {
    const Vec fused = aux_fusion(softmax(out.logits.row(v).transpose()),
                                 softmax(out.aux_logits.row(v).transpose()), fusion_weight);
    mean += fused;
  }
  return mean / 10.0;
}

}  // namespace attrep
