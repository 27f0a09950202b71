#include <doctest.h>

#include "attrep/gradcheck.hpp"
#include "attrep/model.hpp"

using namespace attrep;

namespace {

ModelSpec tiny_spec() {
  ModelSpec spec;
  spec.stage_widths = {8, 8};
  spec.blocks_per_stage = 1;
  spec.aux_stage = 1;
  spec.dropout_prob = 0.0;
  spec.num_classes = 3;
  spec.in_channels = 3;
  spec.norm_groups = 4;
  return spec;
}

Image random_image(Rng& rng, int c, int h, int w) {
  Image img(c, h, w);
  for (Eigen::Index i = 0; i < img.data.size(); ++i) img.data[i] = rng.normal(0.0, 1.0);
  return img;
}

}  // namespace

TEST_CASE("ModelSpec: validation") {
  ModelSpec spec = tiny_spec();
  CHECK_NOTHROW(spec.validate());
  spec.aux_stage = 2;  // must be strictly before the final stage
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = tiny_spec();
  spec.stage_widths = {6, 8};  // 6 % 4 != 0
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = tiny_spec();
  spec.dropout_prob = 1.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("forward: output shapes and eval-mode determinism") {
  const Network net(tiny_spec());
  Rng rng(3);
  const Eigen::VectorXd params = net.init_params(rng);
  const Image img = random_image(rng, 3, 4, 4);
  const ModelOutput a = net.forward_single(params, img);
  const ModelOutput b = net.forward_single(params, img);
  CHECK(a.logits.size() == 3);
  CHECK(a.aux_logits.size() == 3);
  CHECK(a.features.size() == 8);
  CHECK((a.logits - b.logits).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.aux_logits - b.aux_logits).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward: dropout only acts in training mode") {
  ModelSpec spec = tiny_spec();
  spec.dropout_prob = 0.5;
  const Network net(spec);
  Rng rng(5);
  const Eigen::VectorXd params = net.init_params(rng);
  const std::vector<Image> batch{random_image(rng, 3, 4, 4)};
  Rng d1(1), d2(2);
  const BatchOutput t1 = net.forward(params, batch, true, &d1);
  const BatchOutput t2 = net.forward(params, batch, true, &d2);
  CHECK((t1.logits - t2.logits).cwiseAbs().maxCoeff() > 0.0);  // different masks
  const BatchOutput e1 = net.forward(params, batch, false);
  const BatchOutput e2 = net.forward(params, batch, false);
  CHECK((e1.logits - e2.logits).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(net.forward(params, batch, true, nullptr), std::invalid_argument);
}

TEST_CASE("forward: input validation") {
  const Network net(tiny_spec());
  Rng rng(7);
  const Eigen::VectorXd params = net.init_params(rng);
  CHECK_THROWS_AS(net.forward(params, {}, false), std::invalid_argument);
  CHECK_THROWS_AS(net.forward(params, {Image(1, 4, 4)}, false), std::invalid_argument);
  CHECK_THROWS_AS(net.forward(params, {Image(3, 1, 1)}, false), std::invalid_argument);
  CHECK_THROWS_AS(net.forward(params, {Image(3, 4, 4), Image(3, 8, 8)}, false),
                  std::invalid_argument);
}

TEST_CASE("default desk-scale spec stays under 2M parameters") {
  const Network net(ModelSpec{});
  CHECK(net.param_count() < 2'000'000);
  CHECK(net.param_count() > 100'000);
}

TEST_CASE("aux_fusion: endpoints and convex combination") {
  Vec final_p(2), aux_p(2);
  final_p << 0.8, 0.2;
  aux_p << 0.4, 0.6;
  CHECK((aux_fusion(final_p, aux_p, 0.0) - final_p).cwiseAbs().maxCoeff() == 0.0);
  CHECK((aux_fusion(final_p, aux_p, 1.0) - aux_p).cwiseAbs().maxCoeff() == 0.0);
  const Vec mixed = aux_fusion(final_p, aux_p, 0.3);
  CHECK(mixed[0] == doctest::Approx(0.68).epsilon(1e-15));
  CHECK(mixed[1] == doctest::Approx(0.32).epsilon(1e-15));
  CHECK(is_simplex(mixed, 1e-12));
  CHECK_THROWS_AS(aux_fusion(final_p, aux_p, 1.2), std::invalid_argument);
}

TEST_CASE("aux_fusion: argmax stability at the endpoints") {
  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    const Vec f = softmax(Vec::NullaryExpr(6, [&](Eigen::Index) { return rng.normal(0.0, 2.0); }));
    const Vec a = softmax(Vec::NullaryExpr(6, [&](Eigen::Index) { return rng.normal(0.0, 2.0); }));
    Eigen::Index fi, ai, w0i, w1i;
    f.maxCoeff(&fi);
    a.maxCoeff(&ai);
    aux_fusion(f, a, 0.0).maxCoeff(&w0i);
    aux_fusion(f, a, 1.0).maxCoeff(&w1i);
    CHECK(w0i == fi);
    CHECK(w1i == ai);
  }
}

TEST_CASE("tencrop_predict: constant image equals the single-crop prediction") {
  ModelSpec spec = tiny_spec();
  const Network net(spec);
  Rng rng(13);
  const Eigen::VectorXd params = net.init_params(rng);
  Image img(3, 6, 6);
  img.data.setConstant(0.37);
  const Vec ten = tencrop_predict(net, params, img, 4, 0.3);
  Image crop(3, 4, 4);
  crop.data.setConstant(0.37);
  const ModelOutput single = net.forward_single(params, crop);
  const Vec fused = aux_fusion(softmax(single.logits), softmax(single.aux_logits), 0.3);
  CHECK((ten - fused).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(is_simplex(ten, 1e-9));
}

TEST_CASE("tencrop_predict: matches an explicit loop over the ten crops") {
  const Network net(tiny_spec());
  Rng rng(17);
  const Eigen::VectorXd params = net.init_params(rng);
  const Image img = random_image(rng, 3, 8, 8);
  const int crop = 6;
  const Vec fast = tencrop_predict(net, params, img, crop, 0.3);

  const int oy[5] = {0, 0, 2, 2, 1};
  const int ox[5] = {0, 2, 0, 2, 1};
  Vec mean = Vec::Zero(3);
  for (int v = 0; v < 5; ++v) {
    Image c(3, crop, crop);
    for (int ch = 0; ch < 3; ++ch)
      for (int y = 0; y < crop; ++y)
        for (int x = 0; x < crop; ++x) c.at(ch, y, x) = img.at(ch, oy[v] + y, ox[v] + x);
    Image flipped(3, crop, crop);
    for (int ch = 0; ch < 3; ++ch)
      for (int y = 0; y < crop; ++y)
        for (int x = 0; x < crop; ++x) flipped.at(ch, y, x) = c.at(ch, y, crop - 1 - x);
    for (const Image& view : {c, flipped}) {
      const ModelOutput o = net.forward_single(params, view);
      mean += aux_fusion(softmax(o.logits), softmax(o.aux_logits), 0.3);
    }
  }
  mean /= 10.0;
  CHECK((fast - mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(tencrop_predict(net, params, Image(3, 4, 4), 6, 0.3), std::invalid_argument);
}

TEST_CASE("backward: zero aux upstream leaves aux-exclusive parameters untouched") {
  const Network net(tiny_spec());
  Rng rng(19);
  const Eigen::VectorXd params = net.init_params(rng);
  std::vector<Image> batch;
  for (int i = 0; i < 3; ++i) batch.push_back(random_image(rng, 3, 4, 4));
  Network::Tape tape;
  const BatchOutput out = net.forward(params, batch, false, nullptr, &tape);
  Eigen::MatrixXd dlogits = Eigen::MatrixXd::Random(3, 3);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
  net.backward(params, tape, dlogits, Eigen::MatrixXd(), Eigen::MatrixXd(), grad);
  const auto& aux_mask = net.aux_mask();
  double aux_grad = 0.0, other_grad = 0.0;
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    if (aux_mask[static_cast<std::size_t>(i)])
      aux_grad += std::abs(grad[i]);
    else
      other_grad += std::abs(grad[i]);
  }
  CHECK(aux_grad == 0.0);
  CHECK(other_grad > 0.0);
}

TEST_CASE("end-to-end gradient on the tiny model matches finite differences") {
  const GradCheckReport report = check_end_to_end_gradient(3, 1e-3, 301);
  CHECK(report.failures == 0);
  CHECK(report.cases == 3);
}

TEST_CASE("projector: enabled spec produces projections and gradients flow") {
  ModelSpec spec = tiny_spec();
  spec.projector = true;
  const Network net(spec);
  Rng rng(23);
  const Eigen::VectorXd params = net.init_params(rng);
  std::vector<Image> batch{random_image(rng, 3, 4, 4), random_image(rng, 3, 4, 4)};
  Network::Tape tape;
  const BatchOutput out = net.forward(params, batch, false, nullptr, &tape);
  CHECK(out.proj.rows() == 2);
  CHECK(out.proj.cols() == 8);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
  Eigen::MatrixXd dproj = Eigen::MatrixXd::Ones(2, 8);
  net.backward(params, tape, Eigen::MatrixXd(), Eigen::MatrixXd(), dproj, grad);
  CHECK(grad.cwiseAbs().maxCoeff() > 0.0);
}
