#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace attrep {

// Dense CHW image, double precision.
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  Eigen::VectorXd data;

  Image() = default;
  Image(int c, int h, int w)
      : channels(c), height(h), width(w), data(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c) * h * w)) {
    if (c <= 0 || h <= 0 || w <= 0) throw std::invalid_argument("Image: non-positive dimension");
  }

  double& at(int c, int y, int x) { return data[(static_cast<Eigen::Index>(c) * height + y) * width + x]; }
  double at(int c, int y, int x) const { return data[(static_cast<Eigen::Index>(c) * height + y) * width + x]; }

  Eigen::Index size() const { return data.size(); }
  bool same_shape(const Image& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

}  // namespace attrep
