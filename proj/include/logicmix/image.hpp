#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include "logicmix/errors.hpp"

namespace logicmix {

/// Dense H x W x Ch intensity image, row-major flattened, every value in
/// [0, 1]. Storage is float32 to match the LMT1 container; arithmetic on
/// tensors accumulates in double (see weighted_mean).
class ImageTensor {
 public:
  ImageTensor() : height_(0), width_(0), channels_(0) {}

  ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
              Eigen::ArrayXf data)
      : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    if (static_cast<std::size_t>(data_.size()) != height_ * width_ * channels_)
      throw DimensionError("ImageTensor: data length " + std::to_string(data_.size()) +
                           " != h*w*ch = " + std::to_string(height_ * width_ * channels_));
    if (data_.size() > 0 && (data_.minCoeff() < 0.0f || data_.maxCoeff() > 1.0f))
      throw ContractViolation("ImageTensor: intensity outside [0, 1]");
  }

  static ImageTensor constant(std::size_t h, std::size_t w, std::size_t ch, float value) {
    return ImageTensor(h, w, ch, Eigen::ArrayXf::Constant(static_cast<Eigen::Index>(h * w * ch), value));
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return static_cast<std::size_t>(data_.size()); }

  const Eigen::ArrayXf& data() const { return data_; }

  float at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[static_cast<Eigen::Index>((y * width_ + x) * channels_ + c)];
  }

  bool same_shape(const ImageTensor& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  bool operator==(const ImageTensor& other) const {
    return same_shape(other) && (data_ == other.data_).all();
  }

 private:
  std::size_t height_, width_, channels_;
  Eigen::ArrayXf data_;
};

// LMT1 tensor container: magic "LMT1", little-endian u32 height, width,
// channels, then height*width*channels little-endian float32. Bit-exact.
void write_lmt1(const ImageTensor& tensor, const std::filesystem::path& path);
ImageTensor read_lmt1(const std::filesystem::path& path);

}  // namespace logicmix
