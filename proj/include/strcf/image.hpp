#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "strcf/error.hpp"

namespace strcf {

/// 8-bit interleaved raster, 1 (gray) or 3 (RGB) channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {
    if (w < 0 || h < 0 || (c != 1 && c != 3))
      throw Error(ErrorKind::DimMismatch, "image must have non-negative size and 1 or 3 channels");
  }

  bool empty() const noexcept { return width == 0 || height == 0; }

  std::uint8_t& at(int x, int y, int c = 0) noexcept {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const noexcept {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  /// 0.299 R + 0.587 G + 0.114 B, or the gray value itself.
  double luminance(int x, int y) const noexcept {
    if (channels == 1) return at(x, y);
    return 0.299 * at(x, y, 0) + 0.587 * at(x, y, 1) + 0.114 * at(x, y, 2);
  }

  friend bool operator==(const Image&, const Image&) = default;
};

}  // namespace strcf
