#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace planegrasp {

/// 8-bit single-channel image, row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return pixels_[index(x, y)]; }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  const std::vector<std::uint8_t>& pixels() const { return pixels_; }
  std::vector<std::uint8_t>& pixels() { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB image, row-major, interleaved.
class ColorImage {
 public:
  ColorImage() = default;
  ColorImage(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  const Rgb& at(int x, int y) const { return pixels_[index(x, y)]; }
  Rgb& at(int x, int y) { return pixels_[index(x, y)]; }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  const std::vector<Rgb>& pixels() const { return pixels_; }

  friend bool operator==(const ColorImage&, const ColorImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> pixels_;
};

/// round(0.299 R + 0.587 G + 0.114 B), evaluated in integer arithmetic.
std::uint8_t luma(const Rgb& c);
GrayImage to_gray(const ColorImage& image);
ColorImage to_color(const GrayImage& image);

// Netpbm I/O. Throws IoError when a file cannot be opened and InvalidInput
// when its contents are malformed.

/// P5 with maxval 255.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// P6 with maxval 255.
ColorImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const ColorImage& image);

/// Reads either P5 or P6 and returns a color image (gray replicated).
ColorImage read_any_image(const std::filesystem::path& path);

/// 16-bit P5 (maxval 65535, big-endian samples). Returns width, height and
/// raw samples.
struct Image16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> samples;
};
Image16 read_pgm16(const std::filesystem::path& path);
void write_pgm16(const std::filesystem::path& path, const Image16& image);

}  // namespace planegrasp
