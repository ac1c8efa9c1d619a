#include "planegrasp/image.hpp"

#include <cctype>
#include <fstream>
#include <string>

#include "planegrasp/error.hpp"

namespace planegrasp {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw InvalidInput("image dimensions must be positive");
  }
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) {
    throw InvalidInput("image dimensions must be positive");
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * height) {
    throw InvalidInput("pixel count does not match image dimensions");
  }
}

ColorImage::ColorImage(int width, int height, Rgb fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw InvalidInput("image dimensions must be positive");
  }
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

std::uint8_t luma(const Rgb& c) {
  // Weights scaled by 1000; +500 rounds half up.
  const int v = 299 * c.r + 587 * c.g + 114 * c.b;
  return static_cast<std::uint8_t>((v + 500) / 1000);
}

GrayImage to_gray(const ColorImage& image) {
  std::vector<std::uint8_t> out;
  out.reserve(image.pixels().size());
  for (const Rgb& c : image.pixels()) out.push_back(luma(c));
  return GrayImage(image.width(), image.height(), std::move(out));
}

ColorImage to_color(const GrayImage& image) {
  ColorImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const std::uint8_t v = image.at(x, y);
      out.at(x, y) = {v, v, v};
    }
  }
  return out;
}

namespace {

struct NetpbmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
};

int read_header_int(std::istream& is, const std::filesystem::path& path) {
  // Skip whitespace and '#' comments.
  for (;;) {
    const int c = is.peek();
    if (c == EOF) break;
    if (std::isspace(c)) {
      is.get();
    } else if (c == '#') {
      std::string line;
      std::getline(is, line);
    } else {
      break;
    }
  }
  int v = 0;
  if (!(is >> v) || v <= 0) {
    throw InvalidInput("malformed netpbm header in " + path.string());
  }
  return v;
}

NetpbmHeader read_header(std::istream& is, const std::filesystem::path& path) {
  NetpbmHeader h;
  char m[2] = {0, 0};
  if (!is.read(m, 2)) {
    throw InvalidInput("empty or truncated image file " + path.string());
  }
  h.magic.assign(m, 2);
  h.width = read_header_int(is, path);
  h.height = read_header_int(is, path);
  h.maxval = read_header_int(is, path);
  // Exactly one whitespace byte separates the header from raster data.
  if (!std::isspace(is.get())) {
    throw InvalidInput("malformed netpbm header in " + path.string());
  }
  return h;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return is;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  return os;
}

std::vector<std::uint8_t> read_raster(std::istream& is, std::size_t n,
                                      const std::filesystem::path& path) {
  std::vector<std::uint8_t> data(n);
  if (!is.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(n))) {
    throw InvalidInput("truncated raster in " + path.string());
  }
  return data;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  auto is = open_in(path);
  const NetpbmHeader h = read_header(is, path);
  if (h.magic != "P5" || h.maxval != 255) {
    throw InvalidInput(path.string() + ": expected 8-bit P5 image");
  }
  auto data =
      read_raster(is, static_cast<std::size_t>(h.width) * h.height, path);
  return GrayImage(h.width, h.height, std::move(data));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  auto os = open_out(path);
  os << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  os.write(reinterpret_cast<const char*>(image.pixels().data()),
           static_cast<std::streamsize>(image.pixels().size()));
  if (!os) throw IoError("failed writing " + path.string());
}

ColorImage read_ppm(const std::filesystem::path& path) {
  auto is = open_in(path);
  const NetpbmHeader h = read_header(is, path);
  if (h.magic != "P6" || h.maxval != 255) {
    throw InvalidInput(path.string() + ": expected 8-bit P6 image");
  }
  const auto data =
      read_raster(is, static_cast<std::size_t>(h.width) * h.height * 3, path);
  ColorImage out(h.width, h.height);
  std::size_t k = 0;
  for (int y = 0; y < h.height; ++y) {
    for (int x = 0; x < h.width; ++x, k += 3) {
      out.at(x, y) = {data[k], data[k + 1], data[k + 2]};
    }
  }
  return out;
}

void write_ppm(const std::filesystem::path& path, const ColorImage& image) {
  auto os = open_out(path);
  os << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  static_assert(sizeof(Rgb) == 3);
  os.write(reinterpret_cast<const char*>(image.pixels().data()),
           static_cast<std::streamsize>(image.pixels().size() * 3));
  if (!os) throw IoError("failed writing " + path.string());
}

ColorImage read_any_image(const std::filesystem::path& path) {
  std::string magic;
  {
    auto is = open_in(path);
    char m[2] = {0, 0};
    if (!is.read(m, 2)) {
      throw InvalidInput("empty or truncated image file " + path.string());
    }
    magic.assign(m, 2);
  }
  if (magic == "P6") return read_ppm(path);
  if (magic == "P5") return to_color(read_pgm(path));
  throw InvalidInput(path.string() + ": unsupported image format");
}

Image16 read_pgm16(const std::filesystem::path& path) {
  auto is = open_in(path);
  const NetpbmHeader h = read_header(is, path);
  if (h.magic != "P5" || h.maxval < 256 || h.maxval > 65535) {
    throw InvalidInput(path.string() + ": expected 16-bit P5 image");
  }
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
  const auto raw = read_raster(is, n * 2, path);
  Image16 out{h.width, h.height, std::vector<std::uint16_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.samples[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  }
  return out;
}

void write_pgm16(const std::filesystem::path& path, const Image16& image) {
  if (image.samples.size() !=
      static_cast<std::size_t>(image.width) * image.height) {
    throw InvalidInput("sample count does not match image dimensions");
  }
  auto os = open_out(path);
  os << "P5\n" << image.width << ' ' << image.height << "\n65535\n";
  std::vector<char> raw(image.samples.size() * 2);
  for (std::size_t i = 0; i < image.samples.size(); ++i) {
    raw[2 * i] = static_cast<char>(image.samples[i] >> 8);
    raw[2 * i + 1] = static_cast<char>(image.samples[i] & 0xff);
  }
  os.write(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace planegrasp
