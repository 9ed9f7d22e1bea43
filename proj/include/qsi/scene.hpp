#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qsi {

struct PixelCoord {
  int x = 0;
  int y = 0;

  bool operator==(const PixelCoord&) const = default;
};

/// Parse failure in a PBM/PGM stream, carrying the 1-based line and column
/// of the offending byte.
class ImageFormatError : public std::runtime_error {
 public:
  ImageFormatError(std::string_view origin, int line, int column, const std::string& what)
      : std::runtime_error(std::string(origin) + ":" + std::to_string(line) + ":" +
                           std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Binary reflectance mask over a pixel grid: bit 1 = reflective,
/// bit 0 = absorbing. Immutable after construction; concurrent reads are
/// safe. The reflective pixel list is precomputed so attack channels can
/// resample positions in O(1).
class ObjectMask {
 public:
  ObjectMask(int width, int height, std::vector<std::uint8_t> bits)
      : width_(width), height_(height), bits_(std::move(bits)) {
    if (width_ < 1 || height_ < 1) {
      throw std::invalid_argument("mask dimensions must be >= 1");
    }
    if (bits_.size() != static_cast<std::size_t>(width_) * height_) {
      throw std::invalid_argument("mask bit count does not match dimensions");
    }
    for (std::uint8_t b : bits_) {
      if (b > 1) throw std::invalid_argument("mask bits must be 0 or 1");
    }
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) {
        if (bits_[static_cast<std::size_t>(y) * width_ + x]) {
          reflective_.push_back({x, y});
        }
      }
    }
  }

  static ObjectMask filled(int width, int height, bool reflective) {
    return ObjectMask(width, height,
                      std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height,
                                                reflective ? 1 : 0));
  }

  int width() const { return width_; }
  int height() const { return height_; }

  bool in_bounds(PixelCoord p) const {
    return p.x >= 0 && p.x < width_ && p.y >= 0 && p.y < height_;
  }

  bool reflective(PixelCoord p) const {
    return bits_[static_cast<std::size_t>(p.y) * width_ + p.x] != 0;
  }

  std::size_t reflective_count() const { return reflective_.size(); }

  /// Reflective pixels in row-major order.
  const std::vector<PixelCoord>& reflective_pixels() const { return reflective_; }

  bool operator==(const ObjectMask&) const = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
  std::vector<PixelCoord> reflective_;
};

enum class Reflection { Reflected, Absorbed };

/// Ideal specular bounce: reflective pixels return the photon unchanged
/// (polarization and position untouched), absorbing pixels swallow it.
inline Reflection reflect(const ObjectMask& mask, PixelCoord p) {
  if (!mask.in_bounds(p)) {
    throw std::out_of_range("pixel (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                            ") outside " + std::to_string(mask.width()) + "x" +
                            std::to_string(mask.height()) + " mask");
  }
  return mask.reflective(p) ? Reflection::Reflected : Reflection::Absorbed;
}

/// Uniform position on the object plane: floor(u * dim) per axis.
inline PixelCoord sample_position(const ObjectMask& mask, double u1, double u2) {
  auto clamp_floor = [](double u, int n) {
    const int i = static_cast<int>(u * n);
    return i < n ? i : n - 1;
  };
  return {clamp_floor(u1, mask.width()), clamp_floor(u2, mask.height())};
}

/// Per-pixel detection counts for one camera port.
class CountGrid {
 public:
  CountGrid() = default;
  CountGrid(int width, int height)
      : CountGrid(width, height,
                  std::vector<std::uint64_t>(static_cast<std::size_t>(width) * height, 0)) {}
  CountGrid(int width, int height, std::vector<std::uint64_t> counts)
      : width_(width), height_(height), counts_(std::move(counts)) {
    if (width < 1 || height < 1) {
      throw std::invalid_argument("grid dimensions must be >= 1");
    }
    if (counts_.size() != static_cast<std::size_t>(width) * height) {
      throw std::invalid_argument("grid count size does not match dimensions");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }

  std::uint64_t at(int x, int y) const {
    return counts_[static_cast<std::size_t>(y) * width_ + x];
  }

  void add(PixelCoord p) { ++counts_[static_cast<std::size_t>(p.y) * width_ + p.x]; }

  std::uint64_t max_count() const {
    return counts_.empty() ? 0 : *std::max_element(counts_.begin(), counts_.end());
  }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }

  CountGrid& operator+=(const CountGrid& other) {
    if (other.width_ != width_ || other.height_ != height_) {
      throw std::invalid_argument("grid dimension mismatch in merge");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
  }

  bool operator==(const CountGrid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint64_t> counts_;
};

namespace detail {

/// Whitespace/comment-aware cursor over netpbm text, tracking line/column
/// for error messages.
class PnmCursor {
 public:
  PnmCursor(std::string_view text, std::string_view origin)
      : text_(text), origin_(origin) {}

  void skip_separators() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  bool at_end() {
    skip_separators();
    return pos_ >= text_.size();
  }

  char peek() const { return text_[pos_]; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  /// Next unsigned decimal integer token.
  long next_int(const char* what) {
    skip_separators();
    if (pos_ >= text_.size()) fail(std::string("unexpected end of input, expected ") + what);
    if (!std::isdigit(static_cast<unsigned char>(peek()))) {
      fail(std::string("expected ") + what + ", found '" + peek() + "'");
    }
    long value = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(peek()))) {
      value = value * 10 + (peek() - '0');
      if (value > 1'000'000'000L) fail(std::string(what) + " out of range");
      advance();
    }
    return value;
  }

  void expect_magic(std::string_view magic) {
    if (text_.substr(0, magic.size()) != magic) {
      fail("expected magic '" + std::string(magic) + "'");
    }
    for (std::size_t i = 0; i < magic.size(); ++i) advance();
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ImageFormatError(origin_, line_, column_, message);
  }

 private:
  std::string_view text_;
  std::string_view origin_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace detail

/// Parse a plain-text PBM ("P1") mask. PBM convention: 1 = black, and the
/// black silhouette is the part that reflects.
inline ObjectMask parse_mask_pbm(std::string_view text, std::string_view origin = "<memory>") {
  detail::PnmCursor cur(text, origin);
  cur.expect_magic("P1");
  const long w = cur.next_int("width");
  const long h = cur.next_int("height");
  if (w < 1 || h < 1) cur.fail("dimensions must be >= 1");
  if (w * h > 64L * 1024 * 1024) cur.fail("mask too large");

  std::vector<std::uint8_t> bits;
  bits.reserve(static_cast<std::size_t>(w * h));
  while (static_cast<long>(bits.size()) < w * h) {
    if (cur.at_end()) {
      cur.fail("expected " + std::to_string(w * h) + " pixels, found only " +
               std::to_string(bits.size()));
    }
    const char c = cur.peek();
    if (c != '0' && c != '1') {
      cur.fail(std::string("pixel value must be 0 or 1, found '") + c + "'");
    }
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
    cur.advance();
  }
  if (!cur.at_end()) {
    cur.fail("trailing data after " + std::to_string(w * h) + " pixels");
  }
  return ObjectMask(static_cast<int>(w), static_cast<int>(h), std::move(bits));
}

inline ObjectMask load_mask(const std::filesystem::path& path) {
  return parse_mask_pbm(detail::read_text_file(path), path.string());
}

inline std::string mask_to_pbm(const ObjectMask& mask) {
  std::string out = "P1\n" + std::to_string(mask.width()) + " " +
                    std::to_string(mask.height()) + "\n";
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (x > 0) out += ' ';
      out += mask.reflective({x, y}) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

inline void write_mask_pbm(const ObjectMask& mask, const std::filesystem::path& path) {
  detail::write_text_file(path, mask_to_pbm(mask));
}

/// Render a count grid as plain-text PGM ("P2"). maxval is the maximum
/// count, or 1 when the grid is all zero (PGM forbids maxval 0). Output is
/// byte-reproducible for a given grid.
inline std::string grid_to_pgm(const CountGrid& grid) {
  const std::uint64_t maxval = std::max<std::uint64_t>(grid.max_count(), 1);
  std::string out = "P2\n" + std::to_string(grid.width()) + " " +
                    std::to_string(grid.height()) + "\n" + std::to_string(maxval) + "\n";
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      if (x > 0) out += ' ';
      out += std::to_string(grid.at(x, y));
    }
    out += '\n';
  }
  return out;
}

inline void write_image_pgm(const CountGrid& grid, const std::filesystem::path& path) {
  detail::write_text_file(path, grid_to_pgm(grid));
}

/// Parse a plain-text PGM ("P2") back into a count grid.
inline CountGrid parse_grid_pgm(std::string_view text, std::string_view origin = "<memory>") {
  detail::PnmCursor cur(text, origin);
  cur.expect_magic("P2");
  const long w = cur.next_int("width");
  const long h = cur.next_int("height");
  if (w < 1 || h < 1) cur.fail("dimensions must be >= 1");
  const long maxval = cur.next_int("maxval");
  if (maxval < 1) cur.fail("maxval must be >= 1");

  std::vector<std::uint64_t> counts;
  counts.reserve(static_cast<std::size_t>(w * h));
  for (long i = 0; i < w * h; ++i) {
    const long v = cur.next_int("pixel count");
    if (v > maxval) cur.fail("pixel exceeds maxval");
    counts.push_back(static_cast<std::uint64_t>(v));
  }
  if (!cur.at_end()) cur.fail("trailing data after pixel raster");
  return CountGrid(static_cast<int>(w), static_cast<int>(h), std::move(counts));
}

inline CountGrid load_image_pgm(const std::filesystem::path& path) {
  return parse_grid_pgm(detail::read_text_file(path), path.string());
}

namespace detail {

/// Even-odd polygon rasterization over the unit square (y down), sampled
/// at pixel centers.
inline ObjectMask rasterize_polygon(int width, int height,
                                    const std::vector<std::array<double, 2>>& poly) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(width) * height, 0);
  for (int y = 0; y < height; ++y) {
    const double py = (y + 0.5) / height;
    for (int x = 0; x < width; ++x) {
      const double px = (x + 0.5) / width;
      bool inside = false;
      for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a[1] > py) != (b[1] > py) &&
            px < (b[0] - a[0]) * (py - a[1]) / (b[1] - a[1]) + a[0]) {
          inside = !inside;
        }
      }
      if (inside) bits[static_cast<std::size_t>(y) * width + x] = 1;
    }
  }
  return ObjectMask(width, height, std::move(bits));
}

}  // namespace detail

/// Built-in 64x64 stealth-aircraft silhouette (delta wing, nose up),
/// generated from a fixed vertex list.
inline ObjectMask builtin_aircraft_mask() {
  static const std::vector<std::array<double, 2>> poly{
      {0.50, 0.04},  // nose
      {0.57, 0.30},
      {0.96, 0.62},  // right wingtip
      {0.96, 0.72},
      {0.60, 0.60},
      {0.68, 0.90},  // right tail tip
      {0.50, 0.78},  // tail notch
      {0.32, 0.90},  // left tail tip
      {0.40, 0.60},
      {0.04, 0.72},
      {0.04, 0.62},  // left wingtip
      {0.43, 0.30},
  };
  return detail::rasterize_polygon(64, 64, poly);
}

/// Built-in 64x64 bird silhouette (gull in flight), generated from a
/// fixed vertex list.
inline ObjectMask builtin_bird_mask() {
  static const std::vector<std::array<double, 2>> poly{
      {0.50, 0.36},  // head
      {0.57, 0.40},
      {0.70, 0.26},
      {0.94, 0.12},  // right wingtip
      {0.86, 0.32},
      {0.66, 0.52},
      {0.60, 0.66},
      {0.64, 0.84},  // tail, right edge
      {0.50, 0.74},
      {0.36, 0.84},  // tail, left edge
      {0.40, 0.66},
      {0.34, 0.52},
      {0.14, 0.32},
      {0.06, 0.12},  // left wingtip
      {0.30, 0.26},
      {0.43, 0.40},
  };
  return detail::rasterize_polygon(64, 64, poly);
}

/// Resolve "aircraft" or "bird" without touching the filesystem.
inline ObjectMask builtin_mask(std::string_view name) {
  if (name == "aircraft") return builtin_aircraft_mask();
  if (name == "bird") return builtin_bird_mask();
  throw std::invalid_argument("unknown built-in mask '" + std::string(name) +
                              "' (available: aircraft, bird)");
}

}  // namespace qsi
