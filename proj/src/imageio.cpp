#include "msld/imageio.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace msld {

const char* to_string(PnmErrorKind kind) {
  switch (kind) {
    case PnmErrorKind::open_failed: return "cannot open file";
    case PnmErrorKind::malformed_header: return "malformed header";
    case PnmErrorKind::unsupported_maxval: return "unsupported maxval";
    case PnmErrorKind::truncated_payload: return "truncated payload";
    case PnmErrorKind::malformed_payload: return "malformed payload";
    case PnmErrorKind::write_failed: return "write failed";
  }
  return "unknown";
}

PnmError::PnmError(PnmErrorKind kind, const std::filesystem::path& path, const std::string& detail)
    : IoError(path.string() + ": " + to_string(kind) + (detail.empty() ? "" : ": " + detail)),
      kind_(kind) {}

namespace {

// Cursor over the raw file bytes with netpbm header tokenization.
class PnmReader {
 public:
  PnmReader(std::vector<unsigned char> bytes, std::filesystem::path path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  [[noreturn]] void fail(PnmErrorKind kind, const std::string& detail) const {
    throw PnmError(kind, path_, detail);
  }

  void skip_whitespace_and_comments() {
    while (pos_ < bytes_.size()) {
      const unsigned char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  // Reads an unsigned decimal token; returns false at end of input.
  bool next_uint(long long& value) {
    skip_whitespace_and_comments();
    if (pos_ >= bytes_.size()) return false;
    if (!std::isdigit(bytes_[pos_])) return false;
    value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1LL << 40)) return false;
      ++pos_;
    }
    return true;
  }

  long long header_uint(const char* what) {
    long long v = 0;
    if (!next_uint(v)) fail(PnmErrorKind::malformed_header, std::string("missing or invalid ") + what);
    return v;
  }

  char read_magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P') fail(PnmErrorKind::malformed_header, "bad magic number");
    const char kind = static_cast<char>(bytes_[1]);
    if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
      fail(PnmErrorKind::malformed_header, std::string("unsupported format P") + kind);
    }
    pos_ = 2;
    return kind;
  }

  // Binary rasters start after exactly one whitespace byte following maxval.
  void begin_binary_raster() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      fail(PnmErrorKind::malformed_header, "expected whitespace after maxval");
    }
    ++pos_;
  }

  void read_binary(std::uint8_t* out, std::size_t count) {
    if (bytes_.size() - pos_ < count) {
      fail(PnmErrorKind::truncated_payload,
           "expected " + std::to_string(count) + " bytes, found " + std::to_string(bytes_.size() - pos_));
    }
    std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_), count, out);
    pos_ += count;
  }

  void read_plain(std::uint8_t* out, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      skip_whitespace_and_comments();
      if (pos_ >= bytes_.size()) {
        fail(PnmErrorKind::truncated_payload,
             "expected " + std::to_string(count) + " samples, found " + std::to_string(i));
      }
      long long v = 0;
      if (!next_uint(v)) fail(PnmErrorKind::malformed_payload, "non-numeric sample " + std::to_string(i));
      if (v > 255) fail(PnmErrorKind::malformed_payload, "sample exceeds maxval at index " + std::to_string(i));
      out[i] = static_cast<std::uint8_t>(v);
    }
  }

 private:
  std::vector<unsigned char> bytes_;
  std::filesystem::path path_;
  std::size_t pos_ = 0;
};

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PnmError(PnmErrorKind::open_failed, path, "");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::filesystem::path& path, const std::string& header, const std::uint8_t* data,
               std::size_t count) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PnmError(PnmErrorKind::open_failed, path, "for writing");
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count));
  out.flush();
  if (!out) throw PnmError(PnmErrorKind::write_failed, path, "");
}

}  // namespace

PnmImage load_pnm(const std::filesystem::path& path) {
  PnmReader reader(read_all(path), path);
  const char kind = reader.read_magic();
  const long long width = reader.header_uint("width");
  const long long height = reader.header_uint("height");
  const long long maxval = reader.header_uint("maxval");
  if (width < 1 || height < 1) reader.fail(PnmErrorKind::malformed_header, "zero image dimension");
  if (width * height > (1LL << 32)) reader.fail(PnmErrorKind::malformed_header, "image too large");
  if (maxval != 255) {
    reader.fail(PnmErrorKind::unsupported_maxval, "maxval " + std::to_string(maxval) + ", expected 255");
  }

  const bool binary = kind == '5' || kind == '6';
  const bool color = kind == '3' || kind == '6';
  if (binary) reader.begin_binary_raster();

  const auto pixels = static_cast<std::size_t>(width * height);
  std::vector<std::uint8_t> samples(pixels * (color ? 3 : 1));
  if (binary) {
    reader.read_binary(samples.data(), samples.size());
  } else {
    reader.read_plain(samples.data(), samples.size());
  }

  if (!color) {
    GrayImage gray(height, width);
    std::copy(samples.begin(), samples.end(), gray.data());
    return gray;
  }
  RgbImage rgb{Plane<std::uint8_t>(height, width), Plane<std::uint8_t>(height, width),
               Plane<std::uint8_t>(height, width)};
  for (std::size_t i = 0; i < pixels; ++i) {
    rgb.red.data()[i] = samples[3 * i];
    rgb.green.data()[i] = samples[3 * i + 1];
    rgb.blue.data()[i] = samples[3 * i + 2];
  }
  return rgb;
}

void save_pnm(const GrayImage& image, const std::filesystem::path& path) {
  const std::string header =
      "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  write_all(path, header, image.data(), static_cast<std::size_t>(image.size()));
}

void save_pnm(const RgbImage& image, const std::filesystem::path& path) {
  const std::string header =
      "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  const auto pixels = static_cast<std::size_t>(image.green.size());
  std::vector<std::uint8_t> interleaved(pixels * 3);
  for (std::size_t i = 0; i < pixels; ++i) {
    interleaved[3 * i] = image.red.data()[i];
    interleaved[3 * i + 1] = image.green.data()[i];
    interleaved[3 * i + 2] = image.blue.data()[i];
  }
  write_all(path, header, interleaved.data(), interleaved.size());
}

Mask threshold_mask(const GrayImage& image) { return image > std::uint8_t{0}; }

Mask load_mask(const std::filesystem::path& path) {
  auto image = load_pnm(path);
  if (!std::holds_alternative<GrayImage>(image)) {
    throw PnmError(PnmErrorKind::malformed_header, path, "mask must be a PGM (P2/P5)");
  }
  return threshold_mask(std::get<GrayImage>(image));
}

void save_mask(const Mask& mask, const std::filesystem::path& path) {
  const GrayImage gray = mask.select(GrayImage::Constant(mask.rows(), mask.cols(), 255),
                                     GrayImage::Zero(mask.rows(), mask.cols()));
  save_pnm(gray, path);
}

GrayImage extract_inverted_green(const RgbImage& rgb) {
  return (255 - rgb.green.cast<int>()).cast<std::uint8_t>();
}

}  // namespace msld
