#pragma once

#include "msld/error.hpp"
#include "msld/types.hpp"

#include <filesystem>
#include <variant>

namespace msld {

enum class PnmErrorKind {
  open_failed,
  malformed_header,
  unsupported_maxval,
  truncated_payload,
  malformed_payload,
  write_failed,
};

const char* to_string(PnmErrorKind kind);

class PnmError : public IoError {
 public:
  PnmError(PnmErrorKind kind, const std::filesystem::path& path, const std::string& detail);

  PnmErrorKind kind() const { return kind_; }

 private:
  PnmErrorKind kind_;
};

using PnmImage = std::variant<RgbImage, GrayImage>;

/// Reads PGM (P2/P5) or PPM (P3/P6) with maxval 255. Comments are allowed in the header.
PnmImage load_pnm(const std::filesystem::path& path);

/// Writes binary P5.
void save_pnm(const GrayImage& image, const std::filesystem::path& path);
/// Writes binary P6.
void save_pnm(const RgbImage& image, const std::filesystem::path& path);

/// Reads a PGM; any value > 0 is inside the ROI.
Mask load_mask(const std::filesystem::path& path);
/// Writes a mask as P5 with 0 / 255.
void save_mask(const Mask& mask, const std::filesystem::path& path);

/// 255 - green, per pixel.
GrayImage extract_inverted_green(const RgbImage& rgb);

Mask threshold_mask(const GrayImage& image);

}  // namespace msld
