#include "msld/response_io.hpp"

#include "msld/error.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace msld {

namespace {

constexpr const char* kMagic = "MSLDF";

std::array<char, 4> to_le_bytes(float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  return {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
          static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
}

float from_le_bytes(const unsigned char* b) {
  const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                             (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace

void write_response(std::ostream& out, const ResponseMap& response) {
  out << kMagic << ' ' << response.cols() << ' ' << response.rows() << '\n';
  std::vector<char> payload;
  payload.reserve(static_cast<std::size_t>(response.size()) * 4);
  for (Index i = 0; i < response.size(); ++i) {
    const auto bytes = to_le_bytes(static_cast<float>(response.data()[i]));
    payload.insert(payload.end(), bytes.begin(), bytes.end());
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

ResponseMap read_response(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw IoError("response file: missing header");
  std::istringstream hs(header);
  std::string magic;
  long long width = 0, height = 0;
  if (!(hs >> magic >> width >> height) || magic != kMagic || width < 1 || height < 1) {
    throw IoError("response file: malformed header '" + header + "'");
  }
  const auto count = static_cast<std::size_t>(width * height);
  std::vector<unsigned char> payload(count * 4);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
    throw IoError("response file: truncated payload (expected " + std::to_string(payload.size()) + " bytes)");
  }
  ResponseMap map(height, width);
  for (std::size_t i = 0; i < count; ++i) map.data()[i] = from_le_bytes(&payload[4 * i]);
  return map;
}

void save_response(const ResponseMap& response, const std::filesystem::path& path) {
  write_file_atomically(path, [&](std::ostream& out) { write_response(out, response); });
}

ResponseMap load_response(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open response file");
  return read_response(in);
}

void write_file_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    writer(out);
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError(path.string() + ": write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError(path.string() + ": cannot move output into place");
  }
}

}  // namespace msld
