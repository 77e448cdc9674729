#pragma once

#include <zlib.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "vsl/errors.hpp"
#include "vsl/stimulus.hpp"

namespace vsl::png {

inline constexpr std::array<std::uint8_t, 8> kSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char (&type)[5],
                      const std::vector<std::uint8_t>& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const auto crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

/// 8-bit RGB, non-interlaced, filter type 0 on every row, fixed zlib level:
/// identical images give identical bytes for a given zlib build.
inline std::vector<std::uint8_t> encode(const Image& img) {
  const std::size_t stride = static_cast<std::size_t>(img.width) * kChannels;
  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);
    const auto row = img.pixels.begin() + static_cast<std::ptrdiff_t>(stride * static_cast<std::size_t>(y));
    raw.insert(raw.end(), row, row + static_cast<std::ptrdiff_t>(stride));
  }
  uLongf zsize = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> z(zsize);
  if (compress2(z.data(), &zsize, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw Error("png: deflate failed");
  z.resize(zsize);

  std::vector<std::uint8_t> ihdr;
  detail::put_u32(ihdr, static_cast<std::uint32_t>(img.width));
  detail::put_u32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // depth 8, truecolor, deflate, filter 0, no interlace

  std::vector<std::uint8_t> out(kSignature.begin(), kSignature.end());
  detail::put_chunk(out, "IHDR", ihdr);
  detail::put_chunk(out, "IDAT", z);
  detail::put_chunk(out, "IEND", {});
  return out;
}

/// Decodes files produced by encode(); other PNG flavors are rejected.
inline Image decode(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature.data(), 8) != 0)
    throw ValidationError("png: bad signature");
  Image img;
  std::vector<std::uint8_t> z;
  std::size_t pos = 8;
  while (pos + 12 <= bytes.size()) {
    const std::uint32_t len = detail::get_u32(&bytes[pos]);
    if (pos + 12 + len > bytes.size()) throw ValidationError("png: truncated chunk");
    const std::string type(reinterpret_cast<const char*>(&bytes[pos + 4]), 4);
    const std::uint8_t* data = &bytes[pos + 8];
    if (crc32(0L, &bytes[pos + 4], len + 4) != detail::get_u32(data + len))
      throw ValidationError("png: CRC mismatch in " + type);
    if (type == "IHDR") {
      img.width = static_cast<int>(detail::get_u32(data));
      img.height = static_cast<int>(detail::get_u32(data + 4));
      if (data[8] != 8 || data[9] != 2 || data[12] != 0)
        throw ValidationError("png: only 8-bit RGB non-interlaced images are supported");
    } else if (type == "IDAT") {
      z.insert(z.end(), data, data + len);
    } else if (type == "IEND") {
      break;
    }
    pos += 12 + len;
  }
  const std::size_t stride = static_cast<std::size_t>(img.width) * kChannels;
  uLongf raw_size = static_cast<uLongf>((stride + 1) * static_cast<std::size_t>(img.height));
  std::vector<std::uint8_t> raw(raw_size);
  if (uncompress(raw.data(), &raw_size, z.data(), static_cast<uLong>(z.size())) != Z_OK ||
      raw_size != raw.size())
    throw ValidationError("png: inflate failed");
  img.pixels.assign(stride * static_cast<std::size_t>(img.height), 0);
  for (int y = 0; y < img.height; ++y) {
    const std::uint8_t* row = &raw[(stride + 1) * static_cast<std::size_t>(y)];
    if (row[0] != 0) throw ValidationError("png: unsupported row filter");
    std::memcpy(&img.pixels[stride * static_cast<std::size_t>(y)], row + 1, stride);
  }
  return img;
}

inline void write_file(const std::filesystem::path& path, const Image& img) {
  const auto bytes = encode(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing", path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed", path.string());
}

inline Image read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

}  // namespace vsl::png
