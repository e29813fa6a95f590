#pragma once

// Control tensor export.
//
// FPCT file layout (all little-endian):
//   bytes 0..3    magic "FPCT"
//   4 x uint32    frames, channels, height, width
//   float32[...]  values in frame, channel, row, column order

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "forceforge/encoder.hpp"
#include "forceforge/image.hpp"

namespace forceforge {

inline constexpr char kFpctMagic[4] = {'F', 'P', 'C', 'T'};
inline constexpr std::size_t kFpctHeaderBytes = 20;

namespace detail {
inline void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}
}  // namespace detail

inline std::vector<std::uint8_t> serialize_fpct(const ControlTensor& t) {
  const auto& d = t.dims();
  std::vector<std::uint8_t> out;
  out.reserve(kFpctHeaderBytes + t.values().size() * 4);
  out.insert(out.end(), kFpctMagic, kFpctMagic + 4);
  for (int v : {d.frames, d.channels, d.height, d.width}) detail::put_u32le(out, static_cast<std::uint32_t>(v));
  for (float v : t.values()) detail::put_u32le(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

// Parses an FPCT stream. The encoding kind is not stored in the file; it is
// supplied by the caller (records keep it in their metadata).
inline ControlTensor deserialize_fpct(const std::vector<std::uint8_t>& bytes, EncodingKind kind, double fps = 8.0) {
  if (bytes.size() < kFpctHeaderBytes || std::memcmp(bytes.data(), kFpctMagic, 4) != 0)
    throw Error("not an FPCT stream");
  VideoDims d;
  d.frames = static_cast<int>(detail::get_u32le(&bytes[4]));
  d.channels = static_cast<int>(detail::get_u32le(&bytes[8]));
  d.height = static_cast<int>(detail::get_u32le(&bytes[12]));
  d.width = static_cast<int>(detail::get_u32le(&bytes[16]));
  d.fps = fps;
  d.validate();
  if (bytes.size() != kFpctHeaderBytes + d.voxels() * 4) throw Error("FPCT payload size does not match header");
  ControlTensor t(d, kind);
  auto values = t.values();
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = std::bit_cast<float>(detail::get_u32le(&bytes[kFpctHeaderBytes + 4 * i]));
  return t;
}

inline void write_fpct(const std::filesystem::path& path, const ControlTensor& t) {
  const auto bytes = serialize_fpct(t);
  write_file_bytes(path, bytes.data(), bytes.size());
}

inline ControlTensor read_fpct(const std::filesystem::path& path, EncodingKind kind, double fps = 8.0) {
  try {
    return deserialize_fpct(read_file_bytes(path), kind, fps);
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw IoError(path.string(), e.what());
  }
}

// 8-bit preview of one frame: local tensors map [0,1] to [0,255], global
// tensors map [-1,1] to [0,255] per channel.
inline Image control_frame_image(const ControlTensor& t, int frame) {
  const auto& d = t.dims();
  Image img(d.width, d.height);
  const bool global = t.kind() == EncodingKind::global;
  for (int ch = 0; ch < 3; ++ch) {
    auto plane = t.plane(frame, ch);
    for (std::size_t i = 0; i < plane.size(); ++i) {
      double v = global ? (plane[i] + 1.0) * 0.5 : plane[i];
      v = std::clamp(v, 0.0, 1.0);
      img.rgb[i * 3 + ch] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  }
  return img;
}

inline std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d.png", index);
  return buf;
}

// Writes frame_%04d.png for every frame into dir (created if needed).
inline void write_control_pngs(const std::filesystem::path& dir, const ControlTensor& t) {
  std::filesystem::create_directories(dir);
  for (int f = 0; f < t.dims().frames; ++f) write_png(dir / frame_filename(f), control_frame_image(t, f));
}

}  // namespace forceforge
