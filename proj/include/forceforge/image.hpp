#pragma once

// 8-bit RGB images and PNG encode/decode (libpng).

#include <png.h>

#include <algorithm>
#include <array>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "forceforge/core.hpp"

namespace forceforge {

using Rgb = std::array<std::uint8_t, 3>;

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  Image() = default;
  Image(int w, int h, Rgb fill = {0, 0, 0}) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3) {
    for (std::size_t i = 0; i < rgb.size(); i += 3) {
      rgb[i] = fill[0];
      rgb[i + 1] = fill[1];
      rgb[i + 2] = fill[2];
    }
  }

  std::uint8_t* at(int col, int row) { return &rgb[(static_cast<std::size_t>(row) * width + col) * 3]; }
  const std::uint8_t* at(int col, int row) const {
    return &rgb[(static_cast<std::size_t>(row) * width + col) * 3];
  }
  Rgb pixel(int col, int row) const {
    const auto* p = at(col, row);
    return {p[0], p[1], p[2]};
  }
  void set(int col, int row, Rgb c) {
    auto* p = at(col, row);
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  bool operator==(const Image&) const = default;
};

// Horizontal concatenation of equally sized tiles.
inline Image hconcat(const std::vector<Image>& tiles) {
  if (tiles.empty()) return {};
  const int h = tiles.front().height;
  int w = 0;
  for (const auto& t : tiles) {
    if (t.height != h) throw InvalidArgument("hconcat: tile heights differ");
    w += t.width;
  }
  Image out(w, h);
  int x0 = 0;
  for (const auto& t : tiles) {
    for (int r = 0; r < h; ++r)
      std::copy_n(t.at(0, r), static_cast<std::size_t>(t.width) * 3, out.at(x0, r));
    x0 += t.width;
  }
  return out;
}

namespace detail {

struct PngWriteTarget {
  std::vector<std::uint8_t>* bytes;
};

inline void png_append(png_structp png, png_bytep data, png_size_t len) {
  auto* target = static_cast<PngWriteTarget*>(png_get_io_ptr(png));
  target->bytes->insert(target->bytes->end(), data, data + len);
}
inline void png_noop_flush(png_structp) {}

// Records the message and jumps back to the setjmp point of the caller; the
// caller turns it into an exception once outside libpng's frames.
inline void png_fail(png_structp png, png_const_charp msg) {
  auto* slot = static_cast<std::string*>(png_get_error_ptr(png));
  if (slot) *slot = msg;
  png_longjmp(png, 1);
}

struct PngReadSource {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

inline void png_consume(png_structp png, png_bytep out, png_size_t len) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->pos + len > src->size) png_error(png, "truncated PNG data");
  std::copy_n(src->data + src->pos, len, out);
  src->pos += len;
}

}  // namespace detail

// Encodes to PNG bytes. Output depends only on pixel data (no timestamps or
// text chunks), so identical images give identical bytes.
inline std::vector<std::uint8_t> encode_png(const Image& img) {
  if (img.width <= 0 || img.height <= 0) throw InvalidArgument("encode_png: empty image");
  std::vector<std::uint8_t> bytes;
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, detail::png_fail, nullptr);
  if (!png) throw Error("libpng: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};
  if (!info) throw Error("libpng: cannot create info struct");
  if (setjmp(png_jmpbuf(png))) throw Error("libpng: " + error);

  detail::PngWriteTarget target{&bytes};
  png_set_write_fn(png, &target, detail::png_append, detail::png_noop_flush);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (int r = 0; r < img.height; ++r) png_write_row(png, const_cast<png_bytep>(img.at(0, r)));
  png_write_end(png, nullptr);
  return bytes;
}

inline Image decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw Error("not a PNG stream");
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, detail::png_fail, nullptr);
  if (!png) throw Error("libpng: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};
  if (!info) throw Error("libpng: cannot create info struct");
  if (setjmp(png_jmpbuf(png))) throw Error("libpng: " + error);

  detail::PngReadSource src{bytes.data(), bytes.size(), 0};
  png_set_read_fn(png, &src, detail::png_consume);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  if (png_get_rowbytes(png, info) != static_cast<std::size_t>(width) * 3) throw Error("unsupported PNG layout");
  Image img(width, height);
  for (int r = 0; r < img.height; ++r) png_read_row(png, img.at(0, r), nullptr);
  png_read_end(png, nullptr);
  return img;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "rb"), std::fclose);
  if (!f) throw IoError(path.string(), "cannot open file");
  std::vector<std::uint8_t> bytes;
  std::array<std::uint8_t, 1 << 16> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), f.get())) > 0) bytes.insert(bytes.end(), buf.data(), buf.data() + n);
  if (std::ferror(f.get())) throw IoError(path.string(), "read failed");
  return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, const void* data, std::size_t size) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "wb"), std::fclose);
  if (!f) throw IoError(path.string(), "cannot create file");
  if (size > 0 && std::fwrite(data, 1, size, f.get()) != size) throw IoError(path.string(), "write failed");
  if (std::fflush(f.get()) != 0) throw IoError(path.string(), "write failed");
}

inline void write_png(const std::filesystem::path& path, const Image& img) {
  const auto bytes = encode_png(img);
  write_file_bytes(path, bytes.data(), bytes.size());
}

inline Image read_png(const std::filesystem::path& path) {
  try {
    return decode_png(read_file_bytes(path));
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw IoError(path.string(), e.what());
  }
}

}  // namespace forceforge
