#include <png.h>

#include <cstdio>
#include <memory>

#include "ralmac/errors.hpp"
#include "ralmac/viz.hpp"

namespace ralmac {

std::array<std::uint8_t, 3> RgbImage::at(std::size_t x, std::size_t y) const {
  const std::size_t o = 3 * (y * width + x);
  return {pixels[o], pixels[o + 1], pixels[o + 2]};
}

void RgbImage::set(std::size_t x, std::size_t y, std::array<std::uint8_t, 3> rgb) {
  if (x >= width || y >= height) return;
  const std::size_t o = 3 * (y * width + x);
  pixels[o] = rgb[0];
  pixels[o + 1] = rgb[1];
  pixels[o + 2] = rgb[2];
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  std::unique_ptr<FILE, decltype(&std::fclose)> file(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!file) throw Error("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    throw Error("libpng failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(image.pixels.data() + 3 * y * image.width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace ralmac
