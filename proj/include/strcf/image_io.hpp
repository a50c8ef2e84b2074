#pragma once

// PNG/JPEG decoding and encoding. Requires linking libpng and libjpeg
// (the `strcf` CMake target does this).

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

// jpeglib.h expects size_t and FILE to be declared first.
#include <jpeglib.h>

#include "strcf/image.hpp"

namespace strcf {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return f;
}

inline Image read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str()))
    throw Error(ErrorKind::ImageDecode, path.string() + ": " + img.message);
  const bool gray = (img.format & PNG_FORMAT_FLAG_COLOR) == 0;
  img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Image out(static_cast<int>(img.width), static_cast<int>(img.height), gray ? 1 : 3);
  if (!png_image_finish_read(&img, nullptr, out.data.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw Error(ErrorKind::ImageDecode, path.string() + ": " + msg);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

inline void jpeg_quiet(j_common_ptr) {}

// No C++ objects with destructors may be live between setjmp and a longjmp
// out of libjpeg, hence the split into a C-style worker.
inline bool decode_jpeg(std::FILE* file, Image& out, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.output_message = jpeg_quiet;
  if (setjmp(err.jump)) {
    std::snprintf(message, JMSG_LENGTH_MAX, "%s", err.message);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file);
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.num_components != 1) cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const int channels = static_cast<int>(cinfo.output_components);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.channels = channels;
  out.data.assign(static_cast<std::size_t>(out.width) * out.height * channels, 0);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data.data() + static_cast<std::size_t>(cinfo.output_scanline) * out.width * channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

inline bool encode_jpeg(std::FILE* file, const Image& img, int quality, char* message) {
  jpeg_compress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.output_message = jpeg_quiet;
  if (setjmp(err.jump)) {
    std::snprintf(message, JMSG_LENGTH_MAX, "%s", err.message);
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, file);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = img.channels;
  cinfo.in_color_space = img.channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPLE*>(img.data.data() +
                                     static_cast<std::size_t>(cinfo.next_scanline) * img.width * img.channels);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

inline Image read_jpeg(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  Image out;
  char message[JMSG_LENGTH_MAX] = {};
  if (!decode_jpeg(file.get(), out, message))
    throw Error(ErrorKind::ImageDecode, path.string() + ": " + message);
  return out;
}

}  // namespace detail

/// Decodes a PNG or JPEG file, detected from its leading bytes.
inline Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  unsigned char magic[8] = {};
  in.read(reinterpret_cast<char*>(magic), sizeof(magic));
  const auto got = in.gcount();
  in.close();
  if (got >= 8 && png_sig_cmp(magic, 0, 8) == 0) return detail::read_png(path);
  if (got >= 3 && magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF) return detail::read_jpeg(path);
  throw Error(ErrorKind::ImageDecode, path.string() + ": not a PNG or JPEG file");
}

inline void save_png(const std::filesystem::path& path, const Image& img) {
  png_image out{};
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(img.width);
  out.height = static_cast<png_uint_32>(img.height);
  out.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&out, path.string().c_str(), 0, img.data.data(), 0, nullptr))
    throw Error(ErrorKind::Io, path.string() + ": " + out.message);
}

inline void save_jpeg(const std::filesystem::path& path, const Image& img, int quality = 95) {
  auto file = detail::open_file(path, "wb");
  char message[JMSG_LENGTH_MAX] = {};
  if (!detail::encode_jpeg(file.get(), img, quality, message))
    throw Error(ErrorKind::Io, path.string() + ": " + message);
}

}  // namespace strcf
