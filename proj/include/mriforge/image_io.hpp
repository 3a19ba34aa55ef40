#pragma once

// PNG (read/write) and JPEG (read) codecs for ImageBuf. Link against libpng
// and libjpeg when including this header.

#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <jpeglib.h>

#include "mriforge/error.hpp"
#include "mriforge/image.hpp"

namespace mriforge {

namespace detail {

inline bool has_suffix_ci(const std::string& s, std::string_view suffix) {
  if (s.size() < suffix.size()) return false;
  for (std::size_t i = 0; i < suffix.size(); ++i) {
    const char a = static_cast<char>(std::tolower(static_cast<unsigned char>(s[s.size() - suffix.size() + i])));
    if (a != suffix[i]) return false;
  }
  return true;
}

inline ImageBuf load_png(const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot decode PNG '" + path + "': " + image.message);
  }
  const auto native = image.format;
  if (native & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw InvalidArgument("unsupported PNG '" + path + "': 16-bit samples (8-bit required)");
  }
  if (native & PNG_FORMAT_FLAG_ALPHA) {
    png_image_free(&image);
    throw InvalidArgument("unsupported PNG '" + path + "': alpha channel (gray or RGB required)");
  }
  const int channels = (native & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG '" + path + "': " + msg);
  }
  ImageBuf out(static_cast<int>(image.width), static_cast<int>(image.height), channels);
  for (std::size_t i = 0; i < buffer.size(); ++i) out.pixels()[i] = buffer[i];
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Decodes into caller-owned storage; only trivially destructible objects live
// in this frame so longjmp out of libjpeg is safe.
inline bool decode_jpeg(std::FILE* file, std::vector<unsigned char>& pixels, int& width, int& height,
                        int& channels, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  jerr.message[0] = '\0';
  if (setjmp(jerr.jump)) {
    std::strncpy(message, jerr.message, JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file);
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.jpeg_color_space != JCS_GRAYSCALE) cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  channels = cinfo.output_components;
  pixels.resize(static_cast<std::size_t>(width) * height * channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

inline ImageBuf load_jpeg(const std::string& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!file) throw IoError("cannot open '" + path + "'");
  std::vector<unsigned char> pixels;
  int width = 0, height = 0, channels = 0;
  char message[JMSG_LENGTH_MAX] = {};
  if (!decode_jpeg(file.get(), pixels, width, height, channels, message)) {
    throw IoError("cannot decode JPEG '" + path + "': " + message);
  }
  if (channels != 1 && channels != 3) {
    throw InvalidArgument("unsupported JPEG '" + path + "': " + std::to_string(channels) + " components");
  }
  ImageBuf out(width, height, channels);
  for (std::size_t i = 0; i < pixels.size(); ++i) out.pixels()[i] = pixels[i];
  return out;
}

}  // namespace detail

/// Decodes an 8-bit gray or RGB PNG/JPEG. Pixel values are the stored bytes.
inline ImageBuf load_image(const std::string& path) {
  if (!std::filesystem::exists(path)) throw IoError("image file not found: '" + path + "'");
  unsigned char magic[8] = {};
  {
    std::ifstream in(path, std::ios::binary);
    in.read(reinterpret_cast<char*>(magic), sizeof magic);
    if (in.gcount() < 3) throw IoError("cannot decode '" + path + "': file too short");
  }
  if (png_sig_cmp(magic, 0, 8) == 0) return detail::load_png(path);
  if (magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF) return detail::load_jpeg(path);
  throw InvalidArgument("unsupported image format: '" + path + "' (PNG or JPEG required)");
}

/// Writes a lossless 8-bit PNG. Values are rounded half away from zero and
/// must already lie in [0, 255].
inline void save_image(const ImageBuf& img, const std::string& path) {
  if (img.empty()) throw InvalidArgument("cannot save an empty image to '" + path + "'");
  std::vector<png_byte> bytes(img.pixels().size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double v = img.pixels()[i];
    if (!(v >= 0.0 && v <= 255.0)) {
      throw InvalidArgument("pixel value " + std::to_string(v) + " outside [0, 255] when saving '" +
                            path + "'");
    }
    bytes[i] = static_cast<png_byte>(round_half_away(v));
  }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot write PNG '" + path + "': " + msg);
  }
}

}  // namespace mriforge
