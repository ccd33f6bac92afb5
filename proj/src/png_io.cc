#include "peace/png_io.h"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "peace/errors.h"

namespace peace {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw InputError("cannot open " + path.string());
  return f;
}

[[noreturn]] void png_error_fn(png_structp, png_const_charp msg) { throw InputError(msg); }
void png_warning_fn(png_structp, png_const_charp) {}

class PngReader {
 public:
  explicit PngReader(const std::filesystem::path& path) : file_(open_file(path, "rb")) {
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file_.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
      throw InputError("not a PNG file: " + path.string());
    }
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
    info_ = png_create_info_struct(png_);
    png_init_io(png_, file_.get());
    png_set_sig_bytes(png_, 8);
    png_read_info(png_, info_);
  }
  ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  png_structp png() { return png_; }
  png_infop info() { return info_; }

  std::vector<std::vector<png_byte>> read_rows() {
    png_read_update_info(png_, info_);
    const auto h = png_get_image_height(png_, info_);
    const auto rowbytes = png_get_rowbytes(png_, info_);
    std::vector<std::vector<png_byte>> rows(h, std::vector<png_byte>(rowbytes));
    std::vector<png_bytep> ptrs(h);
    for (png_uint_32 y = 0; y < h; ++y) ptrs[y] = rows[y].data();
    png_read_image(png_, ptrs.data());
    png_read_end(png_, nullptr);
    return rows;
  }

 private:
  FilePtr file_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

class PngWriter {
 public:
  explicit PngWriter(const std::filesystem::path& path) : file_(open_file(path, "wb")) {
    png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
    info_ = png_create_info_struct(png_);
    png_init_io(png_, file_.get());
  }
  ~PngWriter() { png_destroy_write_struct(&png_, &info_); }
  PngWriter(const PngWriter&) = delete;
  PngWriter& operator=(const PngWriter&) = delete;

  png_structp png() { return png_; }
  png_infop info() { return info_; }

  void write_rows(std::vector<std::vector<png_byte>>& rows) {
    png_write_info(png_, info_);
    for (auto& row : rows) png_write_row(png_, row.data());
    png_write_end(png_, nullptr);
  }

 private:
  FilePtr file_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

}  // namespace

RgbImage read_png_rgb(const std::filesystem::path& path) {
  PngReader reader(path);
  auto* png = reader.png();
  auto* info = reader.info();
  const int color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  auto rows = reader.read_rows();
  RgbImage image(w, h);
  for (int y = 0; y < h; ++y) {
    std::copy_n(rows[y].begin(), 3 * w, image.pixels.begin() + 3 * static_cast<std::size_t>(y) * w);
  }
  return image;
}

void write_png_rgb(const RgbImage& image, const std::filesystem::path& path) {
  PngWriter writer(path);
  png_set_IHDR(writer.png(), writer.info(), image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  std::vector<std::vector<png_byte>> rows(image.height);
  for (int y = 0; y < image.height; ++y) {
    auto begin = image.pixels.begin() + 3 * static_cast<std::size_t>(y) * image.width;
    rows[y].assign(begin, begin + 3 * image.width);
  }
  writer.write_rows(rows);
}

Grid<std::uint16_t> read_png_indexed(const std::filesystem::path& path) {
  PngReader reader(path);
  auto* png = reader.png();
  auto* info = reader.info();
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_PALETTE && color != PNG_COLOR_TYPE_GRAY) {
    throw InputError("label image must be palette-indexed or grayscale: " + path.string());
  }
  if (depth < 8) png_set_packing(png);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  auto rows = reader.read_rows();
  Grid<std::uint16_t> out(w, h);
  const bool wide = depth == 16;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.at(x, y) = wide ? static_cast<std::uint16_t>((rows[y][2 * x] << 8) | rows[y][2 * x + 1])
                          : rows[y][x];
    }
  }
  return out;
}

void write_png_indexed(const Grid<std::uint16_t>& indices, const std::vector<Rgb>& palette,
                       const std::filesystem::path& path) {
  if (palette.empty() || palette.size() > 256) {
    throw ContractError("palette must hold 1..256 entries");
  }
  for (auto v : indices.values) {
    if (v >= palette.size()) throw ContractError("label index outside palette");
  }
  PngWriter writer(path);
  png_set_IHDR(writer.png(), writer.info(), indices.width, indices.height, 8,
               PNG_COLOR_TYPE_PALETTE, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  std::vector<png_color> pal(palette.size());
  for (std::size_t i = 0; i < palette.size(); ++i) {
    pal[i] = {palette[i].r, palette[i].g, palette[i].b};
  }
  png_set_PLTE(writer.png(), writer.info(), pal.data(), static_cast<int>(pal.size()));
  std::vector<std::vector<png_byte>> rows(indices.height, std::vector<png_byte>(indices.width));
  for (int y = 0; y < indices.height; ++y) {
    for (int x = 0; x < indices.width; ++x) rows[y][x] = static_cast<png_byte>(indices.at(x, y));
  }
  writer.write_rows(rows);
}

void write_pgm16(const Grid<double>& values, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "P5\n" << values.width << ' ' << values.height << "\n65535\n";
  std::string buf;
  buf.reserve(values.size() * 2);
  for (double v : values.values) {
    const double c = std::clamp(v, 0.0, 1.0);
    const auto q = static_cast<std::uint16_t>(std::lround(c * 65535.0));
    buf.push_back(static_cast<char>(q >> 8));
    buf.push_back(static_cast<char>(q & 0xff));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

namespace {

// Reads the whitespace-separated header fields of a binary PNM file.
std::vector<int> read_pnm_header(std::istream& in, const std::string& magic,
                                 const std::filesystem::path& path) {
  std::string m;
  in >> m;
  if (m != magic) throw InputError("expected " + magic + " file: " + path.string());
  std::vector<int> fields;
  while (fields.size() < 3) {
    in >> std::ws;
    if (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      continue;
    }
    int v = 0;
    if (!(in >> v)) throw InputError("malformed header: " + path.string());
    fields.push_back(v);
  }
  in.get();  // single whitespace before raster
  return fields;
}

}  // namespace

Grid<std::uint16_t> read_pgm16(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  auto f = read_pnm_header(in, "P5", path);
  if (f[2] != 65535) throw InputError("expected 16-bit PGM: " + path.string());
  Grid<std::uint16_t> out(f[0], f[1]);
  for (auto& v : out.values) {
    const int hi = in.get();
    const int lo = in.get();
    if (!in) throw InputError("truncated PGM: " + path.string());
    v = static_cast<std::uint16_t>((hi << 8) | lo);
  }
  return out;
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  auto f = read_pnm_header(in, "P6", path);
  if (f[2] != 255) throw InputError("only 8-bit PPM supported: " + path.string());
  RgbImage image(f[0], f[1]);
  in.read(reinterpret_cast<char*>(image.pixels.data()),
          static_cast<std::streamsize>(image.pixels.size()));
  if (!in) throw InputError("truncated PPM: " + path.string());
  return image;
}

}  // namespace peace
