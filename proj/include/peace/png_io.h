#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "peace/grid.h"
#include "peace/image.h"

namespace peace {

RgbImage read_png_rgb(const std::filesystem::path& path);
void write_png_rgb(const RgbImage& image, const std::filesystem::path& path);

/// Palette-indexed PNG: each pixel value is the palette index (class id).
Grid<std::uint16_t> read_png_indexed(const std::filesystem::path& path);
void write_png_indexed(const Grid<std::uint16_t>& indices, const std::vector<Rgb>& palette,
                       const std::filesystem::path& path);

/// 16-bit binary PGM (P5, maxval 65535, big-endian). Values in [0,1] are
/// scaled by 65535 and rounded.
void write_pgm16(const Grid<double>& values, const std::filesystem::path& path);
Grid<std::uint16_t> read_pgm16(const std::filesystem::path& path);

RgbImage read_ppm(const std::filesystem::path& path);

}  // namespace peace
