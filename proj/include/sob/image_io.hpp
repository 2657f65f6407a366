#pragma once

#include <string>
#include <vector>

#include "sob/image.hpp"

namespace sob {

/// W x H real-valued raster, the carrier for PFM disparity files.
struct FloatMap {
    int width = 0;
    int height = 0;
    std::vector<float> values; // row-major, top row first

    float& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
    float at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
};

// Dispatches on extension: .pgm/.ppm/.png
Image read_image(const std::string& path);
void write_image(const std::string& path, const Image& img);

Image read_pnm(const std::string& path); // P5 / P6, maxval <= 255
void write_pgm(const std::string& path, const Image& img);
void write_ppm(const std::string& path, const Image& img);

Image read_png(const std::string& path);
void write_png(const std::string& path, const Image& img);

// PFM: little-endian (scale -1.0), rows stored bottom-up as in the
// Middlebury tooling.
FloatMap read_pfm(const std::string& path);
void write_pfm(const std::string& path, const FloatMap& map);

} // namespace sob
