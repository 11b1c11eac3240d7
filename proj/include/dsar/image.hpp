#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dsar {

// Scalar image, row-major. Rows index slant range (k), columns azimuth (l).
// The value-domain tag mirrors the .fimg header: linear | db | binary.
enum class ImageDomain { linear, db, binary };

struct Image {
    int width = 0;   // N_x columns
    int height = 0;  // N_z rows
    ImageDomain domain = ImageDomain::linear;
    std::vector<double> data; // height*width

    Image() = default;
    Image(int w, int h, ImageDomain d = ImageDomain::linear, double fill = 0.0)
        : width(w), height(h), domain(d), data(static_cast<size_t>(w) * h, fill) {}

    double& at(int row, int col) { return data[static_cast<size_t>(row) * width + col]; }
    double at(int row, int col) const { return data[static_cast<size_t>(row) * width + col]; }
    size_t size() const { return data.size(); }

    double max_value() const;
    double min_value() const;
};

const char* to_string(ImageDomain d);
ImageDomain domain_from_string(const std::string& s);

// .fimg: ASCII header "FIMG <width> <height> <domain>\n" followed by
// little-endian float32 samples, row-major. The float file is the source of
// truth for all exported imagery; PNGs are derived views.
void write_fimg(const std::string& path, const Image& img);
Image read_fimg(const std::string& path);

// 8-bit grayscale PNG (zlib-deflated, filter 0). Values expected in [0,255].
void write_png_gray(const std::string& path, const std::vector<uint8_t>& pixels,
                    int width, int height);

} // namespace dsar
