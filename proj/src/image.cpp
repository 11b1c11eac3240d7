#include "dsar/image.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <zlib.h>

namespace dsar {

double Image::max_value() const {
    double m = data.empty() ? 0.0 : data[0];
    for (double v : data) m = std::max(m, v);
    return m;
}

double Image::min_value() const {
    double m = data.empty() ? 0.0 : data[0];
    for (double v : data) m = std::min(m, v);
    return m;
}

const char* to_string(ImageDomain d) {
    switch (d) {
        case ImageDomain::linear: return "linear";
        case ImageDomain::db: return "db";
        case ImageDomain::binary: return "binary";
    }
    return "linear";
}

ImageDomain domain_from_string(const std::string& s) {
    if (s == "linear") return ImageDomain::linear;
    if (s == "db") return ImageDomain::db;
    if (s == "binary") return ImageDomain::binary;
    throw std::runtime_error("unknown image domain tag: " + s);
}

namespace {

// Files are defined little-endian; bail out loudly on exotic hosts.
void require_little_endian() {
    const uint16_t probe = 0x0102;
    uint8_t b;
    std::memcpy(&b, &probe, 1);
    if (b != 0x02) throw std::runtime_error("fimg io requires a little-endian host");
}

} // namespace

void write_fimg(const std::string& path, const Image& img) {
    require_little_endian();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f << "FIMG " << img.width << " " << img.height << " " << to_string(img.domain) << "\n";
    std::vector<float> buf(img.data.size());
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(img.data[i]);
    f.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!f) throw std::runtime_error("short write: " + path);
}

Image read_fimg(const std::string& path) {
    require_little_endian();
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string header;
    std::getline(f, header);
    std::istringstream hs(header);
    std::string magic, domain;
    int w = 0, h = 0;
    hs >> magic >> w >> h >> domain;
    if (magic != "FIMG" || w <= 0 || h <= 0)
        throw std::runtime_error("bad fimg header in " + path);
    Image img(w, h, domain_from_string(domain));
    std::vector<float> buf(img.data.size());
    f.read(reinterpret_cast<char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (static_cast<size_t>(f.gcount()) != buf.size() * sizeof(float))
        throw std::runtime_error("truncated fimg payload in " + path);
    for (size_t i = 0; i < buf.size(); ++i) img.data[i] = buf[i];
    return img;
}

namespace {

void put_be32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_chunk(std::vector<uint8_t>& out, const char type[4], const std::vector<uint8_t>& payload) {
    put_be32(out, static_cast<uint32_t>(payload.size()));
    size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    uint32_t crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
    put_be32(out, crc);
}

} // namespace

void write_png_gray(const std::string& path, const std::vector<uint8_t>& pixels,
                    int width, int height) {
    if (static_cast<size_t>(width) * height != pixels.size())
        throw std::runtime_error("png payload size mismatch");

    // raw scanlines, filter byte 0 per row
    std::vector<uint8_t> raw;
    raw.reserve(static_cast<size_t>(height) * (width + 1));
    for (int r = 0; r < height; ++r) {
        raw.push_back(0);
        raw.insert(raw.end(), pixels.begin() + static_cast<size_t>(r) * width,
                   pixels.begin() + static_cast<size_t>(r + 1) * width);
    }
    uLongf comp_cap = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> comp(comp_cap);
    if (compress2(comp.data(), &comp_cap, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
        throw std::runtime_error("zlib compression failed for " + path);
    comp.resize(comp_cap);

    std::vector<uint8_t> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    std::vector<uint8_t> ihdr;
    put_be32(ihdr, static_cast<uint32_t>(width));
    put_be32(ihdr, static_cast<uint32_t>(height));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(0); // grayscale
    ihdr.push_back(0); // compression
    ihdr.push_back(0); // filter
    ihdr.push_back(0); // no interlace
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", comp);
    put_chunk(out, "IEND", {});

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

} // namespace dsar
