#pragma once

#include <cstdint>
#include <vector>

#include "dsar/image.hpp"
#include "dsar/mesh.hpp"

namespace dsar {

// Per-region Gamma(k, theta) draws for facet scattering. Regions must be
// disjoint and together cover every facet index.
struct GammaRegion {
    double shape = 1.0;
    double scale = 1.0;
    std::vector<int> facets;
};

struct GammaTextureSpec {
    std::vector<GammaRegion> regions;
};

std::vector<double> synthesize_textures(const TriangleMesh& mesh, const GammaTextureSpec& spec,
                                        uint64_t seed);

enum class PsfDomain { db, linear };

// Sidelobe suppression against a point-spread function. The reference peak
// set is the local maxima (8-neighborhood) no more than `peak_threshold_db`
// below the image maximum; a pixel survives only if it clears the PSF skirt
// of every reference peak. Peaks always survive; an empty peak set leaves
// the image unchanged. Comparison runs in dB by default (PSF normalized so
// its center is 0); PsfDomain::linear compares raw differences instead.
Image sidelobe_filter(const Image& image, const Image& psf, double peak_threshold_db = 30.0,
                      PsfDomain domain = PsfDomain::db);

// 10*log10(max(x, 10^(floor/10))), tagged as a dB image.
Image to_db(const Image& linear_image, double floor_db);

// Linear remap [floor_db, max] -> [0, 255] of a dB image for 8-bit export.
std::vector<uint8_t> to_gray8(const Image& db_image, double floor_db);

// Threshold, keep the largest 8-connected component, fill enclosed holes.
Image extract_silhouette(const Image& image, double threshold);

} // namespace dsar
