#include "dsar/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

namespace dsar {

std::vector<double> synthesize_textures(const TriangleMesh& mesh, const GammaTextureSpec& spec,
                                        uint64_t seed) {
    std::vector<int> owner(mesh.facet_count(), -1);
    for (size_t r = 0; r < spec.regions.size(); ++r) {
        for (int j : spec.regions[r].facets) {
            if (j < 0 || j >= mesh.facet_count())
                throw std::runtime_error("synthesize_textures: facet index out of range");
            if (owner[j] != -1)
                throw std::runtime_error("synthesize_textures: facet " + std::to_string(j) +
                                         " assigned to two regions");
            owner[j] = static_cast<int>(r);
        }
    }
    for (int j = 0; j < mesh.facet_count(); ++j)
        if (owner[j] == -1)
            throw std::runtime_error("synthesize_textures: facet " + std::to_string(j) +
                                     " not covered by any region");

    std::vector<double> s(mesh.facet_count(), 0.0);
    std::mt19937_64 rng(seed);
    for (const GammaRegion& region : spec.regions) {
        if (!(region.shape > 0.0) || !(region.scale > 0.0))
            throw std::runtime_error("synthesize_textures: Gamma parameters must be positive");
        std::gamma_distribution<double> dist(region.shape, region.scale);
        for (int j : region.facets) s[j] = dist(rng);
    }
    return s;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double db_of(double x, double floor_db) {
    const double floor_lin = std::pow(10.0, floor_db / 10.0);
    return 10.0 * std::log10(std::max(x, floor_lin));
}

} // namespace

Image sidelobe_filter(const Image& image, const Image& psf, double peak_threshold_db,
                      PsfDomain domain) {
    if (psf.width < 1 || psf.height < 1) throw std::runtime_error("sidelobe_filter: empty PSF");

    // comparison-domain copies; PSF normalized so its center value is 0
    const double kFloor = -300.0;
    std::vector<double> x(image.size());
    if (domain == PsfDomain::db) {
        for (size_t i = 0; i < image.size(); ++i) x[i] = db_of(image.data[i], kFloor);
    } else {
        x = image.data;
    }

    const int pc_r = psf.height / 2, pc_c = psf.width / 2;
    const double psf_peak = domain == PsfDomain::db ? db_of(psf.max_value(), kFloor) : psf.max_value();
    auto psf_at = [&](int di, int dj) {
        const int r = pc_r + di, c = pc_c + dj;
        if (r < 0 || r >= psf.height || c < 0 || c >= psf.width) return kNegInf; // outside support
        const double v = domain == PsfDomain::db ? db_of(psf.at(r, c), kFloor) : psf.at(r, c);
        return v - psf_peak;
    };

    // reference peaks: local maxima within peak_threshold_db of the image max
    const double img_max = *std::max_element(x.begin(), x.end());
    const double peak_cut = img_max - std::abs(peak_threshold_db);
    std::vector<std::pair<int, int>> peaks;
    for (int r = 0; r < image.height; ++r)
        for (int c = 0; c < image.width; ++c) {
            const double v = x[static_cast<size_t>(r) * image.width + c];
            if (v < peak_cut) continue;
            bool is_max = true;
            for (int dr = -1; dr <= 1 && is_max; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= image.height || cc < 0 || cc >= image.width) continue;
                    if (x[static_cast<size_t>(rr) * image.width + cc] > v) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max) peaks.emplace_back(r, c);
        }
    if (peaks.empty()) return image;

    Image out = image;
    for (int r = 0; r < image.height; ++r)
        for (int c = 0; c < image.width; ++c) {
            const double v = x[static_cast<size_t>(r) * image.width + c];
            bool survives = true;
            for (const auto& [pr, pc] : peaks) {
                if (pr == r && pc == c) { // a peak itself
                    survives = true;
                    break;
                }
                const double skirt = psf_at(std::abs(r - pr), std::abs(c - pc));
                const double ref = x[static_cast<size_t>(pr) * image.width + pc];
                if (!(v - ref > skirt)) {
                    survives = false;
                    break;
                }
            }
            if (!survives) out.at(r, c) = 0.0;
        }
    return out;
}

Image to_db(const Image& linear_image, double floor_db) {
    if (!(floor_db < 0.0)) throw std::runtime_error("to_db: floor must be negative dB");
    Image out(linear_image.width, linear_image.height, ImageDomain::db);
    for (size_t i = 0; i < out.size(); ++i) out.data[i] = db_of(linear_image.data[i], floor_db);
    return out;
}

std::vector<uint8_t> to_gray8(const Image& db_image, double floor_db) {
    std::vector<uint8_t> px(db_image.size(), 0);
    const double top = db_image.max_value();
    const double span = top - floor_db;
    if (span <= 0.0) return px;
    for (size_t i = 0; i < px.size(); ++i) {
        const double t = std::clamp((db_image.data[i] - floor_db) / span, 0.0, 1.0);
        px[i] = static_cast<uint8_t>(std::lround(t * 255.0));
    }
    return px;
}

Image extract_silhouette(const Image& image, double threshold) {
    const int w = image.width, h = image.height;
    Image mask(w, h, ImageDomain::binary);
    std::vector<int> label(image.size(), 0); // 0 background, else component id

    int best_label = 0;
    size_t best_count = 0;
    int next = 1;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (image.at(r, c) < threshold || label[static_cast<size_t>(r) * w + c] != 0) continue;
            // flood one 8-connected component
            size_t count = 0;
            std::queue<std::pair<int, int>> q;
            q.emplace(r, c);
            label[static_cast<size_t>(r) * w + c] = next;
            while (!q.empty()) {
                auto [cr, cc] = q.front();
                q.pop();
                ++count;
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int rr = cr + dr, cc2 = cc + dc;
                        if (rr < 0 || rr >= h || cc2 < 0 || cc2 >= w) continue;
                        size_t idx = static_cast<size_t>(rr) * w + cc2;
                        if (label[idx] == 0 && image.at(rr, cc2) >= threshold) {
                            label[idx] = next;
                            q.emplace(rr, cc2);
                        }
                    }
            }
            if (count > best_count) {
                best_count = count;
                best_label = next;
            }
            ++next;
        }
    if (best_label == 0) return mask; // nothing above threshold

    for (size_t i = 0; i < mask.size(); ++i) mask.data[i] = label[i] == best_label ? 1.0 : 0.0;

    // fill holes: 4-connected flood of zeros from the border; unreached zeros
    // are enclosed and become foreground
    std::vector<uint8_t> outside(mask.size(), 0);
    std::queue<std::pair<int, int>> q;
    auto push_if_zero = [&](int r, int c) {
        size_t idx = static_cast<size_t>(r) * w + c;
        if (mask.data[idx] == 0.0 && !outside[idx]) {
            outside[idx] = 1;
            q.emplace(r, c);
        }
    };
    for (int c = 0; c < w; ++c) {
        push_if_zero(0, c);
        push_if_zero(h - 1, c);
    }
    for (int r = 0; r < h; ++r) {
        push_if_zero(r, 0);
        push_if_zero(r, w - 1);
    }
    while (!q.empty()) {
        auto [r, c] = q.front();
        q.pop();
        if (r > 0) push_if_zero(r - 1, c);
        if (r + 1 < h) push_if_zero(r + 1, c);
        if (c > 0) push_if_zero(r, c - 1);
        if (c + 1 < w) push_if_zero(r, c + 1);
    }
    for (size_t i = 0; i < mask.size(); ++i)
        if (mask.data[i] == 0.0 && !outside[i]) mask.data[i] = 1.0;
    return mask;
}

} // namespace dsar
