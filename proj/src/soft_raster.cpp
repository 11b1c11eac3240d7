#include "dsar/soft_raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dsar {

void RenderParams::check() const {
    if (!(sigma > 0.0) || !(gamma > 0.0) || !(sigma_g > 0.0))
        throw std::runtime_error("RenderParams: sigma, gamma, sigma_g must all be positive");
}

bool barycentric(const FacetScreen2D& f, const Vec2& p, Barycentric& out) {
    const Vec2 e1 = f.v[0] - f.v[2];
    const Vec2 e2 = f.v[1] - f.v[2];
    const double det = e1.cross(e2); // 2x signed area
    if (std::abs(det) < kScreenDegenerateTol) return false;
    const Vec2 d = p - f.v[2];
    out.b[0] = d.cross(e2) / det;
    out.b[1] = e1.cross(d) / det;
    out.b[2] = 1.0 - out.b[0] - out.b[1];
    return true;
}

EdgeDistance point_triangle_distance(const FacetScreen2D& f, const Vec2& p) {
    EdgeDistance best;
    best.d2 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        const Vec2 a = f.v[k];
        const Vec2 e = f.v[(k + 1) % 3] - a;
        const double q = e.norm2();
        double t = q > 0.0 ? (p - a).dot(e) / q : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const Vec2 diff = a + e * t - p;
        const double d2 = diff.norm2();
        if (d2 < best.d2) {
            best.d2 = d2;
            best.edge = k;
            best.t = t;
        }
    }
    best.dist = std::sqrt(best.d2);

    Barycentric b;
    best.inside = barycentric(f, p, b) && b.b[0] >= 0.0 && b.b[1] >= 0.0 && b.b[2] >= 0.0;
    return best;
}

namespace {

// sigmoid with saturation instead of overflow
double stable_sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

} // namespace

double facet_probability(double dist, bool inside, double sigma) {
    const double sign = inside ? 1.0 : -1.0;
    return stable_sigmoid(sign * dist * dist / sigma);
}

double facet_probability_dd2(double dist, bool inside, double sigma) {
    const double sign = inside ? 1.0 : -1.0;
    const double t = sign * dist * dist / sigma;
    const double e = std::exp(-std::abs(t)); // delta*(1-delta) = e/(1+e)^2
    const double s = 1.0 + e;
    return (e / (s * s)) * (sign / sigma);
}

void point_triangle_distance_backward(const FacetScreen2D& f, const Vec2& p,
                                      const EdgeDistance& ed, Vec2 grad[3]) {
    grad[0] = grad[1] = grad[2] = Vec2{0, 0};
    if (ed.edge < 0) return;
    const int ka = ed.edge, kb = (ed.edge + 1) % 3;
    const Vec2 a = f.v[ka], b = f.v[kb];
    const Vec2 e = b - a;
    const double q = e.norm2();
    if (q <= 0.0) {
        // both endpoints coincide; d^2 = |a - p|^2
        grad[ka] = (a - p) * 2.0;
        return;
    }
    const double t_raw = (p - a).dot(e) / q;
    if (t_raw <= 0.0) {
        grad[ka] = (a - p) * 2.0;
    } else if (t_raw >= 1.0) {
        grad[kb] = (b - p) * 2.0;
    } else {
        // interior: d^2 = cross(e, w)^2 / |e|^2 with w = p - a
        const Vec2 w = p - a;
        const double c = e.cross(w);
        const double d2 = c * c / q;
        const Vec2 dc_da{e.y - w.y, w.x - e.x};
        const Vec2 dc_db{w.y, -w.x};
        grad[ka] = (dc_da * (2.0 * c) + e * (2.0 * d2)) / q;
        grad[kb] = (dc_db * (2.0 * c) - e * (2.0 * d2)) / q;
    }
}

DepthSample normalized_depth(const FacetScreen2D& f, const Barycentric& b, double z_near,
                             double z_far) {
    if (!(z_near < z_far)) throw std::runtime_error("normalized_depth: requires z_near < z_far");
    for (double zv : f.depth)
        if (!(zv > 0.0)) throw std::runtime_error("normalized_depth: nonpositive vertex depth");
    const double inv = b.b[0] / f.depth[0] + b.b[1] / f.depth[1] + b.b[2] / f.depth[2];
    DepthSample s;
    s.z_actual = 1.0 / inv;
    s.z_norm = (z_far - s.z_actual) / (z_far - z_near);
    return s;
}

} // namespace dsar
