#pragma once

#include "dsar/vec.hpp"

namespace dsar {

// Softness scalars of the probability-map renderer. sigma and gamma are the
// sharpness/occlusion constants; sigma_g is the energy-spread deviation in
// slant-range cells. cull_eps and gauss_cutoff bound the support used when
// skipping far-away facets; they are numerical knobs and may not change any
// rendered value by more than 1e-6.
struct RenderParams {
    double sigma = 1e-5;
    double gamma = 1e-5;
    double sigma_g = 0.5;
    double cull_eps = 1e-9;
    double gauss_cutoff = 8.0;

    void check() const; // throws unless sigma, gamma, sigma_g > 0
};

// A facet projected to one of the two planes. Coordinates are in cell units
// of that plane; depth[] carries the per-vertex radar-frame depths used by
// harmonic interpolation (projection plane only).
struct FacetScreen2D {
    Vec2 v[3];
    double depth[3] = {0, 0, 0};
    bool valid = true; // false when the projected facet is degenerate
};

inline constexpr double kScreenDegenerateTol = 1e-12; // on 2x signed area

struct Barycentric {
    double b[3] = {0, 0, 0};
};

// false when the projected facet is degenerate (|2A| < tol); callers treat
// such facets as zero-probability everywhere.
bool barycentric(const FacetScreen2D& f, const Vec2& p, Barycentric& out);

struct EdgeDistance {
    double dist = 0.0;
    double d2 = 0.0;
    int edge = -1;    // nearest edge index; ties pick the lowest
    double t = 0.0;   // clamped parameter along that edge
    bool inside = false;
};

// Closest clamped distance from p to the triangle's edges plus the
// inside/outside indicator.
EdgeDistance point_triangle_distance(const FacetScreen2D& f, const Vec2& p);

// sigmoid(sign * d^2 / sigma), saturating (never NaN) for extreme arguments.
double facet_probability(double dist, bool inside, double sigma);
// d(probability)/d(d^2) with the same saturation behavior.
double facet_probability_dd2(double dist, bool inside, double sigma);

// Gradient of the squared edge distance w.r.t. the three screen vertices.
// Clamped endpoints use the one-sided derivative (no flow through the clamp).
void point_triangle_distance_backward(const FacetScreen2D& f, const Vec2& p,
                                      const EdgeDistance& ed, Vec2 grad[3]);

struct DepthSample {
    double z_norm = 0.0;
    double z_actual = 0.0;
};

// Harmonic depth interpolation and its normalization against the radar
// near/far planes. Throws if any vertex depth is nonpositive.
DepthSample normalized_depth(const FacetScreen2D& f, const Barycentric& b, double z_near,
                             double z_far);

} // namespace dsar
