#pragma once

// Planar polyline predicates used by the surface monitors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "wavebif/spectral.hpp"

namespace wavebif {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

namespace detail {

inline double orient(const Point2& a, const Point2& b, const Point2& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

}  // namespace detail

/// Closed-segment intersection test.
inline bool segments_intersect(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
    using detail::orient;
    const double d1 = orient(q1, q2, p1);
    const double d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1);
    const double d4 = orient(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    if (d1 == 0 && detail::on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && detail::on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && detail::on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && detail::on_segment(p1, p2, q2)) return true;
    return false;
}

/// Pairs (i, j), i < j, of non-adjacent segments [p_i, p_{i+1}] and [p_j, p_{j+1}] of an open polyline
/// that intersect. Segments are swept in order of their left end with an active list pruned by x-extent.
/// `keep(i, j)` filters which pairs are reported.
template <class Keep>
std::vector<std::pair<std::size_t, std::size_t>> polyline_intersections(const std::vector<Point2>& pts, Keep keep) {
    std::vector<std::pair<std::size_t, std::size_t>> hits;
    if (pts.size() < 4) return hits;
    const std::size_t nseg = pts.size() - 1;
    std::vector<std::size_t> order(nseg);
    std::iota(order.begin(), order.end(), 0);
    auto xmin = [&](std::size_t s) { return std::min(pts[s].x, pts[s + 1].x); };
    auto xmax = [&](std::size_t s) { return std::max(pts[s].x, pts[s + 1].x); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xmin(a) < xmin(b); });
    std::vector<std::size_t> active;
    for (std::size_t s : order) {
        const double left = xmin(s);
        active.erase(std::remove_if(active.begin(), active.end(), [&](std::size_t a) { return xmax(a) < left; }),
                     active.end());
        for (std::size_t a : active) {
            const std::size_t i = std::min(a, s);
            const std::size_t j = std::max(a, s);
            if (j == i + 1) continue;
            if (!keep(i, j)) continue;
            if (segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1])) hits.emplace_back(i, j);
        }
        active.push_back(s);
    }
    return hits;
}

/// Reference O(n^2) version of polyline_intersections, for testing.
inline std::vector<std::pair<std::size_t, std::size_t>> polyline_intersections_bruteforce(const std::vector<Point2>& pts) {
    std::vector<std::pair<std::size_t, std::size_t>> hits;
    if (pts.size() < 4) return hits;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        for (std::size_t j = i + 2; j + 1 < pts.size(); ++j)
            if (segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1])) hits.emplace_back(i, j);
    std::sort(hits.begin(), hits.end());
    return hits;
}

/// Surface curve x -> (x + C w(x), w(x) + h) sampled over `periods` periods starting at -L * (periods / 2),
/// with `per_period` points per period.
inline std::vector<Point2> sample_surface(const PeriodicEvenFunction& w, int per_period, int periods = 3) {
    const auto& g = w.grid();
    const PeriodicOddFunction cw = hilbert_strip(w);
    const int n = per_period * periods;
    const double start = -g.L() * (periods / 2);
    std::vector<Point2> pts(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double x = start + g.L() * static_cast<double>(i) / per_period;
        pts[i] = {x + cw(x), w(x) + g.h()};
    }
    return pts;
}

struct SurfaceGeometry {
    bool self_intersecting = false;
    bool overhanging = false;
    double min_depth = 0.0;         // min (w + h)
    double min_horizontal_speed = 0.0;  // min (1 + C w')
};

/// Geometric monitors of the surface of w on a sample of `per_period` points per period. Only
/// crossings involving the middle of three periods are counted, so periodic images do not double count.
inline SurfaceGeometry surface_geometry(const PeriodicEvenFunction& w, int per_period = 0) {
    const auto& g = w.grid();
    if (per_period <= 0) per_period = std::max(256, 8 * g.N());
    SurfaceGeometry out;
    const auto pts = sample_surface(w, per_period, 3);
    const std::size_t lo = per_period;
    const std::size_t hi = 2 * static_cast<std::size_t>(per_period);
    auto in_middle = [&](std::size_t s) { return s >= lo && s < hi; };
    out.self_intersecting =
        !polyline_intersections(pts, [&](std::size_t i, std::size_t j) { return in_middle(i) || in_middle(j); }).empty();
    const auto [vy, wp] = surface_gradient_V(w);
    double min_depth = std::numeric_limits<double>::infinity();
    double min_vy = std::numeric_limits<double>::infinity();
    for (int i = 0; i < per_period; ++i) {
        const double x = g.L() * static_cast<double>(i) / per_period;
        min_depth = std::min(min_depth, w(x) + g.h());
        min_vy = std::min(min_vy, vy(x));
    }
    out.min_depth = min_depth;
    out.min_horizontal_speed = min_vy;
    out.overhanging = min_vy < 0.0;
    return out;
}

}  // namespace wavebif
