#include "vnet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vnet {

double norm(Vec2 a) { return std::hypot(a.x, a.y); }
double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double polygon_area(const Polygon& p) {
    double s = 0.0;
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = p[i];
        const Vec2& b = p[(i + 1) % n];
        s += cross(a, b);
    }
    return 0.5 * s;
}

Polygon clip_halfplane(const Polygon& poly, Vec2 n, double c) {
    Polygon out;
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % m];
        const double da = dot(n, a) - c;
        const double db = dot(n, b) - c;
        if (da <= 0.0) {
            out.push_back(a);
            if (db > 0.0) {
                const double t = da / (da - db);
                out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
            }
        } else if (db <= 0.0) {
            const double t = da / (da - db);
            out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    }
    return out;
}

std::vector<Cell> voronoi_tessellation(const std::vector<Vec2>& sites, const Rect& region) {
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (!region.contains(sites[i]))
            throw ValidationError("voronoi_tessellation: site " + std::to_string(i) +
                                  " outside region");
        for (std::size_t j = i + 1; j < sites.size(); ++j)
            if (distance(sites[i], sites[j]) < 1e-9)
                throw ValidationError("voronoi_tessellation: degenerate sites " +
                                      std::to_string(i) + "," + std::to_string(j) +
                                      " (separation < 1e-9 km)");
    }
    std::vector<Cell> cells(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i) {
        Polygon poly = {{0.0, 0.0}, {region.width, 0.0}, {region.width, region.height}, {0.0, region.height}};
        for (std::size_t j = 0; j < sites.size(); ++j) {
            if (j == i) continue;
            // |p - si|^2 <= |p - sj|^2  <=>  (sj - si).p <= (|sj|^2 - |si|^2)/2
            const Vec2 n = sites[j] - sites[i];
            const double c = 0.5 * (dot(sites[j], sites[j]) - dot(sites[i], sites[i]));
            poly = clip_halfplane(poly, n, c);
            if (poly.empty()) break;
        }
        Cell& cell = cells[i];
        cell.site_index = static_cast<int>(i);
        cell.site = sites[i];
        cell.boundary = poly;
        cell.area = polygon_area(poly);
        cell.circumradius = 0.0;
        for (const Vec2& v : poly)
            cell.circumradius = std::max(cell.circumradius, distance(v, sites[i]));
    }
    return cells;
}

namespace {

// Signed area of triangle(0, a, b) ∩ disc(0, r). Splits [a,b] at circle
// crossings; inside pieces contribute cross/2, outside pieces an arc sector.
double edge_disc_contribution(Vec2 a, Vec2 b, double r) {
    const Vec2 d = b - a;
    const double dd = dot(d, d);
    if (dd == 0.0) return 0.0;
    double ts[4] = {0.0, 1.0, 1.0, 1.0};
    int nt = 2;
    // |a + t d|^2 = r^2
    const double pb = dot(a, d) / dd;
    const double pc = (dot(a, a) - r * r) / dd;
    const double disc = pb * pb - pc;
    if (disc > 0.0) {
        const double sq = std::sqrt(disc);
        for (double t : {-pb - sq, -pb + sq})
            if (t > 0.0 && t < 1.0) ts[nt++] = t;
    }
    std::sort(ts, ts + nt);
    double area = 0.0;
    for (int i = 0; i + 1 < nt; ++i) {
        const double t0 = ts[i], t1 = ts[i + 1];
        if (t1 - t0 <= 0.0) continue;
        const Vec2 p0{a.x + t0 * d.x, a.y + t0 * d.y};
        const Vec2 p1{a.x + t1 * d.x, a.y + t1 * d.y};
        const double tm = 0.5 * (t0 + t1);
        const Vec2 pm{a.x + tm * d.x, a.y + tm * d.y};
        // Strictly inside: a tangent edge touches the circle at its midpoint
        // and must fall through to the sector branch.
        if (dot(pm, pm) < r * r) {
            area += 0.5 * cross(p0, p1);
        } else {
            area += 0.5 * r * r * std::atan2(cross(p0, p1), dot(p0, p1));
        }
    }
    return area;
}

} // namespace

double cell_disc_area(const Cell& cell, double u) {
    if (u <= 0.0) return 0.0;
    double area = 0.0;
    const std::size_t n = cell.boundary.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = cell.boundary[i] - cell.site;
        const Vec2 b = cell.boundary[(i + 1) % n] - cell.site;
        area += edge_disc_contribution(a, b, u);
    }
    return area;
}

double cell_distance_pdf(const Cell& cell, double u) {
    if (u < 0.0 || cell.area <= 0.0) return 0.0;
    const double h = std::max(1e-4, 1e-3 * u);
    const double lo = std::max(0.0, u - h);
    const double hi = u + h;
    const double slope = (cell_disc_area(cell, hi) - cell_disc_area(cell, lo)) / (hi - lo);
    return std::max(0.0, slope / cell.area);
}

double circular_distance_pdf(double u, double q) {
    if (q <= 0.0) throw ValidationError("circular_distance_pdf: coverage_radius must be > 0");
    if (u < 0.0 || u > q) return 0.0;
    return 2.0 * u / (q * q);
}

double angle_pdf(double theta) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    if (theta < 0.0 || theta >= two_pi) return 0.0;
    return 1.0 / two_pi;
}

double interferer_distance(double d, double d_bj, double theta) {
    const double r2 = d * d + d_bj * d_bj - 2.0 * d * d_bj * std::cos(theta);
    return std::sqrt(std::max(0.0, r2));
}

} // namespace vnet
