#pragma once

#include <vector>

#include "vnet/errors.hpp"

namespace vnet {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a);
double distance(Vec2 a, Vec2 b);

struct Rect {
    double width = 0.0;  // km, origin at (0,0)
    double height = 0.0;
    double area() const { return width * height; }
    bool contains(Vec2 p) const {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    }
};

using Polygon = std::vector<Vec2>; // convex, CCW

double polygon_area(const Polygon& p);

// Clip a convex polygon against the half-plane n.p <= c (keeps the <= side).
Polygon clip_halfplane(const Polygon& poly, Vec2 n, double c);

struct Cell {
    int site_index = -1;
    Vec2 site;
    Polygon boundary;
    double area = 0.0;
    double circumradius = 0.0; // max distance site -> boundary vertex
};

// Voronoi cells of the sites clipped to the region rectangle, by pairwise
// half-plane intersection. Sites closer than 1e-9 km are rejected.
std::vector<Cell> voronoi_tessellation(const std::vector<Vec2>& sites, const Rect& region);

// Exact area of cell ∩ disc(cell.site, u), via per-edge triangle/sector
// decomposition about the site (interior to its own Voronoi cell).
double cell_disc_area(const Cell& cell, double u);

// In-cell serving-distance density (1/A_b) dA(u)/du, by central finite
// difference with step max(1e-4 km, 1e-3 u). Zero beyond the circumradius.
double cell_distance_pdf(const Cell& cell, double u);

// Serving-distance density 2u/q^2 of a UE uniform on a disc of radius q.
double circular_distance_pdf(double u, double q);

// Interferer-angle density, uniform on [0, 2pi).
double angle_pdf(double theta);

// UE-to-interferer distance given serving distance d, site separation d_bj
// and angle theta between them (law of cosines).
double interferer_distance(double d, double d_bj, double theta);

} // namespace vnet
