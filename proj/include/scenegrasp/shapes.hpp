#pragma once

#include <functional>

#include "scenegrasp/mesh.hpp"

namespace scenegrasp::shapes {

/// Closed, outward-oriented box with 12 triangles.
TriMesh box(const Vec3& min, const Vec3& max, int label = kUnlabeled);

/// Height-field grid over [x0,x1]×[y0,y1] with `step` spacing; z = height(x, y).
TriMesh height_field(double x0, double y0, double x1, double y1, double step,
                     const std::function<double(double, double)>& height, int label = kUnlabeled);

/// Solid block whose top is a grid at spacing `step` and whose four sides
/// run down to z = bottom. Border vertices of the top are shared with the
/// sides; the bottom is left open.
TriMesh block(double x0, double y0, double x1, double y1, double bottom, double top, double step,
              int label = kUnlabeled);

/// Latitude/longitude sphere with vertices at both poles; closed.
TriMesh uv_sphere(const Vec3& center, double radius, int slices = 24, int stacks = 12);

/// Subdivided icosahedron projected to the sphere; closed.
TriMesh icosphere(const Vec3& center, double radius, int subdivisions = 2);

}  // namespace scenegrasp::shapes
