#pragma once

#include "mesh.hpp"
#include "rng.hpp"

namespace surfgrow {

/// Builds a small valid triangulation of the requested class with roughly
/// `target_vertex_count` vertices and unit-order extent. All elements are
/// born at frame 0 and rest lengths equal the seed edge lengths.
///
/// Templates: concentric rings (disc, annulus), a twisted strip (Möbius), a
/// torus grid with one quad removed (punctured torus) and a planar grid with
/// square holes (pair of pants, thrice-punctured disc).
Mesh seed_mesh(TopologyClass cls, int target_vertex_count, RngStream& rng,
               LineageSink* sink = nullptr);

/// Smallest target accepted for a class.
int minimal_seed_size(TopologyClass cls) noexcept;

}  // namespace surfgrow
