#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "lbsolve/geometry.hpp"

namespace lbs {

// Fifteen plane ellipses: a large outer ellipse bounding the north-pole
// island and fourteen small inner ellipses on a 5 x 3 lattice. Anchors sit
// at the ellipse centres (outer anchor at 6).
std::shared_ptr<const IslandDomain> ellipse_field(std::size_t n);

// m elliptical islands spread over the sphere on a Fibonacci lattice, with
// random axes and orientations. Island 0 is centred on the north pole.
std::shared_ptr<const IslandDomain> ellipse_array(std::size_t m, std::size_t n, std::uint64_t seed);

}  // namespace lbs
