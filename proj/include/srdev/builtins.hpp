#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "srdev/manifold.hpp"

namespace srdev {

/// Named structure with a default starting point.
struct BuiltinStructure {
  std::string name;
  FrameField frame;
  std::vector<double> q0;
};

/// heisenberg3, contact-halfplane, goursat-halfplane, engel-halfplane
/// (same frame as goursat-halfplane), free23, flat-plane, hyperbolic-plane,
/// sphere-patch. Throws MalformedSpec for an unknown name.
BuiltinStructure builtin(std::string_view name);
const std::vector<std::string>& builtin_names();

/// The half-plane frame (y d/dx, y d/dy) on y > 0.
FrameField halfplane_frame();

}  // namespace srdev
