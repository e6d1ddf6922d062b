#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fekete/scenario.hpp"

namespace fekete {

// Scenarios compiled into the library; the same documents live in scenarios/.
inline const std::vector<std::pair<std::string, std::string>>& builtin_scenario_texts() {
  static const std::vector<std::pair<std::string, std::string>> texts = {
      {"c10_circle", R"({
  "version": 1,
  "name": "c10_circle",
  "description": "Cycle graph C10 on the unit circle from an annulus start; settles evenly spaced.",
  "manifold": {"kind": "unit_circle"},
  "graph": {"builder": "cycle", "n": 10},
  "init": {"seed": 2, "r_min": 0.2, "r_max": 1.8, "ordering": "sorted"}
})"},
      {"ellipse_c12", R"({
  "version": 1,
  "name": "ellipse_c12",
  "description": "Cycle graph C12 on the ellipse with semi-axes 2 and 1.",
  "manifold": {"kind": "ellipse", "a": 2.0},
  "graph": {"builder": "cycle", "n": 12},
  "init": {"seed": 1, "ordering": "sorted"}
})"},
      {"k5_sphere", R"({
  "version": 1,
  "name": "k5_sphere",
  "description": "Complete graph K5 on the unit sphere; settles on a triangular bipyramid.",
  "manifold": {"kind": "unit_sphere"},
  "graph": {"builder": "complete", "n": 5},
  "init": {"seed": 1}
})"},
      {"k6_circle", R"({
  "version": 1,
  "name": "k6_circle",
  "description": "Complete graph K6 on the unit circle; has no equilibrium and keeps moving.",
  "manifold": {"kind": "unit_circle"},
  "graph": {"builder": "complete", "n": 6},
  "init": {"seed": 1}
})"},
      {"thomsen_circle", R"({
  "version": 1,
  "name": "thomsen_circle",
  "description": "Thomsen graph K33 from a centrally symmetric start with alternating parts; evens out and rotates.",
  "manifold": {"kind": "unit_circle"},
  "graph": {"builder": "thomsen"},
  "init": {"seed": 1, "ordering": "sorted", "cyclic_order": [1, 4, 2, 5, 3, 6], "central_symmetry": true}
})"},
      {"moser_circle", R"({
  "version": 1,
  "name": "moser_circle",
  "description": "Moser spindle on the unit circle.",
  "manifold": {"kind": "unit_circle"},
  "graph": {"builder": "moser_spindle"},
  "init": {"seed": 2, "ordering": "sorted"}
})"},
      {"weighted_c8", R"({
  "version": 1,
  "name": "weighted_c8",
  "description": "C8 with weight 1/4 on edges (1,2), (3,4), (5,6), (7,8); gaps settle in ratio 1:4.",
  "manifold": {"kind": "unit_circle"},
  "graph": {"builder": "cycle", "n": 8, "weights": {"edges": [[1, 2, 0.25], [3, 4, 0.25], [5, 6, 0.25], [7, 8, 0.25]]}},
  "init": {"seed": 1, "ordering": "sorted"}
})"},
      {"se2_ring", R"({
  "version": 1,
  "name": "se2_ring",
  "description": "Eight planar rigid bodies on C8 turning to face the origin.",
  "manifold": {"kind": "se2_circle", "variant": "face_origin"},
  "graph": {"builder": "cycle", "n": 8},
  "init": {
    "states": [[-2, 2], [-1, 2], [1, 2], [2, 2], [2, -2], [1, -2], [-1, -2], [-2, -2]],
    "attitudes": [-1.5707963267948966, 0, 3.141592653589793, -1.5707963267948966,
                  1.5707963267948966, 3.141592653589793, 0, 1.5707963267948966]
  }
})"},
      {"se2_ring_outward", R"({
  "version": 1,
  "name": "se2_ring_outward",
  "description": "Eight planar rigid bodies on C8 turning to face away from the origin.",
  "manifold": {"kind": "se2_circle", "variant": "face_outward"},
  "graph": {"builder": "cycle", "n": 8},
  "init": {
    "states": [[-0.5, 0.5], [-0.25, 0.5], [0.25, 0.5], [0.5, 0.5], [0.5, -0.5], [0.25, -0.5], [-0.25, -0.5], [-0.5, -0.5]],
    "attitudes": [-1.5707963267948966, 0, 3.141592653589793, -1.5707963267948966,
                  1.5707963267948966, 3.141592653589793, 0, 1.5707963267948966]
  }
})"},
      {"se2_ring_tangent", R"({
  "version": 1,
  "name": "se2_ring_tangent",
  "description": "Eight planar rigid bodies on C8 aligning their heading with the circle tangent.",
  "manifold": {"kind": "se2_circle", "variant": "tangent_aligned"},
  "graph": {"builder": "cycle", "n": 8},
  "init": {
    "states": [[-2, 2], [-1, 2], [1, 2], [2, 2], [2, -2], [1, -2], [-1, -2], [-2, -2]],
    "attitudes": [-1.5707963267948966, 0, 3.141592653589793, -1.5707963267948966,
                  1.5707963267948966, 3.141592653589793, 0, 1.5707963267948966]
  }
})"},
      {"se3_k5", R"({
  "version": 1,
  "name": "se3_k5",
  "description": "Five rigid bodies on K5 over the sphere, body axis e3 turning towards the origin.",
  "manifold": {"kind": "se3_sphere"},
  "graph": {"builder": "complete", "n": 5},
  "init": {
    "states": [[-1.5, 0, 0], [1.5, 0, -1.5], [1.5, 0, 1.5], [-0.5, -1.5, -0.125], [-0.5, 1.5, -0.125]],
    "attitudes": [[1, 0, 1], [-1, 0, 1], [-0.1765, 0, -0.0351], [0, 1, 1], [0, -1, 1]]
  }
})"},
      {"line_circle", R"({
  "version": 1,
  "name": "line_circle",
  "description": "Line graph on five vertices; acyclic graphs have no circle equilibrium.",
  "manifold": {"kind": "unit_circle"},
  "graph": {"builder": "line", "n": 5},
  "init": {"seed": 1},
  "integrator": {"t_max": 50}
})"},
  };
  return texts;
}

inline std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : builtin_scenario_texts()) out.push_back(name);
  return out;
}

inline bool is_builtin(const std::string& name) {
  for (const auto& [n, text] : builtin_scenario_texts())
    if (n == name) return true;
  return false;
}

inline Scenario builtin_scenario(const std::string& name) {
  for (const auto& [n, text] : builtin_scenario_texts())
    if (n == name) return parse_scenario(text, "builtin:" + name);
  throw ValidationError("name", "no builtin scenario '" + name + "'");
}

}  // namespace fekete
