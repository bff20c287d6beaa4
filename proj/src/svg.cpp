#include "anyangle/svg.hpp"

#include <string>

namespace anyangle {

std::string render_svg(const OccupancyGrid& grid, const std::vector<Coord>& path) {
  const int64_t w = grid.width(), h = grid.height();
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"-1 -1 " +
         std::to_string(w + 2) + " " + std::to_string(h + 2) + "\" width=\"" +
         std::to_string(16 * (w + 2)) + "\" height=\"" + std::to_string(16 * (h + 2)) + "\">\n";
  out += "  <g fill=\"#444\" stroke=\"none\">\n";
  for (int64_t cy = 0; cy < h; ++cy)
    for (int64_t cx = 0; cx < w; ++cx)
      if (grid.is_occupied(cx, cy))
        out += "    <rect x=\"" + std::to_string(cx) + "\" y=\"" + std::to_string(h - cy - 1) +
               "\" width=\"1\" height=\"1\"/>\n";
  out += "  </g>\n";
  if (!path.empty()) {
    out += "  <polyline fill=\"none\" stroke=\"#d33\" stroke-width=\"0.12\" points=\"";
    for (size_t i = 0; i < path.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(path[i].x) + "," + std::to_string(h - path[i].y);
    }
    out += "\"/>\n";
    auto marker = [&](Coord p, const char* fill) {
      out += "  <circle cx=\"" + std::to_string(p.x) + "\" cy=\"" + std::to_string(h - p.y) +
             "\" r=\"0.25\" fill=\"" + std::string(fill) + "\"/>\n";
    };
    marker(path.back(), "#2a2");   // start (results arrive goal-first)
    marker(path.front(), "#22d");  // goal
  }
  out += "</svg>\n";
  return out;
}

}  // namespace anyangle
