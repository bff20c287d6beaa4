#include "anyangle/movingai.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace anyangle {

namespace {

// Splits text into lines, tolerating CRLF endings.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == text.size()) break;
    pos = nl + 1;
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

int64_t parse_int(std::string_view s, const char* what) {
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error(std::string("malformed-header: bad ") + what);
  return value;
}

}  // namespace

OccupancyGrid parse_map(std::string_view text, MapCharPolicy policy) {
  auto lines = split_lines(text);
  size_t li = 0;
  auto next_line = [&]() -> std::string_view {
    if (li >= lines.size())
      throw std::runtime_error("malformed-header: unexpected end of file");
    return lines[li++];
  };

  auto type_fields = split_fields(next_line());
  if (type_fields.size() != 2 || type_fields[0] != "type")
    throw std::runtime_error("malformed-header: expected 'type' line");

  // height and width may appear in either order.
  int64_t width = -1, height = -1;
  for (int i = 0; i < 2; ++i) {
    auto f = split_fields(next_line());
    if (f.size() != 2)
      throw std::runtime_error("malformed-header: expected height/width line");
    if (f[0] == "height")
      height = parse_int(f[1], "height");
    else if (f[0] == "width")
      width = parse_int(f[1], "width");
    else
      throw std::runtime_error("malformed-header: expected height/width line");
  }
  if (width < 1 || height < 1)
    throw std::runtime_error("malformed-header: missing height or width");

  if (split_fields(next_line()) != std::vector<std::string_view>{"map"})
    throw std::runtime_error("malformed-header: expected 'map' line");

  if (lines.size() - li < size_t(height))
    throw std::runtime_error("dimension-mismatch: fewer rows than height");

  OccupancyGrid grid(width, height);
  for (int64_t row = 0; row < height; ++row) {
    std::string_view cells = lines[li + row];
    if (int64_t(cells.size()) != width)
      throw std::runtime_error("dimension-mismatch: row " + std::to_string(row + 1) +
                               " has " + std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(width));
    int64_t cy = height - 1 - row;  // first file row is the top band
    for (int64_t cx = 0; cx < width; ++cx) {
      bool occupied;
      switch (cells[cx]) {
        case '.':
        case 'G': occupied = false; break;
        case '@':
        case 'O':
        case 'T': occupied = true; break;
        case 'S': occupied = !policy.swamp_passable; break;
        case 'W': occupied = !policy.water_passable; break;
        default:
          throw std::runtime_error(std::string("unknown-cell-char: '") + cells[cx] +
                                   "' at row " + std::to_string(row + 1) + ", column " +
                                   std::to_string(cx + 1));
      }
      if (occupied) grid.set_occupied(cx, cy, true);
    }
  }
  return grid;
}

std::string serialize_map(const OccupancyGrid& grid) {
  std::string out;
  out.reserve(size_t(grid.width() + 1) * size_t(grid.height()) + 64);
  out += "type octile\n";
  out += "height " + std::to_string(grid.height()) + "\n";
  out += "width " + std::to_string(grid.width()) + "\n";
  out += "map\n";
  for (int64_t row = 0; row < grid.height(); ++row) {
    int64_t cy = grid.height() - 1 - row;
    for (int64_t cx = 0; cx < grid.width(); ++cx)
      out += grid.is_occupied(cx, cy) ? '@' : '.';
    out += '\n';
  }
  return out;
}

std::vector<Scenario> parse_scen(std::string_view text) {
  auto lines = split_lines(text);
  size_t li = 0;
  while (li < lines.size() && split_fields(lines[li]).empty()) ++li;
  if (li >= lines.size())
    return {};  // empty body
  auto header = split_fields(lines[li]);
  if (header.empty() || header[0] != "version")
    throw std::runtime_error("malformed-header: expected version line");
  ++li;

  std::vector<Scenario> scens;
  for (; li < lines.size(); ++li) {
    auto f = split_fields(lines[li]);
    if (f.empty()) continue;
    if (f.size() < 9)
      throw std::runtime_error("malformed-line: line " + std::to_string(li + 1) +
                               " has " + std::to_string(f.size()) + " fields, expected 9");
    auto field_int = [&](int idx) {
      int64_t value = 0;
      auto [ptr, ec] = std::from_chars(f[idx].data(), f[idx].data() + f[idx].size(), value);
      if (ec != std::errc{} || ptr != f[idx].data() + f[idx].size())
        throw std::runtime_error("malformed-line: line " + std::to_string(li + 1) +
                                 ", field " + std::to_string(idx + 1));
      return value;
    };
    Scenario s;
    s.bucket = int(field_int(0));
    s.map_name = std::string(f[1]);
    s.map_width = field_int(2);
    s.map_height = field_int(3);
    // Scenario coordinates count rows downward from the top of the file;
    // flip them into the same bottom-up frame parse_map produces.
    int64_t sx = field_int(4), sy = field_int(5);
    int64_t gx = field_int(6), gy = field_int(7);
    s.start = {sx, s.map_height - 1 - sy};
    s.goal = {gx, s.map_height - 1 - gy};
    try {
      s.octile_ref = std::stod(std::string(f[8]));
    } catch (const std::exception&) {
      throw std::runtime_error("malformed-line: line " + std::to_string(li + 1) + ", field 9");
    }
    scens.push_back(std::move(s));
  }
  return scens;
}

OccupancyGrid scale_map(const OccupancyGrid& grid, int k) {
  if (k != 2) throw std::invalid_argument("scale_map: only k = 2 is supported");
  OccupancyGrid out(grid.width() * 2, grid.height() * 2);
  for (int64_t cy = 0; cy < grid.height(); ++cy)
    for (int64_t cx = 0; cx < grid.width(); ++cx)
      if (grid.is_occupied(cx, cy)) {
        out.set_occupied(2 * cx, 2 * cy, true);
        out.set_occupied(2 * cx + 1, 2 * cy, true);
        out.set_occupied(2 * cx, 2 * cy + 1, true);
        out.set_occupied(2 * cx + 1, 2 * cy + 1, true);
      }
  return out;
}

Coord transform_point(Coord p) { return {2 * p.x + 1, 2 * p.y + 1}; }

}  // namespace anyangle
