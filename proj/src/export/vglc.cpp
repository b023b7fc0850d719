#include <sstream>

#include "automap/export/export.hpp"

namespace automap::exporter {

std::string export_tiles(const tiles::NormalizedRoom& room, Legend& legend, tiles::Representative rule) {
  const auto grid = room.representative_grid(rule);
  std::string out;
  out.reserve(static_cast<std::size_t>(room.width + 1) * room.height);
  for (int y = 0; y < room.height; ++y) {
    for (int x = 0; x < room.width; ++x) {
      const auto& cell = grid[static_cast<std::size_t>(y) * room.width + x];
      out += cell ? legend.assign(*cell) : std::string(kUnobserved);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 0;
}

}  // namespace

DecodedGrid decode_tiles(std::string_view text, const Legend& legend) {
  DecodedGrid grid;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    int width = 0;
    for (std::size_t i = 0; i < line.size();) {
      const std::size_t len = utf8_length(static_cast<unsigned char>(line[i]));
      if (len == 0 || i + len > line.size()) throw ParseError("invalid UTF-8", line_no, static_cast<int>(i + 1));
      const std::string_view ch = line.substr(i, len);
      if (ch == kUnobserved) {
        grid.cells.emplace_back(std::nullopt);
      } else if (auto k = legend.key(ch)) {
        grid.cells.emplace_back(*k);
      } else {
        throw ParseError("character '" + std::string(ch) + "' is not in the legend", line_no, static_cast<int>(i + 1));
      }
      ++width;
      i += len;
    }
    if (grid.height == 0) {
      grid.width = width;
    } else if (width != grid.width) {
      throw ParseError("line has " + std::to_string(width) + " cells, expected " + std::to_string(grid.width), line_no);
    }
    ++grid.height;
  }
  return grid;
}

std::string export_dot(const merge::MergedGraph& graph) {
  std::ostringstream out;
  out << "digraph rooms {\n";
  for (const auto& n : graph.nodes) {
    out << "  r" << n.id << " [label=\"" << n.id << " (" << n.width << "x" << n.height << ")\"";
    if (n.members.size() > 1) {
      out << ", members=\"";
      for (std::size_t i = 0; i < n.members.size(); ++i) out << (i ? " " : "") << n.members[i];
      out << "\"";
    }
    out << "];\n";
  }
  for (const auto& l : graph.links) {
    out << "  r" << l.from_room << " -> r" << l.to_room << " [kind=" << to_string(l.kind) << ", frame=" << l.frame
        << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace automap::exporter
