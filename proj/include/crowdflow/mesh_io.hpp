#pragma once

// ASCII mesh format:
//   nodes N triangles T bedges B
//   N lines "x y", T lines "i j k" (0-based), B lines "i j TAG" with TAG in {W, O}.
// Whitespace separated; '#' starts a comment.

#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "crowdflow/errors.hpp"
#include "crowdflow/mesh.hpp"
#include "crowdflow/text.hpp"

namespace crowdflow {

inline std::string save_mesh(const Mesh& mesh) {
  std::string out;
  out += "nodes " + std::to_string(mesh.nodes.size()) + " triangles " +
         std::to_string(mesh.triangles.size()) + " bedges " +
         std::to_string(mesh.boundary_edges.size()) + "\n";
  for (const auto& p : mesh.nodes) {
    out += text::format_double(p.x) + " " + text::format_double(p.y) + "\n";
  }
  for (const auto& t : mesh.triangles) {
    out += std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  }
  for (const auto& e : mesh.boundary_edges) {
    out += std::to_string(e.nodes[0]) + " " + std::to_string(e.nodes[1]) +
           (e.tag == BoundaryTag::Wall ? " W\n" : " O\n");
  }
  return out;
}

inline Mesh load_mesh(std::string_view src) {
  struct Line {
    std::size_t number;
    std::vector<std::string_view> tokens;
  };
  std::vector<Line> lines;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= src.size()) {
    const auto end = src.find('\n', pos);
    const auto raw = src.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    ++lineno;
    auto tokens = text::split_ws(text::strip_comment(raw));
    if (!tokens.empty()) lines.push_back({lineno, std::move(tokens)});
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  if (lines.empty()) throw ParseError("empty mesh file");

  const auto& head = lines.front();
  if (head.tokens.size() != 6 || head.tokens[0] != "nodes" || head.tokens[2] != "triangles" ||
      head.tokens[4] != "bedges") {
    throw ParseError("expected header 'nodes N triangles T bedges B'", head.number);
  }
  auto count = [&](std::string_view tok) {
    auto v = text::parse_int(tok);
    if (!v || *v < 0) throw ParseError("malformed count '" + std::string(tok) + "'", head.number);
    return static_cast<std::size_t>(*v);
  };
  const std::size_t n = count(head.tokens[1]);
  const std::size_t nt = count(head.tokens[3]);
  const std::size_t nb = count(head.tokens[5]);
  if (nt == 0) throw ParseError("mesh has no triangles", head.number);
  if (lines.size() != 1 + n + nt + nb) {
    throw ParseError("expected " + std::to_string(n + nt + nb) + " data lines, found " +
                         std::to_string(lines.size() - 1),
                     lines.back().number);
  }

  auto index = [&](const Line& l, std::string_view tok) {
    auto v = text::parse_int(tok);
    if (!v) throw ParseError("malformed index '" + std::string(tok) + "'", l.number);
    if (*v < 0 || static_cast<std::size_t>(*v) >= n) {
      throw ParseError("node index " + std::string(tok) + " out of range", l.number);
    }
    return static_cast<Index>(*v);
  };

  Mesh mesh;
  mesh.nodes.reserve(n);
  mesh.triangles.reserve(nt);
  mesh.boundary_edges.reserve(nb);
  std::size_t k = 1;
  for (std::size_t i = 0; i < n; ++i, ++k) {
    const auto& l = lines[k];
    if (l.tokens.size() != 2) throw ParseError("node line needs 2 coordinates", l.number);
    auto x = text::parse_double(l.tokens[0]);
    auto y = text::parse_double(l.tokens[1]);
    if (!x || !y) throw ParseError("malformed coordinate", l.number);
    mesh.nodes.push_back({*x, *y});
  }
  for (std::size_t i = 0; i < nt; ++i, ++k) {
    const auto& l = lines[k];
    if (l.tokens.size() != 3) throw ParseError("triangle line needs 3 indices", l.number);
    mesh.triangles.push_back({index(l, l.tokens[0]), index(l, l.tokens[1]), index(l, l.tokens[2])});
  }
  for (std::size_t i = 0; i < nb; ++i, ++k) {
    const auto& l = lines[k];
    if (l.tokens.size() != 3) throw ParseError("boundary edge line needs 'i j TAG'", l.number);
    BoundaryEdge e;
    e.nodes = {index(l, l.tokens[0]), index(l, l.tokens[1])};
    if (l.tokens[2] == "W") {
      e.tag = BoundaryTag::Wall;
    } else if (l.tokens[2] == "O") {
      e.tag = BoundaryTag::Outflow;
    } else {
      throw ParseError("unknown boundary tag '" + std::string(l.tokens[2]) + "'", l.number);
    }
    mesh.boundary_edges.push_back(e);
  }
  return mesh;
}

}  // namespace crowdflow
