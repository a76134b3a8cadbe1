#include "svfreg/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace svfreg {

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

bool parse_double(const std::string& tok, double& out) {
  const char* b = tok.data();
  const char* e = b + tok.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

bool parse_int(const std::string& tok, long& out) {
  const char* b = tok.data();
  const char* e = b + tok.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

TriMesh load_obj(std::istream& in, const std::string& path) {
  TriMesh mesh;
  std::string line;
  int lineno = 0;
  struct PendingFace {
    std::array<int, 3> idx;
    int line;
  };
  std::vector<PendingFace> pending;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks[0] == "v") {
      if (toks.size() < 4) parse_fail(path, lineno, "vertex needs 3 coordinates");
      double c[3];
      for (int k = 0; k < 3; ++k)
        if (!parse_double(toks[k + 1], c[k]))
          parse_fail(path, lineno, "bad vertex coordinate '" + toks[k + 1] + "'");
      mesh.vertices.push_back({c[0], c[1], c[2]});
    } else if (toks[0] == "f") {
      if (toks.size() != 4)
        parse_fail(path, lineno, "face with " + std::to_string(toks.size() - 1) +
                                     " vertices; only triangles are supported");
      std::array<int, 3> idx;
      for (int k = 0; k < 3; ++k) {
        // accept i, i/t, i//n, i/t/n; only the vertex index is used
        std::string head = toks[k + 1].substr(0, toks[k + 1].find('/'));
        long v;
        if (!parse_int(head, v)) parse_fail(path, lineno, "bad face index '" + head + "'");
        if (v < 1) parse_fail(path, lineno, "face index must be >= 1");
        idx[k] = static_cast<int>(v - 1);
      }
      pending.push_back({idx, lineno});
    }
    // other prefixes (vn, vt, g, o, s, usemtl, mtllib, ...) are ignored
  }
  const int nv = static_cast<int>(mesh.vertices.size());
  for (const auto& f : pending) {
    for (int v : f.idx)
      if (v >= nv)
        parse_fail(path, f.line,
                   "face references vertex " + std::to_string(v + 1) + " but file has " +
                       std::to_string(nv) + " vertices");
    mesh.faces.push_back(f.idx);
  }
  mesh.validate();
  return mesh;
}

TriMesh load_ply(std::istream& in, const std::string& path) {
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> std::string {
    if (!std::getline(in, line)) parse_fail(path, lineno, "unexpected end of file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (split_ws(next_line()) != std::vector<std::string>{"ply"})
    parse_fail(path, lineno, "missing 'ply' magic");

  long n_vertices = -1, n_faces = -1;
  int xi = -1, yi = -1, zi = -1;
  int vertex_props = 0;
  std::string current_element;
  bool saw_format = false;

  for (;;) {
    const auto toks = split_ws(next_line());
    if (toks.empty()) continue;
    if (toks[0] == "comment") continue;
    if (toks[0] == "format") {
      if (toks.size() < 2 || toks[1] != "ascii")
        parse_fail(path, lineno, "only ASCII PLY is supported");
      saw_format = true;
    } else if (toks[0] == "element") {
      if (toks.size() < 3) parse_fail(path, lineno, "malformed element");
      current_element = toks[1];
      long count;
      if (!parse_int(toks[2], count) || count < 0)
        parse_fail(path, lineno, "bad element count");
      if (current_element == "vertex") n_vertices = count;
      else if (current_element == "face") n_faces = count;
    } else if (toks[0] == "property") {
      if (current_element == "vertex" && toks.size() >= 3 && toks[1] != "list") {
        if (toks[2] == "x") xi = vertex_props;
        if (toks[2] == "y") yi = vertex_props;
        if (toks[2] == "z") zi = vertex_props;
        ++vertex_props;
      }
    } else if (toks[0] == "end_header") {
      break;
    }
  }
  if (!saw_format) parse_fail(path, lineno, "missing format line");
  if (n_vertices < 0) parse_fail(path, lineno, "missing vertex element");
  if (xi < 0 || yi < 0 || zi < 0) parse_fail(path, lineno, "vertex needs x, y, z properties");
  if (n_faces < 0) n_faces = 0;

  TriMesh mesh;
  mesh.vertices.reserve(n_vertices);
  for (long i = 0; i < n_vertices; ++i) {
    const auto toks = split_ws(next_line());
    if (static_cast<int>(toks.size()) < vertex_props)
      parse_fail(path, lineno, "vertex line has too few properties");
    double c[3];
    const int order[3] = {xi, yi, zi};
    for (int k = 0; k < 3; ++k)
      if (!parse_double(toks[order[k]], c[k]))
        parse_fail(path, lineno, "bad vertex coordinate '" + toks[order[k]] + "'");
    mesh.vertices.push_back({c[0], c[1], c[2]});
  }
  for (long i = 0; i < n_faces; ++i) {
    const auto toks = split_ws(next_line());
    long count;
    if (toks.empty() || !parse_int(toks[0], count))
      parse_fail(path, lineno, "bad face line");
    if (count != 3)
      parse_fail(path, lineno, "face with " + std::to_string(count) +
                                   " vertices; only triangles are supported");
    if (static_cast<long>(toks.size()) < 4) parse_fail(path, lineno, "face line too short");
    std::array<int, 3> idx;
    for (int k = 0; k < 3; ++k) {
      long v;
      if (!parse_int(toks[k + 1], v)) parse_fail(path, lineno, "bad face index");
      if (v < 0 || v >= n_vertices)
        parse_fail(path, lineno, "face references vertex " + std::to_string(v) +
                                     " but file has " + std::to_string(n_vertices));
      idx[k] = static_cast<int>(v);
    }
    mesh.faces.push_back(idx);
  }
  mesh.validate();
  return mesh;
}

std::string lower_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

TriMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path + "'");
  const std::string ext = lower_ext(path);
  if (ext == "obj") return load_obj(in, path);
  if (ext == "ply") return load_ply(in, path);
  // sniff: PLY files start with "ply"
  std::string first;
  std::getline(in, first);
  in.seekg(0);
  if (first.rfind("ply", 0) == 0) return load_ply(in, path);
  return load_obj(in, path);
}

void save_mesh_obj(const std::string& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  char buf[64];
  auto fmt = [&buf](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string_view(buf, ptr - buf);
  };
  std::string line;
  for (const auto& v : mesh.vertices) {
    line.assign("v ");
    line.append(fmt(v.x));
    line.push_back(' ');
    line.append(fmt(v.y));
    line.push_back(' ');
    line.append(fmt(v.z));
    line.push_back('\n');
    out << line;
  }
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace svfreg
