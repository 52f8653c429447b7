#ifndef PEDSPAWN_IO_OBJ_HPP
#define PEDSPAWN_IO_OBJ_HPP

// Wavefront OBJ + MTL loader. Supports v/vt/vn, polygonal faces (fan
// triangulated, negative indices allowed), mtllib/usemtl, Kd and map_Kd.

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "pedspawn/error.hpp"
#include "pedspawn/io/png.hpp"
#include "pedspawn/mesh.hpp"

namespace pedspawn::io {

namespace detail {

inline int resolve_obj_index(int idx, std::size_t count, const std::string& where) {
  const long resolved = idx > 0 ? idx - 1 : static_cast<long>(count) + idx;
  if (idx == 0 || resolved < 0 || resolved >= static_cast<long>(count)) throw DataError("OBJ index out of range in " + where);
  return static_cast<int>(resolved);
}

inline std::uint8_t to_byte(double c) { return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0)); }

inline void load_mtl(const std::filesystem::path& path, std::vector<Material>& materials, std::map<std::string, int>& by_name) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open MTL file: " + path.string());
  std::string line;
  Material* current = nullptr;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "newmtl") {
      Material m;
      ss >> m.name;
      by_name[m.name] = static_cast<int>(materials.size());
      materials.push_back(std::move(m));
      current = &materials.back();
    } else if (current && tag == "Kd") {
      double r = 0, g = 0, b = 0;
      ss >> r >> g >> b;
      current->diffuse = {to_byte(r), to_byte(g), to_byte(b)};
    } else if (current && tag == "map_Kd") {
      std::string file;
      std::getline(ss >> std::ws, file);
      current->texture = std::make_shared<RgbImage>(read_rgb_png(path.parent_path() / file));
    }
  }
}

}  // namespace detail

inline TriangleMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open OBJ file: " + path.string());
  std::vector<Eigen::Vector3d> positions, normals;
  std::vector<Eigen::Vector2d> uvs;
  TriangleMesh mesh;
  std::map<std::string, int> by_name{{"default", 0}};
  int material = 0;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (tag == "v") {
      Eigen::Vector3d p;
      if (!(ss >> p.x() >> p.y() >> p.z())) throw DataError("malformed vertex at " + where);
      positions.push_back(p);
    } else if (tag == "vn") {
      Eigen::Vector3d n;
      if (!(ss >> n.x() >> n.y() >> n.z())) throw DataError("malformed normal at " + where);
      normals.push_back(n.normalized());
    } else if (tag == "vt") {
      Eigen::Vector2d t;
      if (!(ss >> t.x() >> t.y())) throw DataError("malformed texcoord at " + where);
      uvs.push_back(t);
    } else if (tag == "mtllib") {
      std::string file;
      std::getline(ss >> std::ws, file);
      detail::load_mtl(path.parent_path() / file, mesh.materials, by_name);
    } else if (tag == "usemtl") {
      std::string name;
      ss >> name;
      auto it = by_name.find(name);
      if (it == by_name.end()) throw DataError("unknown material '" + name + "' at " + where);
      material = it->second;
    } else if (tag == "f") {
      std::vector<MeshVertex> poly;
      std::string corner;
      while (ss >> corner) {
        MeshVertex mv;
        int idx[3] = {0, 0, 0};
        std::size_t start = 0;
        for (int k = 0; k < 3; ++k) {
          const std::size_t slash = corner.find('/', start);
          const std::string part = corner.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
          if (!part.empty()) idx[k] = std::stoi(part);
          if (slash == std::string::npos) break;
          start = slash + 1;
        }
        mv.position = positions[detail::resolve_obj_index(idx[0], positions.size(), where)];
        if (idx[1] != 0) mv.uv = uvs[detail::resolve_obj_index(idx[1], uvs.size(), where)];
        if (idx[2] != 0) mv.normal = normals[detail::resolve_obj_index(idx[2], normals.size(), where)];
        poly.push_back(mv);
      }
      if (poly.size() < 3) throw DataError("face with fewer than 3 vertices at " + where);
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        mesh.triangles.push_back(MeshTriangle{{poly[0], poly[k], poly[k + 1]}, material});
      }
    }
  }
  return mesh;
}

inline PedestrianAsset load_asset(const std::filesystem::path& obj_path) {
  try {
    return PedestrianAsset::from_mesh(obj_path.stem().string(), load_obj(obj_path));
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

}  // namespace pedspawn::io

#endif  // PEDSPAWN_IO_OBJ_HPP
