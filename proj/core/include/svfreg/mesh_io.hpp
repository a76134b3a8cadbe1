#pragma once

#include <string>

#include "svfreg/types.hpp"

namespace svfreg {

/// Loads a triangle mesh from an OBJ or ASCII PLY file (chosen by
/// extension, falling back to content sniffing). OBJ accepts "v x y z" and
/// "f i j k" with optional /vt/vn suffixes; PLY must be "format ascii 1.0"
/// with xyz vertex properties and 3-index faces. Throws IoError when the
/// file cannot be read and ParseError (with a line number) on malformed
/// content, non-triangular faces, or dangling indices.
TriMesh load_mesh(const std::string& path);

/// Writes an OBJ file. Coordinates are printed with shortest round-trip
/// formatting, so saving is byte-deterministic.
void save_mesh_obj(const std::string& path, const TriMesh& mesh);

}  // namespace svfreg
