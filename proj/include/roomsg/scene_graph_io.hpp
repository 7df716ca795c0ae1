#pragma once

#include <filesystem>
#include <string>

#include "roomsg/scene_graph.hpp"

namespace roomsg {

// JSON document with top-level {version, rooms[], objects[], room_edges[],
// object_edges[]}. Poses appear as {q:[w,x,y,z], t:[x,y,z], s}; point clouds
// are stored by PLY file reference, not inline. Deserialization errors name
// the offending JSON path and never return a partial graph.
std::string serialize_scene_graph(const SceneGraph& graph);
SceneGraph deserialize_scene_graph(const std::string& text);

// Directory layout: <dir>/scene_graph.json plus rooms/room_<id>.ply and
// objects/object_<id>.ply holding the referenced clouds.
void save_scene_graph(const SceneGraph& graph, const std::filesystem::path& dir);
SceneGraph load_scene_graph(const std::filesystem::path& dir);

}  // namespace roomsg
