#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "newton_sic/constructions.hpp"
#include "newton_sic/surface.hpp"

namespace newton_sic {

inline constexpr int kSchemaVersion = 1;

/// Serializes with every number printed to 17 significant digits.
std::string dump_json(const nlohmann::json& j, int indent = 2);

nlohmann::json shape_to_json(const Shape& s);
Shape shape_from_json(const nlohmann::json& j);

nlohmann::json surface_to_json(const Surface& s);
/// Throws parse_error on malformed documents and unknown kind tags.
Surface surface_from_json(const nlohmann::json& j);

nlohmann::json layout_to_json(const PackingLayout& layout);

std::string read_text(const std::string& path);
/// Throws io_error when the file cannot be written.
void write_text(const std::string& path, std::string_view text);

Surface read_surface(const std::string& path);
void write_surface(const std::string& path, const Surface& s);

/// A polygon file: {"type": "polygon", "vertices": [...]} or a surface document with a polygon domain.
Polygon read_polygon(const std::string& path);

}  // namespace newton_sic
