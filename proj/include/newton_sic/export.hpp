#pragma once

#include <string>

#include "newton_sic/surface.hpp"

namespace newton_sic {

enum class ExportFormat { obj, svg, csv };

const char* to_string(ExportFormat f);
/// Throws invalid_parameter for unknown names.
ExportFormat parse_export_format(const std::string& name);

struct MeshStats {
    std::size_t vertices = 0;
    std::size_t faces = 0;
};

/// Height-field mesh on the grid of spacing `resolution` covering the bounding box. Each grid
/// cell is split along its diagonal and a triangle is kept when its three corners lie in the
/// closed domain. Vertices carry the region formula value, so boundary vertices continue the
/// interior surface instead of jumping to the boundary value 0.
std::string export_obj(const Surface& s, double resolution, MeshStats* stats = nullptr);

/// Region layout; one path per region, y mirrored inside the domain bounding box.
std::string export_svg(const Surface& s);

/// Cell-centre samples "x1,x2,u" of the grid of spacing `resolution` that fall in the domain.
std::string export_csv(const Surface& s, double resolution);

std::string export_surface(const Surface& s, ExportFormat format, double resolution);

}  // namespace newton_sic
