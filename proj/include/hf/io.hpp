#pragma once

#include "hf/exact_surfaces.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace hf {

inline constexpr const char* kSchemaVersion = "hf-1";

/// Shortest text that reads back to the same double ("%.17g").
std::string format_double(double x);

/// CSV text with a header line; every row must match the header width.
std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows);

struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvData parse_csv(const std::string& text);

/// {"schema": "hf-1", "type": ..., "metadata": ..., "blocks": ...}
nlohmann::json make_container(const std::string& type, nlohmann::json metadata,
                              nlohmann::json blocks = nlohmann::json::object());
/// Throws unless j is an hf-1 container of the given type.
void check_container(const nlohmann::json& j, const std::string& type);

nlohmann::json grid_to_json(const PolarGrid& g);
PolarGrid grid_from_json(const nlohmann::json& j);

nlohmann::json graph_to_json(const MultiGraph& u);
/// Re-attaches closed-form derivatives when the metadata names a known surface.
MultiGraph graph_from_json(const nlohmann::json& j);

nlohmann::json mesh_to_json(const MeshPatch& m);
MeshPatch mesh_from_json(const nlohmann::json& j);

nlohmann::json curve_to_json(const CurveSamples& c, const WeierstrassAlpha& alpha);

nlohmann::json vec_to_json(const Vec3& v);
Vec3 vec_from_json(const nlohmann::json& j);
nlohmann::json mat_to_json(const Mat3& m);
Mat3 mat_from_json(const nlohmann::json& j);

/// JSON text with two-space indentation and a trailing newline.
std::string dump(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace hf
