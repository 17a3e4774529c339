#include "hf/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace hf {

using nlohmann::json;

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out += ',';
    out += header[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      std::ostringstream os;
      os << "to_csv: row " << r << " has " << rows[r].size() << " fields, header has "
         << header.size();
      throw Error(os.str(), {static_cast<long>(r)});
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) out += ',';
      out += format_double(rows[r][c]);
    }
    out += '\n';
  }
  return out;
}

CsvData parse_csv(const std::string& text) {
  CsvData d;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("parse_csv: empty block");
  {
    std::istringstream hs(line);
    std::string field;
    while (std::getline(hs, field, ',')) d.header.push_back(field);
  }
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.c_str();
    for (;;) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) throw Error("parse_csv: bad number on line " + std::to_string(lineno));
      row.push_back(v);
      if (*end == ',') p = end + 1;
      else if (*end == '\0' || *end == '\r') break;
      else throw Error("parse_csv: bad separator on line " + std::to_string(lineno));
    }
    if (row.size() != d.header.size())
      throw Error("parse_csv: wrong field count on line " + std::to_string(lineno));
    d.rows.push_back(std::move(row));
  }
  return d;
}

json make_container(const std::string& type, json metadata, json blocks) {
  return json{{"schema", kSchemaVersion},
              {"type", type},
              {"metadata", std::move(metadata)},
              {"blocks", std::move(blocks)}};
}

void check_container(const json& j, const std::string& type) {
  if (!j.is_object() || j.value("schema", "") != kSchemaVersion)
    throw Error(std::string("not an ") + kSchemaVersion + " container");
  if (j.value("type", "") != type)
    throw Error("expected a '" + type + "' container, found '" + j.value("type", "") + "'");
}

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json mat_to_json(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

Mat3 mat_from_json(const json& j) {
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

json grid_to_json(const PolarGrid& g) {
  const PolarRect& r = g.rect();
  return json{{"r1", r.r1},
              {"r2", r.r2},
              {"theta1", r.theta1},
              {"theta2", r.theta2},
              {"n_rho", g.n_rho()},
              {"n_theta", g.n_theta()},
              {"spacing", g.spacing() == RadialSpacing::geometric ? "geometric" : "uniform"},
              {"truncated", g.truncated()}};
}

PolarGrid grid_from_json(const json& j) {
  PolarRect r{j.at("r1").get<double>(), j.at("r2").get<double>(), j.at("theta1").get<double>(),
              j.at("theta2").get<double>()};
  const std::string sp = j.value("spacing", "geometric");
  if (sp != "geometric" && sp != "uniform") throw Error("unknown radial spacing '" + sp + "'");
  const RadialSpacing spacing = sp == "geometric" ? RadialSpacing::geometric : RadialSpacing::uniform;
  double r_max = PolarGrid::kDefaultRmax;
  if (j.value("truncated", false)) {
    r_max = r.r2;
    r.r2 = kInfinity;
  }
  return PolarGrid(r, j.at("n_rho").get<int>(), j.at("n_theta").get<int>(), spacing, r_max);
}

json graph_to_json(const MultiGraph& u) {
  json meta{{"grid", grid_to_json(u.grid)},
            {"winding", u.winding()},
            {"center", vec_to_json(u.center)},
            {"frame", mat_to_json(u.frame)},
            {"analytic", u.analytic ? u.analytic->descriptor : json(nullptr)},
            {"solver_residual", u.solver_residual ? json(*u.solver_residual) : json(nullptr)}};
  std::vector<std::vector<double>> rows;
  rows.reserve(u.grid.size());
  for (int i = 0; i < u.grid.n_rho(); ++i)
    for (int j = 0; j < u.grid.n_theta(); ++j)
      rows.push_back({static_cast<double>(i), static_cast<double>(j), u.grid.rho(i),
                      u.grid.theta(j), u.at(i, j)});
  return make_container("multigraph", std::move(meta),
                        json{{"nodes", to_csv({"i", "j", "rho", "theta", "u"}, rows)}});
}

MultiGraph graph_from_json(const json& j) {
  check_container(j, "multigraph");
  const json& meta = j.at("metadata");
  PolarGrid grid = grid_from_json(meta.at("grid"));
  const CsvData csv = parse_csv(j.at("blocks").at("nodes").get<std::string>());
  if (static_cast<long>(csv.rows.size()) != grid.size())
    throw Error("multigraph: node block does not match grid size");
  std::vector<double> values(grid.size());
  for (const auto& row : csv.rows) {
    const int i = static_cast<int>(row[0]), jj = static_cast<int>(row[1]);
    if (i < 0 || i >= grid.n_rho() || jj < 0 || jj >= grid.n_theta())
      throw Error("multigraph: node index out of range");
    values[grid.index(i, jj)] = row[4];
  }
  MultiGraph u(grid, std::move(values));
  u.validate();
  if (meta.contains("center")) u.center = vec_from_json(meta.at("center"));
  if (meta.contains("frame")) u.frame = mat_from_json(meta.at("frame"));
  if (meta.contains("solver_residual") && !meta.at("solver_residual").is_null())
    u.solver_residual = meta.at("solver_residual").get<double>();
  if (meta.contains("analytic") && !meta.at("analytic").is_null())
    u.analytic = analytic_from_descriptor(meta.at("analytic"));
  return u;
}

json mesh_to_json(const MeshPatch& m) {
  std::vector<std::string> vh{"x", "y", "z"};
  const bool has_n = !m.normals.empty(), has_a = !m.A2.empty(), has_s = !m.shape.empty();
  if (has_n) vh.insert(vh.end(), {"nx", "ny", "nz"});
  if (has_a) vh.push_back("A2");
  if (has_s) vh.insert(vh.end(), {"sxx", "sxy", "sxz", "syy", "syz", "szz"});
  std::vector<std::vector<double>> vrows;
  vrows.reserve(m.vertices.size());
  for (long v = 0; v < m.vertex_count(); ++v) {
    const Vec3& p = m.vertices[v];
    std::vector<double> row{p.x(), p.y(), p.z()};
    if (has_n) row.insert(row.end(), {m.normals[v].x(), m.normals[v].y(), m.normals[v].z()});
    if (has_a) row.push_back(m.A2[v]);
    if (has_s) {
      const Mat3& s = m.shape[v];
      row.insert(row.end(), {s(0, 0), s(0, 1), s(0, 2), s(1, 1), s(1, 2), s(2, 2)});
    }
    vrows.push_back(std::move(row));
  }
  std::vector<std::vector<double>> trows;
  trows.reserve(m.triangles.size());
  for (const auto& t : m.triangles)
    trows.push_back({static_cast<double>(t[0]), static_cast<double>(t[1]), static_cast<double>(t[2])});
  json meta{{"vertex_count", m.vertex_count()}, {"triangle_count", m.triangle_count()}};
  return make_container("mesh", std::move(meta),
                        json{{"vertices", to_csv(vh, vrows)},
                             {"triangles", to_csv({"a", "b", "c"}, trows)}});
}

MeshPatch mesh_from_json(const json& j) {
  check_container(j, "mesh");
  const CsvData v = parse_csv(j.at("blocks").at("vertices").get<std::string>());
  const CsvData t = parse_csv(j.at("blocks").at("triangles").get<std::string>());
  auto col = [&](const std::string& name) -> int {
    for (std::size_t c = 0; c < v.header.size(); ++c)
      if (v.header[c] == name) return static_cast<int>(c);
    return -1;
  };
  const int cx = col("x"), cn = col("nx"), ca = col("A2"), cs = col("sxx");
  if (cx < 0) throw Error("mesh: vertex block lacks coordinates");
  MeshPatch m;
  for (const auto& r : v.rows) {
    m.vertices.emplace_back(r[cx], r[cx + 1], r[cx + 2]);
    if (cn >= 0) m.normals.emplace_back(Vec3(r[cn], r[cn + 1], r[cn + 2]));
    if (ca >= 0) m.A2.push_back(r[ca]);
    if (cs >= 0) {
      Mat3 s;
      s << r[cs], r[cs + 1], r[cs + 2], r[cs + 1], r[cs + 3], r[cs + 4], r[cs + 2], r[cs + 4],
          r[cs + 5];
      m.shape.push_back(s);
    }
  }
  for (const auto& r : t.rows)
    m.triangles.push_back({static_cast<int>(r[0]), static_cast<int>(r[1]), static_cast<int>(r[2])});
  m.validate();
  return m;
}

json curve_to_json(const CurveSamples& c, const WeierstrassAlpha& alpha) {
  std::vector<std::vector<double>> rows;
  rows.reserve(c.t.size());
  for (std::size_t k = 0; k < c.t.size(); ++k) rows.push_back({c.t[k], c.points[k].x(), c.points[k].y()});
  return make_container("curve", json{{"alpha1", alpha.alpha1}, {"alpha2", alpha.alpha2}, {"samples", c.t.size()}},
                        json{{"samples", to_csv({"t", "x1", "x2"}, rows)}});
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace hf
