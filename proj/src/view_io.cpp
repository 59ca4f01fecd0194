#include "wsseg/view_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "wsseg/errors.hpp"
#include "wsseg/tensor_io.hpp"

namespace wsseg {

namespace fs = std::filesystem;

namespace {

Eigen::Matrix3d matrix3(const nlohmann::json& j, const char* key) {
  const auto rows = j.at(key).get<std::vector<std::vector<double>>>();
  if (rows.size() != 3) throw DataError(std::string(key) + ": expected 3 rows");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    if (rows[r].size() != 3) throw DataError(std::string(key) + ": expected 3 columns");
    for (int c = 0; c < 3; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

nlohmann::json rows(const Eigen::Matrix3d& m) {
  nlohmann::json out = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) out.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return out;
}

PayloadKind parse_kind(const std::string& s) {
  if (s == "logits") return PayloadKind::Logits;
  if (s == "embeddings") return PayloadKind::Embeddings;
  throw DataError("unknown payload_kind '" + s + "'");
}

}  // namespace

std::vector<CameraView> read_view_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open view manifest '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  if (!doc.is_array()) throw DataError(path + ": manifest must be a JSON array");

  const fs::path base = fs::path(path).parent_path();
  std::vector<CameraView> views;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    CameraView view;
    try {
      view.camera.intrinsics = matrix3(e, "intrinsics");
      view.camera.rotation = matrix3(e, "rotation");
      const auto t = e.at("translation").get<std::vector<double>>();
      if (t.size() != 3) throw DataError("translation: expected 3 values");
      view.camera.translation = Eigen::Vector3d(t[0], t[1], t[2]);
      view.camera.width = e.at("width").get<int>();
      view.camera.height = e.at("height").get<int>();
      view.kind = parse_kind(e.value("payload_kind", std::string("logits")));
      fs::path payload = e.at("payload_path").get<std::string>();
      if (payload.is_relative()) payload = base / payload;
      view.payload = read_lf01(payload.string());
      view.validate();
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(path + ": view " + std::to_string(i) + ": " + ex.what());
    } catch (const DataError& ex) {
      throw DataError(path + ": view " + std::to_string(i) + ": " + ex.what());
    }
    views.push_back(std::move(view));
  }
  return views;
}

void write_view_manifest(const std::vector<CameraView>& views, const std::string& path) {
  const fs::path base = fs::path(path).parent_path();
  nlohmann::json doc = nlohmann::json::array();
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& v = views[i];
    char name[32];
    std::snprintf(name, sizeof name, "view_%03zu.lf01", i);
    write_lf01(v.payload, (base / name).string());
    const auto& t = v.camera.translation;
    doc.push_back({{"intrinsics", rows(v.camera.intrinsics)},
                   {"rotation", rows(v.camera.rotation)},
                   {"translation", {t.x(), t.y(), t.z()}},
                   {"width", v.camera.width},
                   {"height", v.camera.height},
                   {"payload_path", name},
                   {"payload_kind", v.kind == PayloadKind::Logits ? "logits" : "embeddings"}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write view manifest '" + path + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace wsseg
