#include "wsseg/ply_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wsseg/errors.hpp"

namespace wsseg {
namespace {

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

struct Property {
  std::string name;
  ScalarType type;
  std::size_t offset = 0;  // byte offset inside a binary row
};

struct Header {
  bool binary = false;
  std::size_t vertex_count = 0;
  std::vector<Property> properties;
  std::size_t row_bytes = 0;
  std::size_t body_offset = 0;  // byte offset of first body byte
  std::size_t body_line = 0;    // 1-based line number of first ascii body line
};

std::size_t type_size(ScalarType t) {
  switch (t) {
    case ScalarType::Int8:
    case ScalarType::UInt8: return 1;
    case ScalarType::Int16:
    case ScalarType::UInt16: return 2;
    case ScalarType::Int32:
    case ScalarType::UInt32:
    case ScalarType::Float32: return 4;
    case ScalarType::Float64: return 8;
  }
  return 0;
}

bool parse_type(std::string_view s, ScalarType& t) {
  if (s == "char" || s == "int8") t = ScalarType::Int8;
  else if (s == "uchar" || s == "uint8") t = ScalarType::UInt8;
  else if (s == "short" || s == "int16") t = ScalarType::Int16;
  else if (s == "ushort" || s == "uint16") t = ScalarType::UInt16;
  else if (s == "int" || s == "int32") t = ScalarType::Int32;
  else if (s == "uint" || s == "uint32") t = ScalarType::UInt32;
  else if (s == "float" || s == "float32") t = ScalarType::Float32;
  else if (s == "double" || s == "float64") t = ScalarType::Float64;
  else return false;
  return true;
}

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) words.push_back(line.substr(start, i - start));
  }
  return words;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Header parse_header(const std::string& path, const std::string& data) {
  Header h;
  std::size_t pos = 0, line_no = 0;
  bool saw_format = false, in_vertex = false, saw_vertex = false, done = false;
  int element_index = 0;
  while (!done) {
    if (pos >= data.size())
      throw FormatError(path, "unexpected end of header", line_no + 1, "line");
    const std::size_t eol = data.find('\n', pos);
    if (eol == std::string::npos)
      throw FormatError(path, "unterminated header line", line_no + 1, "line");
    const std::string_view line(data.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    const auto w = split_words(line);
    if (line_no == 1) {
      if (w.size() != 1 || w[0] != "ply")
        throw FormatError(path, "missing 'ply' magic", line_no, "line");
      continue;
    }
    if (w.empty()) continue;
    if (w[0] == "comment" || w[0] == "obj_info") continue;
    if (w[0] == "format") {
      if (w.size() != 3)
        throw FormatError(path, "malformed format line", line_no, "line");
      if (w[1] == "ascii") h.binary = false;
      else if (w[1] == "binary_little_endian") h.binary = true;
      else
        throw FormatError(path, "unsupported format '" + std::string(w[1]) + "'",
                          line_no, "line");
      saw_format = true;
    } else if (w[0] == "element") {
      if (w.size() != 3)
        throw FormatError(path, "malformed element line", line_no, "line");
      std::size_t count = 0;
      const auto r = std::from_chars(w[2].data(), w[2].data() + w[2].size(), count);
      if (r.ec != std::errc() || r.ptr != w[2].data() + w[2].size())
        throw FormatError(path, "bad element count", line_no, "line");
      in_vertex = w[1] == "vertex";
      if (in_vertex) {
        if (element_index != 0)
          throw FormatError(path, "'vertex' must be the first element", line_no,
                            "line");
        saw_vertex = true;
        h.vertex_count = count;
      }
      ++element_index;
    } else if (w[0] == "property") {
      if (element_index == 0)
        throw FormatError(path, "property before any element", line_no, "line");
      if (!in_vertex) continue;
      if (w.size() >= 2 && w[1] == "list")
        throw FormatError(path, "unsupported list property on vertex", line_no,
                          "line");
      if (w.size() != 3)
        throw FormatError(path, "malformed property line", line_no, "line");
      Property p;
      if (!parse_type(w[1], p.type))
        throw FormatError(path, "unsupported property type '" + std::string(w[1]) + "'",
                          line_no, "line");
      p.name = std::string(w[2]);
      const bool is_xyz = p.name == "x" || p.name == "y" || p.name == "z";
      const bool is_rgb = p.name == "red" || p.name == "green" || p.name == "blue";
      if (is_xyz && p.type != ScalarType::Float32)
        throw FormatError(path, "property " + p.name + " must be float", line_no, "line");
      if (is_rgb && p.type != ScalarType::UInt8)
        throw FormatError(path, "property " + p.name + " must be uchar", line_no, "line");
      if (p.name == "label" && p.type != ScalarType::UInt16)
        throw FormatError(path, "property label must be ushort", line_no, "line");
      p.offset = h.row_bytes;
      h.row_bytes += type_size(p.type);
      h.properties.push_back(std::move(p));
    } else if (w[0] == "end_header") {
      done = true;
    } else {
      throw FormatError(path, "unknown header keyword '" + std::string(w[0]) + "'",
                        line_no, "line");
    }
  }
  if (!saw_format) throw FormatError(path, "missing format line", line_no, "line");
  if (!saw_vertex) throw FormatError(path, "missing vertex element", line_no, "line");
  for (const char* name : {"x", "y", "z", "red", "green", "blue"}) {
    bool found = false;
    for (const auto& p : h.properties) found = found || p.name == name;
    if (!found)
      throw FormatError(path, std::string("missing vertex property ") + name, line_no,
                        "line");
  }
  h.body_offset = pos;
  h.body_line = line_no + 1;
  return h;
}

template <typename T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  }
  return v;
}

template <typename T>
void store_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  out.append(buf, sizeof(T));
}

struct Slots {
  int x = -1, y = -1, z = -1, r = -1, g = -1, b = -1, label = -1;
};

Slots find_slots(const Header& h) {
  Slots s;
  for (int i = 0; i < static_cast<int>(h.properties.size()); ++i) {
    const auto& n = h.properties[static_cast<std::size_t>(i)].name;
    if (n == "x") s.x = i;
    else if (n == "y") s.y = i;
    else if (n == "z") s.z = i;
    else if (n == "red") s.r = i;
    else if (n == "green") s.g = i;
    else if (n == "blue") s.b = i;
    else if (n == "label") s.label = i;
  }
  return s;
}

void read_binary(const std::string& path, const std::string& data, const Header& h,
                 PlyData& out) {
  const Slots s = find_slots(h);
  const std::size_t available = data.size() - h.body_offset;
  const std::size_t complete = h.row_bytes == 0 ? h.vertex_count : available / h.row_bytes;
  if (complete < h.vertex_count)
    throw FormatError(path, "truncated body: " + std::to_string(complete) + " of " +
                                std::to_string(h.vertex_count) + " vertices present",
                      h.body_offset + complete * h.row_bytes, "byte");
  const auto& props = h.properties;
  auto off = [&](int slot) { return props[static_cast<std::size_t>(slot)].offset; };
  for (std::size_t i = 0; i < h.vertex_count; ++i) {
    const char* row = data.data() + h.body_offset + i * h.row_bytes;
    const auto col = static_cast<Eigen::Index>(i);
    out.cloud.positions(0, col) = load_le<float>(row + off(s.x));
    out.cloud.positions(1, col) = load_le<float>(row + off(s.y));
    out.cloud.positions(2, col) = load_le<float>(row + off(s.z));
    out.cloud.colors(0, col) = load_le<std::uint8_t>(row + off(s.r));
    out.cloud.colors(1, col) = load_le<std::uint8_t>(row + off(s.g));
    out.cloud.colors(2, col) = load_le<std::uint8_t>(row + off(s.b));
    if (s.label >= 0) (*out.labels)[col] = load_le<std::uint16_t>(row + off(s.label));
  }
}

template <typename T>
bool parse_number(std::string_view tok, T& v) {
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for floats is available in libstdc++ 11.
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    return r.ec == std::errc() && r.ptr == tok.data() + tok.size();
  } else {
    long long tmp = 0;
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), tmp);
    if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) return false;
    if (tmp < static_cast<long long>(std::numeric_limits<T>::min()) ||
        tmp > static_cast<long long>(std::numeric_limits<T>::max()))
      return false;
    v = static_cast<T>(tmp);
    return true;
  }
}

void read_ascii(const std::string& path, const std::string& data, const Header& h,
                PlyData& out) {
  const Slots s = find_slots(h);
  std::size_t pos = h.body_offset, line_no = h.body_line;
  std::size_t i = 0;
  while (i < h.vertex_count) {
    if (pos >= data.size())
      throw FormatError(path, "truncated body: " + std::to_string(i) + " of " +
                                  std::to_string(h.vertex_count) + " vertices present",
                        line_no, "line");
    std::size_t eol = data.find('\n', pos);
    if (eol == std::string::npos) eol = data.size();
    const auto w = split_words(std::string_view(data.data() + pos, eol - pos));
    pos = eol + 1;
    if (w.empty()) {
      ++line_no;
      continue;
    }
    if (w.size() < h.properties.size())
      throw FormatError(path, "expected " + std::to_string(h.properties.size()) +
                                  " values, found " + std::to_string(w.size()),
                        line_no, "line");
    const auto col = static_cast<Eigen::Index>(i);
    auto bad = [&](int slot) {
      return FormatError(path, "bad value for property " +
                                   h.properties[static_cast<std::size_t>(slot)].name,
                         line_no, "line");
    };
    const int xyz[3] = {s.x, s.y, s.z};
    for (int d = 0; d < 3; ++d) {
      float v = 0;
      if (!parse_number(w[static_cast<std::size_t>(xyz[d])], v)) throw bad(xyz[d]);
      out.cloud.positions(d, col) = v;
    }
    const int rgb[3] = {s.r, s.g, s.b};
    for (int d = 0; d < 3; ++d) {
      std::uint8_t v = 0;
      if (!parse_number(w[static_cast<std::size_t>(rgb[d])], v)) throw bad(rgb[d]);
      out.cloud.colors(d, col) = v;
    }
    if (s.label >= 0) {
      std::uint16_t v = 0;
      if (!parse_number(w[static_cast<std::size_t>(s.label)], v)) throw bad(s.label);
      (*out.labels)[col] = v;
    }
    ++i;
    ++line_no;
  }
}

void write_ply(const PointCloud& cloud, const LabelField* labels, const std::string& path) {
  cloud.validate();
  const Eigen::Index n = cloud.size();
  if (labels && labels->size() != n)
    throw DataError("save_ply: " + std::to_string(labels->size()) + " labels for " +
                    std::to_string(n) + " points");
  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\nelement vertex " << n
         << "\nproperty float x\nproperty float y\nproperty float z\n"
            "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (labels) header << "property ushort label\n";
  header << "end_header\n";
  std::string body = header.str();
  body.reserve(body.size() + static_cast<std::size_t>(n) * (labels ? 17 : 15));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d) store_le(body, static_cast<float>(cloud.positions(d, i)));
    for (int d = 0; d < 3; ++d) store_le(body, cloud.colors(d, i));
    if (labels) {
      const int v = (*labels)[i];
      store_le(body, v == kUnlabeled ? kUnlabeledPly : static_cast<std::uint16_t>(v));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace

PlyData read_ply(const std::string& path) {
  const std::string data = read_file(path);
  const Header h = parse_header(path, data);
  PlyData out;
  out.cloud = PointCloud(static_cast<Eigen::Index>(h.vertex_count));
  if (find_slots(h).label >= 0)
    out.labels.emplace(static_cast<Eigen::Index>(h.vertex_count));
  if (h.binary) read_binary(path, data, h, out);
  else read_ascii(path, data, h, out);
  try {
    out.cloud.validate();
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
  return out;
}

PointCloud load_ply(const std::string& path) { return read_ply(path).cloud; }

void save_ply(const PointCloud& cloud, const std::string& path) {
  write_ply(cloud, nullptr, path);
}

void save_ply(const PointCloud& cloud, const LabelField& labels, const std::string& path) {
  write_ply(cloud, &labels, path);
}

LabelField labels_from_ply(const PlyData& data, int num_classes, const std::string& path) {
  if (!data.labels) throw DataError(path + ": no 'label' vertex property");
  const auto& raw = *data.labels;
  LabelField out(raw.size(), num_classes);
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    if (raw[i] == kUnlabeledPly) continue;
    if (raw[i] >= num_classes)
      throw DataError(path + ": label " + std::to_string(raw[i]) + " at vertex " +
                      std::to_string(i) + " exceeds class count " +
                      std::to_string(num_classes));
    out.labels[i] = raw[i];
  }
  return out;
}

}  // namespace wsseg
