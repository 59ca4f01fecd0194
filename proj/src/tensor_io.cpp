#include "wsseg/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "wsseg/errors.hpp"

namespace wsseg {
namespace {

static_assert(std::endian::native == std::endian::little,
              "LF01 I/O assumes a little-endian host");

std::uint32_t read_u32(const std::string& data, std::size_t at) {
  std::uint32_t v;
  std::memcpy(&v, data.data() + at, 4);
  return v;
}

}  // namespace

RowMatrixXf read_lf01(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::string data(std::istreambuf_iterator<char>(in), {});
  if (data.size() < 12) throw FormatError(path, "short LF01 header", data.size(), "byte");
  if (data.compare(0, 4, "LF01") != 0) throw FormatError(path, "bad LF01 magic", 0, "byte");
  const std::uint64_t rows = read_u32(data, 4), cols = read_u32(data, 8);
  const std::uint64_t need = 12 + rows * cols * 4;
  if (data.size() < need)
    throw FormatError(path, "truncated LF01 body, expected " + std::to_string(need) + " bytes",
                      data.size(), "byte");
  if (data.size() > need)
    throw FormatError(path, "trailing bytes after LF01 body", need, "byte");
  RowMatrixXf out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  if (out.size() > 0)
    std::memcpy(out.data(), data.data() + 12, static_cast<std::size_t>(out.size()) * 4);
  return out;
}

void write_lf01(const RowMatrixXf& tensor, const std::string& path) {
  if (static_cast<std::uint64_t>(tensor.rows()) > std::numeric_limits<std::uint32_t>::max() ||
      static_cast<std::uint64_t>(tensor.cols()) > std::numeric_limits<std::uint32_t>::max())
    throw DataError("LF01 tensor too large for " + path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  const auto rows = static_cast<std::uint32_t>(tensor.rows());
  const auto cols = static_cast<std::uint32_t>(tensor.cols());
  out.write("LF01", 4);
  out.write(reinterpret_cast<const char*>(&rows), 4);
  out.write(reinterpret_cast<const char*>(&cols), 4);
  out.write(reinterpret_cast<const char*>(tensor.data()),
            static_cast<std::streamsize>(tensor.size() * 4));
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace wsseg
