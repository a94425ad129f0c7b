#include "fasdoa/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "fasdoa/error.hpp"

namespace fasdoa {

using nlohmann::json;

namespace {

std::filesystem::path with_suffix(std::filesystem::path p, const char* ext) {
  p += ext;
  return p;
}

void put_f32(std::ostream& os, float v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

float get_f32(const unsigned char* b) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, path.string() + ": " + e.what());
  }
}

}  // namespace

json geometry_to_json(const ArrayGeometry& geom) {
  return json{{"wavelength", geom.wavelength()},
              {"aperture", geom.aperture()},
              {"positions", std::vector<double>(geom.positions().begin(), geom.positions().end())}};
}

ArrayGeometry geometry_from_json(const json& j) {
  try {
    return ArrayGeometry(j.at("positions").get<std::vector<double>>(), j.at("wavelength").get<double>(),
                         j.at("aperture").get<double>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("bad geometry JSON: ") + e.what());
  }
}

ArrayGeometry read_geometry(const std::filesystem::path& path) { return geometry_from_json(read_json_file(path)); }

void write_geometry(const std::filesystem::path& path, const ArrayGeometry& geom) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  os << geometry_to_json(geom).dump(2) << '\n';
}

void write_snapshots(const std::filesystem::path& stem, const SnapshotData& data) {
  std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw Error(ErrorKind::Io, "cannot write " + with_suffix(stem, ".bin").string());
  for (Eigen::Index i = 0; i < data.x.rows(); ++i)
    for (Eigen::Index t = 0; t < data.x.cols(); ++t) {
      put_f32(bin, static_cast<float>(data.x(i, t).real()));
      put_f32(bin, static_cast<float>(data.x(i, t).imag()));
    }
  std::ofstream side(with_suffix(stem, ".json"));
  if (!side) throw Error(ErrorKind::Io, "cannot write " + with_suffix(stem, ".json").string());
  side << json{{"rows", data.x.rows()},
               {"cols", data.x.cols()},
               {"dtype", "complex64"},
               {"byte_order", "little"},
               {"layout", "row-major"},
               {"seed", data.seed},
               {"geometry", geometry_to_json(data.geometry)}}
              .dump(2)
       << '\n';
}

Eigen::MatrixXcd read_snapshot_matrix(const std::filesystem::path& stem) {
  const json side = read_json_file(with_suffix(stem, ".json"));
  const auto rows = side.at("rows").get<Eigen::Index>();
  const auto cols = side.at("cols").get<Eigen::Index>();
  std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw Error(ErrorKind::Io, "cannot open " + with_suffix(stem, ".bin").string());
  std::vector<unsigned char> buf(static_cast<std::size_t>(rows * cols * 8));
  bin.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (bin.gcount() != static_cast<std::streamsize>(buf.size()))
    throw Error(ErrorKind::Io, "snapshot file is shorter than its sidecar says");
  Eigen::MatrixXcd x(rows, cols);
  const unsigned char* p = buf.data();
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index t = 0; t < cols; ++t, p += 8) x(i, t) = cd(get_f32(p), get_f32(p + 4));
  return x;
}

}  // namespace fasdoa
