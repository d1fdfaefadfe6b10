#include "ralmac/volume_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "ralmac/errors.hpp"

namespace ralmac {

std::string_view to_string(DType t) {
  switch (t) {
    case DType::U8:
      return "u8";
    case DType::I16:
      return "i16";
    case DType::F32:
      return "f32";
  }
  return "f32";
}

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::U8:
      return 1;
    case DType::I16:
      return 2;
    case DType::F32:
      return 4;
  }
  return 4;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
std::array<T, 3> parse_triple(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  std::array<T, 3> out{};
  for (auto& v : out) {
    if (!(in >> v)) throw ParseError("header key '" + key + "' needs three numbers, got '" + value + "'");
  }
  std::string extra;
  if (in >> extra) throw ParseError("header key '" + key + "' has trailing content '" + extra + "'");
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

VolumeHeader parse_volume_header(std::string_view text) {
  VolumeHeader h;
  bool have_dims = false, have_spacing = false, have_origin = false, have_dtype = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto colon = t.find(':');
    if (colon == std::string::npos) throw ParseError("header line without ':' -> '" + t + "'");
    const std::string key = trim(std::string_view(t).substr(0, colon));
    const std::string value = trim(std::string_view(t).substr(colon + 1));
    if (key == "dims") {
      const auto d = parse_triple<long long>(key, value);
      for (auto n : d) {
        if (n < 1) throw ParseError("dims must be positive");
      }
      h.grid.dims = {static_cast<std::size_t>(d[0]), static_cast<std::size_t>(d[1]), static_cast<std::size_t>(d[2])};
      have_dims = true;
    } else if (key == "spacing") {
      const auto s = parse_triple<double>(key, value);
      for (auto v : s) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ParseError("spacing must be positive and finite");
      }
      h.grid.spacing = {s[0], s[1], s[2]};
      have_spacing = true;
    } else if (key == "origin") {
      const auto o = parse_triple<double>(key, value);
      h.grid.origin = {o[0], o[1], o[2]};
      if (!h.grid.origin.is_finite()) throw ParseError("origin must be finite");
      have_origin = true;
    } else if (key == "dtype") {
      if (value == "u8") {
        h.dtype = DType::U8;
      } else if (value == "i16") {
        h.dtype = DType::I16;
      } else if (value == "f32") {
        h.dtype = DType::F32;
      } else {
        throw ParseError("unsupported dtype '" + value + "'");
      }
      have_dtype = true;
    } else if (key == "byte_order") {
      if (value != "little") throw ParseError("only little-endian raw data is supported");
    } else {
      throw ParseError("unknown header key '" + key + "'");
    }
  }
  if (!have_dims || !have_spacing || !have_origin || !have_dtype) {
    throw ParseError("header must define dims, spacing, origin and dtype");
  }
  return h;
}

VolumeHeader read_volume_header(const std::filesystem::path& header_path) {
  return parse_volume_header(read_file(header_path));
}

std::string format_volume_header(const VolumeHeader& header) {
  std::ostringstream out;
  out << std::setprecision(17);
  const auto& g = header.grid;
  out << "dims: " << g.dims.nx << ' ' << g.dims.ny << ' ' << g.dims.nz << '\n';
  out << "spacing: " << g.spacing.x << ' ' << g.spacing.y << ' ' << g.spacing.z << '\n';
  out << "origin: " << g.origin.x << ' ' << g.origin.y << ' ' << g.origin.z << '\n';
  out << "dtype: " << to_string(header.dtype) << '\n';
  return out.str();
}

Volume load_volume(const std::filesystem::path& header_path, const std::filesystem::path& raw_path) {
  const VolumeHeader h = read_volume_header(header_path);
  const std::string raw = read_file(raw_path);
  const std::size_t n = h.grid.dims.count();
  const std::size_t width = dtype_size(h.dtype);
  if (raw.size() != n * width) {
    throw SizeError("raw file " + raw_path.string() + " has " + std::to_string(raw.size()) + " bytes, expected " +
                    std::to_string(n * width));
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
  std::vector<double> voxels(n);
  for (std::size_t v = 0; v < n; ++v) {
    const unsigned char* b = bytes + v * width;
    switch (h.dtype) {
      case DType::U8:
        voxels[v] = b[0];
        break;
      case DType::I16:
        voxels[v] = static_cast<std::int16_t>(static_cast<std::uint16_t>(b[0] | (b[1] << 8)));
        break;
      case DType::F32: {
        const std::uint32_t bits = std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
                                   (std::uint32_t{b[3]} << 24);
        const float f = std::bit_cast<float>(bits);
        if (!std::isfinite(f)) throw DataError("non-finite f32 voxel at index " + std::to_string(v));
        voxels[v] = f;
        break;
      }
    }
  }
  return Volume(h.grid, std::move(voxels));
}

void save_volume(const Volume& v, const std::filesystem::path& header_path, const std::filesystem::path& raw_path,
                 DType dtype) {
  const std::size_t width = dtype_size(dtype);
  std::string raw(v.size() * width, '\0');
  auto* out = reinterpret_cast<unsigned char*>(raw.data());
  std::size_t idx = 0;
  for (double value : v.voxels()) {
    unsigned char* b = out + idx * width;
    switch (dtype) {
      case DType::U8:
        b[0] = static_cast<unsigned char>(std::clamp(std::nearbyint(value), 0.0, 255.0));
        break;
      case DType::I16: {
        const auto s = static_cast<std::int16_t>(std::clamp(std::nearbyint(value), -32768.0, 32767.0));
        const auto u = static_cast<std::uint16_t>(s);
        b[0] = static_cast<unsigned char>(u & 0xff);
        b[1] = static_cast<unsigned char>(u >> 8);
        break;
      }
      case DType::F32: {
        const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
        for (int k = 0; k < 4; ++k) b[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xff);
        break;
      }
    }
    ++idx;
  }
  {
    std::ofstream hdr(header_path, std::ios::binary);
    if (!hdr) throw Error("cannot write " + header_path.string());
    hdr << format_volume_header({v.grid(), dtype});
  }
  std::ofstream out_raw(raw_path, std::ios::binary);
  if (!out_raw) throw Error("cannot write " + raw_path.string());
  out_raw.write(raw.data(), static_cast<std::streamsize>(raw.size()));
}

namespace {

std::filesystem::path with_extension(const std::filesystem::path& stem, const char* ext) {
  const auto current = stem.extension();
  if (current == ".hdr" || current == ".raw") {
    auto p = stem;
    return p.replace_extension(ext);
  }
  return std::filesystem::path(stem.string() + ext);
}

}  // namespace

std::filesystem::path header_path_for(const std::filesystem::path& stem) { return with_extension(stem, ".hdr"); }

std::filesystem::path raw_path_for(const std::filesystem::path& stem) { return with_extension(stem, ".raw"); }

Volume load_volume(const std::filesystem::path& path) {
  return load_volume(header_path_for(path), raw_path_for(path));
}

void save_volume(const Volume& v, const std::filesystem::path& path, DType dtype) {
  save_volume(v, header_path_for(path), raw_path_for(path), dtype);
}

}  // namespace ralmac
