#pragma once

#include <filesystem>
#include <string_view>

#include "ralmac/geometry.hpp"

namespace ralmac {

enum class DType { U8, I16, F32 };

std::string_view to_string(DType t);
std::size_t dtype_size(DType t);

/// Text sidecar describing a little-endian, x-fastest raw voxel file.
///
///     dims: 64 64 64
///     spacing: 2 2 2
///     origin: 0 0 0
///     dtype: i16
struct VolumeHeader {
  Grid grid;
  DType dtype = DType::F32;
};

VolumeHeader parse_volume_header(std::string_view text);
VolumeHeader read_volume_header(const std::filesystem::path& header_path);
std::string format_volume_header(const VolumeHeader& header);

/// Throws ParseError on a malformed header, SizeError when the raw length does
/// not match dims x dtype, DataError on NaN/Inf in f32 data.
Volume load_volume(const std::filesystem::path& header_path, const std::filesystem::path& raw_path);

/// Integer dtypes round to nearest and saturate.
void save_volume(const Volume& v, const std::filesystem::path& header_path, const std::filesystem::path& raw_path,
                 DType dtype = DType::F32);

/// `<stem>.hdr` / `<stem>.raw` pair.
std::filesystem::path header_path_for(const std::filesystem::path& stem);
std::filesystem::path raw_path_for(const std::filesystem::path& stem);

/// Accepts either the header path or the bare stem.
Volume load_volume(const std::filesystem::path& path);
void save_volume(const Volume& v, const std::filesystem::path& path, DType dtype = DType::F32);

}  // namespace ralmac
