#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "ralmac/geometry.hpp"
#include "ralmac/lesion.hpp"

namespace testing {

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ralmac_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline ralmac::LesionAnnotation lesion(const std::string& tp, const std::string& series, const std::string& reader,
                                       const std::string& label, ralmac::Point3 c,
                                       ralmac::LesionClass cls = ralmac::LesionClass::Target,
                                       const std::string& patient = "P1") {
  return {patient, tp, series, reader, cls, label, c};
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace testing
