#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ralmac/lesion.hpp"

namespace ralmac {

inline constexpr const char* kAnnotationHeader =
    "patient_id,timepoint_id,series_id,reader_id,class,source_label,x_mm,y_mm,z_mm";

/// Reader annotations for any number of patients, kept in canonical order so
/// that tables built from shuffled rows compare equal.
class AnnotationTable {
 public:
  AnnotationTable() = default;
  /// Throws DataError on duplicate keys, empty labels or non-finite centroids.
  explicit AnnotationTable(std::vector<LesionAnnotation> rows);

  const std::vector<LesionAnnotation>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }

  std::vector<std::string> patients() const;
  std::vector<LesionAnnotation> for_patient(const std::string& patient_id) const;
  /// Rows of one patient grouped by reader_id (sorted by reader id).
  std::map<std::string, std::vector<LesionAnnotation>> by_reader(const std::string& patient_id) const;

  friend bool operator==(const AnnotationTable&, const AnnotationTable&) = default;

 private:
  std::vector<LesionAnnotation> rows_;
};

AnnotationTable parse_annotations(const std::string& csv_text);
AnnotationTable load_annotations(const std::filesystem::path& csv_path);
std::string format_annotations(const AnnotationTable& table);
void save_annotations(const AnnotationTable& table, const std::filesystem::path& csv_path);

}  // namespace ralmac
