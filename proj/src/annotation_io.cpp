#include "ralmac/annotation_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "ralmac/errors.hpp"

namespace ralmac {

namespace {

bool row_less(const LesionAnnotation& a, const LesionAnnotation& b) {
  return std::tie(a.patient_id, a.timepoint_id, a.series_id, a.reader_id, a.lesion_class, a.source_label) <
         std::tie(b.patient_id, b.timepoint_id, b.series_id, b.reader_id, b.lesion_class, b.source_label);
}

bool same_key(const LesionAnnotation& a, const LesionAnnotation& b) {
  return a.patient_id == b.patient_id && a.key() == b.key();
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Data rows count from 1 after the header; line numbers count the header too.
std::string where(std::size_t line) {
  return "row " + std::to_string(line - 1) + " (line " + std::to_string(line) + ")";
}

double parse_coordinate(const std::string& text, std::size_t row, const char* column) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw DataError(where(row) + ": cannot parse " + column + " value '" + text + "'");
  }
  return value;
}

}  // namespace

AnnotationTable::AnnotationTable(std::vector<LesionAnnotation> rows) : rows_(std::move(rows)) {
  for (const auto& r : rows_) {
    if (r.source_label.empty()) throw DataError("annotation with empty source_label");
    if (!r.centroid.is_finite()) throw DataError("annotation " + r.source_label + " has a non-finite centroid");
  }
  std::sort(rows_.begin(), rows_.end(), row_less);
  const auto dup = std::adjacent_find(rows_.begin(), rows_.end(), same_key);
  if (dup != rows_.end()) {
    throw DataError("duplicate annotation key: patient " + dup->patient_id + ", timepoint " + dup->timepoint_id +
                    ", series " + dup->series_id + ", reader " + dup->reader_id + ", label " + dup->source_label);
  }
}

std::vector<std::string> AnnotationTable::patients() const {
  std::vector<std::string> out;
  for (const auto& r : rows_) {
    if (out.empty() || out.back() != r.patient_id) out.push_back(r.patient_id);
  }
  return out;
}

std::vector<LesionAnnotation> AnnotationTable::for_patient(const std::string& patient_id) const {
  std::vector<LesionAnnotation> out;
  std::copy_if(rows_.begin(), rows_.end(), std::back_inserter(out),
               [&](const LesionAnnotation& r) { return r.patient_id == patient_id; });
  return out;
}

std::map<std::string, std::vector<LesionAnnotation>> AnnotationTable::by_reader(const std::string& patient_id) const {
  std::map<std::string, std::vector<LesionAnnotation>> out;
  for (const auto& r : rows_) {
    if (r.patient_id == patient_id) out[r.reader_id].push_back(r);
  }
  return out;
}

AnnotationTable parse_annotations(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) throw ParseError("annotation CSV has no header row");
  static const std::vector<std::string> kColumns = {"patient_id", "timepoint_id", "series_id",
                                                    "reader_id",  "class",        "source_label",
                                                    "x_mm",       "y_mm",         "z_mm"};
  if (header[0].starts_with("\xEF\xBB\xBF")) header[0] = header[0].substr(3);
  for (const auto& column : kColumns) {
    if (std::find(header.begin(), header.end(), column) == header.end()) {
      throw ParseError("annotation CSV is missing column '" + column + "'");
    }
  }
  std::array<std::size_t, 9> pos{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    pos[c] = static_cast<std::size_t>(std::find(header.begin(), header.end(), kColumns[c]) - header.begin());
  }

  std::vector<LesionAnnotation> rows;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw ParseError(where(row_number) + " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(header.size()));
    }
    LesionAnnotation a;
    a.patient_id = fields[pos[0]];
    a.timepoint_id = fields[pos[1]];
    a.series_id = fields[pos[2]];
    a.reader_id = fields[pos[3]];
    const auto cls = parse_lesion_class(fields[pos[4]]);
    if (!cls) throw DataError(where(row_number) + ": unknown class '" + fields[pos[4]] + "'");
    a.lesion_class = *cls;
    a.source_label = fields[pos[5]];
    if (a.source_label.empty()) throw DataError(where(row_number) + ": empty source_label");
    a.centroid = {parse_coordinate(fields[pos[6]], row_number, "x_mm"),
                  parse_coordinate(fields[pos[7]], row_number, "y_mm"),
                  parse_coordinate(fields[pos[8]], row_number, "z_mm")};
    rows.push_back(std::move(a));
  }
  return AnnotationTable(std::move(rows));
}

AnnotationTable load_annotations(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ParseError("cannot open " + csv_path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_annotations(buf.str());
}

std::string format_annotations(const AnnotationTable& table) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << kAnnotationHeader << '\n';
  for (const auto& r : table.rows()) {
    out << r.patient_id << ',' << r.timepoint_id << ',' << r.series_id << ',' << r.reader_id << ','
        << to_string(r.lesion_class) << ',' << r.source_label << ',' << r.centroid.x << ',' << r.centroid.y << ','
        << r.centroid.z << '\n';
  }
  return out.str();
}

void save_annotations(const AnnotationTable& table, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw Error("cannot write " + csv_path.string());
  out << format_annotations(table);
}

}  // namespace ralmac
