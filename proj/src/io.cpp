#include "sbglsu/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "sbglsu/errors.hpp"

namespace sbglsu::io {

namespace {

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error("write to " + path.string() + " failed");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_real(std::string_view field, std::size_t line) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParseError("invalid number '" + std::string(field) + "'", line);
  if (!std::isfinite(value)) throw ParseError("non-finite value '" + std::string(field) + "'", line);
  return value;
}

std::uint32_t parse_label(std::string_view field, std::size_t line) {
  std::uint32_t value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParseError("invalid label '" + std::string(field) + "'", line);
  return value;
}

// Non-blank lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!trim(line).empty()) lines.emplace_back(number, line);
  }
  return lines;
}

// Numeric CSV with a fixed column count; returns rows in file order.
std::vector<std::vector<double>> read_real_rows(const std::vector<std::pair<std::size_t, std::string>>& lines,
                                                std::size_t first, std::size_t columns) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = first; i < lines.size(); ++i) {
    const auto& [number, text] = lines[i];
    const auto fields = split(text);
    if (fields.size() != columns) {
      throw ParseError("row has " + std::to_string(fields.size()) + " fields, expected " + std::to_string(columns),
                       number);
    }
    std::vector<double> row;
    row.reserve(columns);
    for (const auto f : fields) row.push_back(parse_real(f, number));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_f64le(std::ostream& out, std::span<const double> values) {
  std::vector<unsigned char> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) {
      bytes[i * 8 + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits & 0xFFu);
      bits >>= 8;
    }
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<double> read_f64le(const fs::path& payload, std::size_t expected_bytes) {
  const auto actual = fs::file_size(payload);
  if (actual != expected_bytes) {
    throw FormatError(payload.string() + ": payload is " + std::to_string(actual) + " bytes, header implies " +
                      std::to_string(expected_bytes));
  }
  auto in = open_in(payload, std::ios::binary);
  std::vector<unsigned char> bytes(expected_bytes);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != expected_bytes) throw FormatError(payload.string() + ": short read");
  std::vector<double> values(expected_bytes / 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[i * 8 + static_cast<std::size_t>(b)];
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

}  // namespace

std::string format_real(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  if (ec != std::errc()) throw Error("failed to format real");
  return std::string(buf, ptr);
}

fs::path header_path_for(const fs::path& payload) {
  fs::path header = payload;
  header.replace_extension(".hdr.json");
  return header;
}

SpectralLibrary load_library(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw FormatError(path.string() + ": empty library file");
  std::vector<std::string> names;
  for (const auto f : split(lines.front().second)) {
    if (f.empty()) throw ParseError("empty signature name", lines.front().first);
    names.emplace_back(f);
  }
  const auto rows = read_real_rows(lines, 1, names.size());
  if (rows.empty()) throw FormatError(path.string() + ": library has no band rows");
  Matrix sig(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t b = 0; b < rows.size(); ++b)
    for (std::size_t j = 0; j < names.size(); ++j)
      sig(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) = rows[b][j];
  return SpectralLibrary(std::move(sig), std::move(names));
}

void save_library(const SpectralLibrary& library, const fs::path& path) {
  auto out = open_out(path);
  const auto& names = library.names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  const Matrix& a = library.matrix();
  for (Eigen::Index b = 0; b < a.rows(); ++b) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out << (j ? "," : "") << format_real(a(b, j));
    out << '\n';
  }
  finish(out, path);
}

CubeHeader read_cube_header(const fs::path& payload) {
  const fs::path hdr = header_path_for(payload);
  auto in = open_in(hdr);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(hdr.string() + ": " + e.what());
  }
  CubeHeader h;
  try {
    h.height = doc.at("height").get<std::size_t>();
    h.width = doc.at("width").get<std::size_t>();
    h.bands = doc.at("bands").get<std::size_t>();
    h.dtype = doc.at("dtype").get<std::string>();
    h.interleave = doc.at("interleave").get<std::string>();
    if (doc.contains("metadata")) h.metadata = doc.at("metadata");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(hdr.string() + ": " + e.what());
  }
  if (h.dtype != "f64le") throw FormatError(hdr.string() + ": unsupported dtype '" + h.dtype + "'");
  if (h.interleave != "bip") throw FormatError(hdr.string() + ": unsupported interleave '" + h.interleave + "'");
  return h;
}

HsiCube load_cube(const fs::path& payload) {
  const CubeHeader h = read_cube_header(payload);
  return HsiCube(h.height, h.width, h.bands, read_f64le(payload, h.payload_bytes()));
}

HsiCube load_raw_cube(const fs::path& payload, std::size_t height, std::size_t width, std::size_t bands) {
  return HsiCube(height, width, bands, read_f64le(payload, height * width * bands * 8));
}

void save_cube(const HsiCube& cube, const fs::path& payload, const nlohmann::json& metadata) {
  nlohmann::json doc = {{"height", cube.height()}, {"width", cube.width()}, {"bands", cube.bands()},
                        {"dtype", "f64le"},        {"interleave", "bip"},   {"metadata", metadata}};
  write_json(doc, header_path_for(payload));
  auto out = open_out(payload, std::ios::out | std::ios::binary);
  write_f64le(out, cube.data());
  finish(out, payload);
}

SuperpixelMap load_labels(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw FormatError(path.string() + ": empty label file");
  std::vector<std::uint32_t> labels;
  std::size_t width = 0;
  for (const auto& [number, text] : lines) {
    const auto fields = split(text);
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw ParseError("row has " + std::to_string(fields.size()) + " labels, expected " + std::to_string(width),
                       number);
    }
    for (const auto f : fields) labels.push_back(parse_label(f, number));
  }
  return SuperpixelMap(lines.size(), width, std::move(labels));
}

void save_labels(const SuperpixelMap& map, const fs::path& path) {
  auto out = open_out(path);
  for (std::size_t r = 0; r < map.height(); ++r) {
    for (std::size_t c = 0; c < map.width(); ++c) out << (c ? "," : "") << map.label(r, c);
    out << '\n';
  }
  finish(out, path);
}

Matrix load_matrix_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw FormatError(path.string() + ": empty matrix file");
  const auto rows = read_real_rows(lines, 0, split(lines.front().second).size());
  Matrix mat(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return mat;
}

void save_matrix_csv(const Matrix& mat, const fs::path& path) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) out << (j ? "," : "") << format_real(mat(i, j));
    out << '\n';
  }
  finish(out, path);
}

void save_abundance_pgm(const Matrix& s, std::size_t index, const fs::path& path, std::size_t height,
                        std::size_t width) {
  const Matrix image = endmember_map(s, index, height, width);
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << "P5\n" << width << ' ' << height << "\n255\n";
  std::vector<unsigned char> bytes(height * width);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double v = std::clamp(image(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)), 0.0, 1.0);
      bytes[r * width + c] = static_cast<unsigned char>(std::floor(255.0 * v + 0.5));
    }
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  finish(out, path);
  fs::path values = path;
  values.replace_extension(".csv");
  save_matrix_csv(image, values);
}

void write_convergence_csv(const ConvergenceRecord& record, std::ostream& out) {
  out << "outer_iter,objective,rmse\n";
  for (std::size_t i = 0; i < record.iterations(); ++i) {
    out << (i + 1) << ',' << format_real(record.objective[i]) << ',';
    if (i < record.rmse.size() && record.rmse[i]) out << format_real(*record.rmse[i]);
    out << '\n';
  }
}

void write_convergence_csv(const ConvergenceRecord& record, const fs::path& path) {
  auto out = open_out(path);
  write_convergence_csv(record, out);
  finish(out, path);
}

void write_report(const EvalReport& report, std::ostream& out, ReportFormat format) {
  if (format == ReportFormat::kCsv) {
    out << "metric,endmember,value\n";
    out << "sre_db,," << report.sre.to_string() << '\n';
    out << "rmse,," << format_real(report.rmse) << '\n';
    for (std::size_t k = 0; k < report.per_endmember_rmse.size(); ++k) {
      out << "endmember_rmse," << k << ',' << format_real(report.per_endmember_rmse[k]) << '\n';
    }
    return;
  }
  // JSON lines: one summary object, then one object per endmember.
  nlohmann::json summary = {{"rmse", report.rmse}};
  if (report.sre.is_infinite()) {
    summary["sre_db"] = "inf";
  } else {
    summary["sre_db"] = report.sre.db();
  }
  out << summary.dump() << '\n';
  for (std::size_t k = 0; k < report.per_endmember_rmse.size(); ++k) {
    out << nlohmann::json{{"endmember", k}, {"rmse", report.per_endmember_rmse[k]}}.dump() << '\n';
  }
}

void write_json(const nlohmann::json& doc, const fs::path& path) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

}  // namespace sbglsu::io
