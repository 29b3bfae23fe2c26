#include "tcm/trace_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tcm/error.hpp"
#include "tcm/io_util.hpp"

namespace tcm {

using nlohmann::json;

Trace read_trace(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return read_trace_csv(path);
  return read_trace_binary(path);
}

Trace read_trace_binary(const std::filesystem::path& path) {
  const auto meta_path = io::sidecar_path(path);
  json meta;
  try {
    meta = json::parse(io::read_text_file(meta_path));
  } catch (const json::exception& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }
  const std::vector<float> raw = io::read_f32_le(path);
  double dt = kDefaultSampleInterval;
  std::string unit = "g";
  std::string source = path.stem().string();
  try {
    dt = meta.value("sample_interval", kDefaultSampleInterval);
    unit = meta.value("unit", unit);
    source = meta.value("source_id", source);
    if (meta.contains("n_samples") && meta.at("n_samples").get<std::size_t>() != raw.size())
      throw FormatError(meta_path.string() + ": n_samples does not match payload size");
  } catch (const json::exception& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }
  return Trace(std::vector<double>(raw.begin(), raw.end()), dt, source, unit);
}

Trace parse_trace_csv(std::istream& in, const std::string& source_id) {
  double dt = kDefaultSampleInterval;
  std::string unit = "g";
  std::string source = source_id;
  std::vector<double> samples;
  bool header_seen = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = io::trim(line);
    if (sv.empty()) continue;
    if (sv.front() == '#') {
      std::string_view body = io::trim(sv.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string_view key = io::trim(body.substr(0, eq));
      const std::string_view value = io::trim(body.substr(eq + 1));
      if (key == "sample_interval") dt = io::parse_double(value, "sample_interval");
      else if (key == "unit") unit = std::string(value);
      else if (key == "source_id") source = std::string(value);
      continue;
    }
    if (!header_seen) {
      if (sv != "accel")
        throw FormatError(source_id + ": expected header row 'accel', got '" +
                          std::string(sv) + "'");
      header_seen = true;
      continue;
    }
    samples.push_back(io::parse_double(sv, source_id + " line " + std::to_string(lineno)));
  }
  if (!header_seen) throw FormatError(source_id + ": missing 'accel' header");
  return Trace(std::move(samples), dt, source, unit);
}

Trace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return parse_trace_csv(in, path.stem().string());
}

void write_trace_binary(const std::filesystem::path& path, const Trace& trace) {
  std::vector<float> raw(trace.samples().begin(), trace.samples().end());
  io::write_f32_le(path, raw);
  json meta = {{"sample_interval", trace.sample_interval()},
               {"unit", trace.unit()},
               {"source_id", trace.source_id()},
               {"n_samples", trace.size()}};
  io::write_text_file(io::sidecar_path(path), meta.dump(2) + "\n");
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace) {
  std::ostringstream os;
  os << "# sample_interval=" << io::format_double(trace.sample_interval()) << "\n";
  os << "# unit=" << trace.unit() << "\n";
  if (!trace.source_id().empty()) os << "# source_id=" << trace.source_id() << "\n";
  os << "accel\n";
  for (double v : trace.samples()) os << io::format_double(v) << "\n";
  io::write_text_file(path, os.str());
}

void write_segments_csv(std::ostream& out, const std::vector<Segment>& segments,
                        double sample_interval) {
  out << "start_index,end_index,start_s,end_s\n";
  for (const auto& s : segments) {
    out << s.start << ',' << s.end << ','
        << io::format_double(static_cast<double>(s.start) * sample_interval) << ','
        << io::format_double(static_cast<double>(s.end) * sample_interval) << '\n';
  }
}

void write_segments_csv(const std::filesystem::path& path,
                        const std::vector<Segment>& segments, double sample_interval) {
  std::ostringstream os;
  write_segments_csv(os, segments, sample_interval);
  io::write_text_file(path, os.str());
}

std::vector<Segment> read_segments_csv(const std::filesystem::path& path) {
  std::istringstream in(io::read_text_file(path));
  std::string line;
  if (!std::getline(in, line) ||
      io::trim(line) != "start_index,end_index,start_s,end_s")
    throw FormatError(path.string() + ": bad segment CSV header");
  std::vector<Segment> out;
  while (std::getline(in, line)) {
    if (io::trim(line).empty()) continue;
    const auto cols = io::split_csv_line(line);
    if (cols.size() != 4) throw FormatError(path.string() + ": expected 4 columns");
    Segment s;
    s.start = static_cast<std::size_t>(io::parse_int(cols[0], path.string()));
    s.end = static_cast<std::size_t>(io::parse_int(cols[1], path.string()));
    s.parent = path.stem().string();
    out.push_back(s);
  }
  return out;
}

}  // namespace tcm
