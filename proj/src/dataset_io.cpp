#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tcm/dataset.hpp"
#include "tcm/error.hpp"
#include "tcm/io_util.hpp"

namespace tcm {

using nlohmann::json;
using io::format_double;

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::istringstream in(io::read_text_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (io::trim(line).empty()) continue;
    lines.push_back(line);
  }
  return lines;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

json parse_json(const std::filesystem::path& path) {
  try {
    return json::parse(io::read_text_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

// --- labels -------------------------------------------------------------------

void write_label_csv(const std::filesystem::path& path, const LabelSeries& labels) {
  labels.validate();
  std::string out = "t_start_s,tool_state\n";
  for (const auto& [t, s] : labels.changes) out += format_double(t) + "," + std::to_string(s) + "\n";
  io::write_text_file(path, out);
}

LabelSeries read_label_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || io::trim(lines[0]) != "t_start_s,tool_state")
    throw FormatError(path.string() + ": expected header t_start_s,tool_state");
  LabelSeries labels;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = io::split_csv_line(lines[i]);
    if (f.size() != 2) throw FormatError(where(path, i + 1) + ": expected 2 fields");
    const double t = io::parse_double(f[0], where(path, i + 1));
    const long long s = io::parse_int(f[1], where(path, i + 1));
    labels.changes.emplace_back(t, static_cast<int>(s));
  }
  try {
    labels.validate();
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return labels;
}

// --- feature CSV ------------------------------------------------------------------

namespace {

std::vector<std::string> feature_csv_header() {
  auto h = canonical_feature_names();
  h.insert(h.end(), {"cycle_id", "t_start_s", "label"});
  return h;
}

}  // namespace

void write_feature_csv(std::ostream& out, const Dataset& data) {
  const auto header = feature_csv_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& c : data.cycles) {
    if (c.cycle_id.find(',') != std::string::npos)
      throw ParameterError("cycle id '" + c.cycle_id + "' contains a comma");
    for (std::size_t w = 0; w < c.size(); ++w) {
      const auto& fv = c.windows[w];
      for (double v : fv.values) out << format_double(v) << ',';
      out << c.cycle_id << ',' << format_double(fv.t_start_s) << ','
          << (w < c.labels.size() ? c.labels[w] : -1) << '\n';
    }
  }
}

void write_feature_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ostringstream os;
  write_feature_csv(os, data);
  io::write_text_file(path, os.str());
}

Dataset read_feature_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  const auto header = feature_csv_header();
  if (lines.empty()) throw FormatError(path.string() + ": empty feature file");
  std::vector<std::string> got;
  for (const auto& f : io::split_csv_line(lines[0])) got.emplace_back(io::trim(f));
  if (got != header) {
    std::string msg = path.string() + ": feature columns do not match the expected schema";
    for (std::size_t i = 0; i < std::max(got.size(), header.size()); ++i) {
      const std::string a = i < got.size() ? got[i] : "<missing>";
      const std::string b = i < header.size() ? header[i] : "<extra>";
      if (a != b) {
        msg += " (column " + std::to_string(i + 1) + ": '" + a + "', expected '" + b + "')";
        break;
      }
    }
    throw SchemaError(msg);
  }

  Dataset data;
  std::map<std::string, std::size_t> index;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = io::split_csv_line(lines[li]);
    const std::string ctx = where(path, li + 1);
    if (f.size() != header.size())
      throw FormatError(ctx + ": expected " + std::to_string(header.size()) + " fields");
    FeatureVector fv;
    for (std::size_t k = 0; k < kFeatureCount; ++k) fv.values[k] = io::parse_double(f[k], ctx);
    fv.cycle_id = std::string(io::trim(f[kFeatureCount]));
    fv.t_start_s = io::parse_double(f[kFeatureCount + 1], ctx);
    const long long label = io::parse_int(f[kFeatureCount + 2], ctx);
    if (label < -1 || label > 1) throw FormatError(ctx + ": label must be -1, 0 or 1");
    auto [it, fresh] = index.emplace(fv.cycle_id, data.cycles.size());
    if (fresh) {
      data.cycles.emplace_back();
      data.cycles.back().cycle_id = fv.cycle_id;
    }
    auto& cycle = data.cycles[it->second];
    cycle.labels.push_back(static_cast<int>(label));
    cycle.windows.push_back(std::move(fv));
  }
  return data;
}

// --- manifest --------------------------------------------------------------------

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  json cycles = json::array();
  for (const auto& e : m.cycles) {
    cycles.push_back({{"cycle_id", e.cycle_id},
                      {"machine_id", e.machine_id},
                      {"trace", e.trace},
                      {"labels", e.labels},
                      {"segments", e.segments},
                      {"seed", e.seed},
                      {"wear_transition", e.wear_transition}});
  }
  json j = {{"format", "tcm.manifest"},
            {"version", 1},
            {"machine_id", m.machine_id},
            {"sample_interval", m.sample_interval},
            {"spindle_rpm", m.spindle_rpm},
            {"flutes", m.flutes},
            {"cycles", cycles}};
  io::write_text_file(path, j.dump(1) + "\n");
}

Manifest read_manifest(const std::filesystem::path& path) {
  const json j = parse_json(path);
  if (!j.is_object() || j.value("format", std::string{}) != "tcm.manifest")
    throw FormatError(path.string() + ": not a tcm.manifest document");
  if (j.value("version", -1) != 1)
    throw FormatError(path.string() + ": unsupported manifest version");
  Manifest m;
  try {
    m.machine_id = j.at("machine_id").get<std::string>();
    m.sample_interval = j.at("sample_interval").get<double>();
    m.spindle_rpm = j.at("spindle_rpm").get<double>();
    m.flutes = j.at("flutes").get<unsigned>();
    for (const auto& c : j.at("cycles")) {
      ManifestEntry e;
      e.cycle_id = c.at("cycle_id").get<std::string>();
      e.machine_id = c.value("machine_id", m.machine_id);
      e.trace = c.at("trace").get<std::string>();
      e.labels = c.at("labels").get<std::string>();
      e.segments = c.value("segments", std::string{});
      e.seed = c.value("seed", std::uint64_t{0});
      e.wear_transition = c.value("wear_transition", 0.0);
      m.cycles.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return m;
}

// --- split record -------------------------------------------------------------------

std::string split_to_json(const SplitPlan& plan) {
  json j = {{"format", "tcm.split"},
            {"version", 1},
            {"train_fraction", plan.train_fraction},
            {"seed", plan.seed},
            {"train", plan.train},
            {"validation", plan.validation}};
  return j.dump(1) + "\n";
}

SplitPlan split_from_json(const std::string& text) {
  SplitPlan plan;
  try {
    const json j = json::parse(text);
    if (j.value("format", std::string{}) != "tcm.split")
      throw FormatError("not a tcm.split document");
    plan.train_fraction = j.at("train_fraction").get<double>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.train = j.at("train").get<std::vector<std::string>>();
    plan.validation = j.at("validation").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("split record: ") + e.what());
  }
  return plan;
}

// --- reports ---------------------------------------------------------------------

void write_predictions_csv(const std::filesystem::path& path, const EvalReport& report) {
  std::ostringstream os;
  os << "cycle_id,t_s,raw_label,filtered_label,true_label\n";
  for (const auto& c : report.cycles)
    for (std::size_t i = 0; i < c.truth.size(); ++i)
      os << c.cycle_id << ',' << format_double(c.t_s[i]) << ',' << c.raw[i] << ','
         << c.filtered[i] << ',' << c.truth[i] << '\n';
  io::write_text_file(path, os.str());
}

void write_delays_csv(const std::filesystem::path& path, const EvalReport& report) {
  std::ostringstream os;
  os << "cycle_id,true_transition,predicted_transition,delay\n";
  auto opt = [](const auto& v) { return v ? std::to_string(*v) : std::string{}; };
  for (const auto& c : report.cycles)
    os << c.cycle_id << ',' << opt(c.true_transition) << ',' << opt(c.predicted_transition) << ','
       << opt(c.delay) << '\n';
  io::write_text_file(path, os.str());
}

void write_summary_csv(const std::filesystem::path& path, const EvalReport& report) {
  std::ostringstream os;
  os << "metric,value\n";
  os << "accuracy," << format_double(report.accuracy) << '\n';
  os << "raw_accuracy," << format_double(report.raw_accuracy) << '\n';
  os << "tp," << report.confusion.tp << '\n';
  os << "tn," << report.confusion.tn << '\n';
  os << "fp," << report.confusion.fp << '\n';
  os << "fn," << report.confusion.fn << '\n';
  os << "windows," << report.confusion.total() << '\n';
  os << "cycles," << report.cycles.size() << '\n';
  io::write_text_file(path, os.str());
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "model,train_fraction,seed,accuracy\n";
  for (const auto& c : result.cells)
    out << c.model << ',' << format_double(c.train_fraction) << ',' << c.seed << ','
        << (c.accuracy ? format_double(*c.accuracy) : std::string("failed")) << '\n';
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
  std::ostringstream os;
  write_sweep_csv(os, result);
  io::write_text_file(path, os.str());
}

void write_grid_csv(const std::filesystem::path& path, const SweepResult& result) {
  std::ostringstream os;
  os << "model,train_fraction,mean_accuracy,n_ok\n";
  for (std::size_t m = 0; m < result.model_names.size(); ++m) {
    for (std::size_t f = 0; f < result.fractions.size(); ++f) {
      std::size_t ok = 0;
      for (const auto& c : result.cells)
        if (c.model == result.model_names[m] && c.train_fraction == result.fractions[f] && c.accuracy)
          ++ok;
      const auto& v = result.grid[m][f];
      os << result.model_names[m] << ',' << format_double(result.fractions[f]) << ','
         << (v ? format_double(*v) : std::string("failed")) << ',' << ok << '\n';
    }
  }
  io::write_text_file(path, os.str());
}

}  // namespace tcm
