#include "tcm/model_io.hpp"

#include <nlohmann/json.hpp>

#include "tcm/error.hpp"
#include "tcm/io_util.hpp"

namespace tcm {

using nlohmann::json;

namespace {

void check_header(const json& j, const char* format) {
  if (!j.is_object() || j.value("format", std::string{}) != format)
    throw FormatError(std::string("not a ") + format + " document");
  const int version = j.value("version", -1);
  if (version != kModelFormatVersion)
    throw FormatError(std::string(format) + ": unsupported version " + std::to_string(version));
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace

std::string tree_to_json(const TreeModel& m) {
  json nodes = json::array();
  for (const auto& n : m.nodes) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"label", n.label},
                     {"counts", {n.count0, n.count1}}});
  }
  json j = {{"format", "tcm.tree"},
            {"version", kModelFormatVersion},
            {"criterion", m.criterion},
            {"min_samples_split", m.config.min_samples_split},
            {"n_features", m.n_features},
            {"feature_names", m.feature_names},
            {"nodes", nodes}};
  return j.dump(1) + "\n";
}

TreeModel tree_from_json(const std::string& text) {
  const json j = parse(text);
  check_header(j, "tcm.tree");
  TreeModel m;
  try {
    m.criterion = j.at("criterion").get<std::string>();
    m.config.min_samples_split = j.at("min_samples_split").get<std::size_t>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& n : j.at("nodes")) {
      TreeNode node;
      node.feature = n.at("feature").get<int>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
      node.label = n.at("label").get<int>();
      node.count0 = n.at("counts").at(0).get<std::size_t>();
      node.count1 = n.at("counts").at(1).get<std::size_t>();
      m.nodes.push_back(node);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("tcm.tree: ") + e.what());
  }
  const int count = static_cast<int>(m.nodes.size());
  if (count == 0) throw FormatError("tcm.tree: no nodes");
  for (const auto& n : m.nodes) {
    if (n.is_leaf()) continue;
    if (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count || n.feature < 0 ||
        static_cast<std::size_t>(n.feature) >= m.n_features)
      throw FormatError("tcm.tree: node references out of range");
  }
  return m;
}

std::string svc_to_json(const SvcModel& m) {
  json j = {{"format", "tcm.svc"},
            {"version", kModelFormatVersion},
            {"kernel", "rbf"},
            {"gamma", m.gamma},
            {"C", m.c},
            {"bias", m.bias},
            {"feature_names", m.feature_names},
            {"standardizer",
             {{"mean", m.standardizer.mean},
              {"scale", m.standardizer.scale},
              {"constant", m.standardizer.constant}}},
            {"support_vectors", m.support_vectors},
            {"dual_coef", m.dual_coef}};
  return j.dump(1) + "\n";
}

SvcModel svc_from_json(const std::string& text) {
  const json j = parse(text);
  check_header(j, "tcm.svc");
  SvcModel m;
  try {
    if (j.at("kernel").get<std::string>() != "rbf") throw FormatError("tcm.svc: kernel must be rbf");
    m.gamma = j.at("gamma").get<double>();
    m.c = j.at("C").get<double>();
    m.bias = j.at("bias").get<double>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const auto& st = j.at("standardizer");
    m.standardizer.mean = st.at("mean").get<std::vector<double>>();
    m.standardizer.scale = st.at("scale").get<std::vector<double>>();
    m.standardizer.constant = st.at("constant").get<std::vector<bool>>();
    m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    m.dual_coef = j.at("dual_coef").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("tcm.svc: ") + e.what());
  }
  if (m.dual_coef.size() != m.support_vectors.size())
    throw FormatError("tcm.svc: dual_coef and support_vectors sizes differ");
  const std::size_t d = m.n_features();
  for (const auto& sv : m.support_vectors)
    if (sv.size() != d) throw FormatError("tcm.svc: support vector width mismatch");
  if (m.standardizer.scale.size() != m.standardizer.mean.size() ||
      m.standardizer.constant.size() != m.standardizer.mean.size())
    throw FormatError("tcm.svc: standardizer arrays differ in length");
  return m;
}

void save_model(const std::filesystem::path& path, const AnyModel& model) {
  const std::string text = std::holds_alternative<TreeModel>(model)
                               ? tree_to_json(std::get<TreeModel>(model))
                               : svc_to_json(std::get<SvcModel>(model));
  io::write_text_file(path, text);
}

AnyModel load_model(const std::filesystem::path& path) {
  const std::string text = io::read_text_file(path);
  const json j = parse(text);
  const std::string format = j.is_object() ? j.value("format", std::string{}) : std::string{};
  try {
    if (format == "tcm.tree") return tree_from_json(text);
    if (format == "tcm.svc") return svc_from_json(text);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  throw FormatError(path.string() + ": unknown model format '" + format + "'");
}

std::string model_kind(const AnyModel& model) {
  return std::holds_alternative<TreeModel>(model) ? "tree" : "svc";
}

const std::vector<std::string>& model_feature_names(const AnyModel& model) {
  return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.feature_names; },
                    model);
}

std::vector<int> predict(const AnyModel& model, const Matrix& x) {
  return std::visit([&](const auto& m) { return predict(m, x); }, model);
}

}  // namespace tcm
