#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "tcm/classify.hpp"

namespace tcm {

// Model files are JSON documents:
//   *.tree.json  {"format":"tcm.tree","version":1,"criterion":"gini",
//                 "min_samples_split":2,"n_features":N,"feature_names":[...],
//                 "nodes":[{"feature":f,"threshold":t,"left":l,"right":r,
//                           "label":c,"counts":[n0,n1]}, ...]}   (leaf: left=right=-1)
//   *.svc.json   {"format":"tcm.svc","version":1,"kernel":"rbf","gamma":g,"C":c,
//                 "bias":b,"feature_names":[...],
//                 "standardizer":{"mean":[...],"scale":[...],"constant":[...]},
//                 "support_vectors":[[...],...],"dual_coef":[...]}
// Doubles are written in shortest round-trip form, so reloading is exact.

inline constexpr int kModelFormatVersion = 1;

using AnyModel = std::variant<TreeModel, SvcModel>;

std::string tree_to_json(const TreeModel& model);
std::string svc_to_json(const SvcModel& model);
TreeModel tree_from_json(const std::string& text);
SvcModel svc_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const AnyModel& model);
AnyModel load_model(const std::filesystem::path& path);

std::string model_kind(const AnyModel& model);  // "tree" or "svc"
const std::vector<std::string>& model_feature_names(const AnyModel& model);
std::vector<int> predict(const AnyModel& model, const Matrix& x);

}  // namespace tcm
