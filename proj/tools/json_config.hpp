#pragma once

#include <istream>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace tcm::cli {

/// Reads a flat JSON object as CLI11 config items. Keys are long option
/// names ("train-fraction" or "train_fraction"); values may be strings,
/// numbers, booleans or arrays of those. Every key is attributed to
/// `section`, the subcommand being run, so flags always win over the file.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::string section) : section_(std::move(section)) {}

  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;

 private:
  std::string section_;
};

}  // namespace tcm::cli
