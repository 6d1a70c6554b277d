// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include <yaml-cpp/yaml.h>

#include "dpfl/experiment.hpp"

namespace dpfl::detail {

ExperimentConfig parse_experiment_node(const YAML::Node& root);
YAML::Node load_yaml(const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace dpfl::detail
