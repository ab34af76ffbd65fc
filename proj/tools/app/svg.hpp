// Copyright 2026 The LSI Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Self-contained SVG scatter plots.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lsi::app {

/// points is n x 2; labels (optional) select marker colours.
std::string svg_scatter(const Eigen::MatrixXd& points, const std::vector<int>* labels, const std::string& title);
void write_svg_scatter(const std::filesystem::path& path, const Eigen::MatrixXd& points,
                       const std::vector<int>* labels, const std::string& title);

}  // namespace lsi::app
