#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "keymps/dmp.hpp"

namespace keymps {

// CSV with header "t,x,y,z", seconds and meters, 9 significant digits.
std::string format_trajectory_csv(const Trajectory& trajectory);

// Inverse of format_trajectory_csv. ParseError names the offending line; the
// time column must be uniformly spaced.
Trajectory parse_trajectory_csv(std::string_view text);

void save_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path);
Trajectory load_trajectory_csv(const std::filesystem::path& path);

// Whole-file helpers shared by the loaders.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace keymps
