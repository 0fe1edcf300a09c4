#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace mrident {

/// Shortest round-trippable decimal representation of a double.
std::string format_double(double value);

std::vector<std::string> split_csv_line(const std::string& line);

std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);

}  // namespace mrident
