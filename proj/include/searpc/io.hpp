#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace searpc {

using json = nlohmann::json;

/// Reads a whitespace-delimited sample file, one column per dimension.
/// Lines starting with '#' are skipped. Every row must have the same
/// number of columns.
Eigen::MatrixXd read_sample_matrix(const std::filesystem::path& path);

void write_sample_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& samples);

/// Writes content to a temporary file in the target directory and renames
/// it into place, so readers never observe a partially written artifact.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

/// FNV-1a 64-bit hash, used for content hashes of serialized artifacts.
std::uint64_t fnv1a64(std::string_view bytes);

std::string to_hex(std::uint64_t value);

} // namespace searpc
