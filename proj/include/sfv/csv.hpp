#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sfv::csv {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Parses one numeric cell; returns false on any trailing garbage.
bool parse_double(std::string_view cell, double& out);

std::vector<std::string_view> split_row(std::string_view line);

/// Writes a matrix as comma-separated rows with round-trip exact values.
void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// One value per line.
void write_vector(const std::filesystem::path& path, const Eigen::VectorXd& v);

/// Reads a rectangular numeric table. A first row that fails numeric parsing
/// is taken as a header and skipped.
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

/// Reads a single column (or single row) of numbers as a vector.
Eigen::VectorXd read_vector(const std::filesystem::path& path);

/// Writes text to a file, replacing it; throws sfv::Error on failure.
void write_text(const std::filesystem::path& path, std::string_view text);

} // namespace sfv::csv
