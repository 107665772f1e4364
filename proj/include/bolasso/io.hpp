#pragma once

#include "bolasso/lasso.hpp"
#include "bolasso/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bolasso {

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;
};

/// Comma-separated numbers, one row per line. A first line that does not parse as
/// numbers is taken as the header. Throws IoError / InputError.
CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const Matrix& values, const std::vector<std::string>& header = {});

/// Shortest round-trip representation ("%.17g").
std::string format_double(double v);

/// Dataset file: columns x1..xp, y (header written, optional on read).
Dataset read_dataset(const std::string& path);
void write_dataset(const std::string& path, const Dataset& data);

Vector read_vector(const std::string& path);
void write_vector(const std::string& path, const Vector& v, const std::string& name = "value");

/// Breakpoint table: mu, active (1-based, space separated), w1..wp at every breakpoint.
void write_path_table(const std::string& path, const RegularizationPath& reg_path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// Creates the directory if needed and checks that a file can be written into it.
void ensure_output_dir(const std::string& dir);

uint64_t fnv1a64(const std::string& bytes);

}  // namespace bolasso
