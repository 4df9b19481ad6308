#pragma once

#include <istream>
#include <string>

#include "spca/dataset.hpp"

namespace spca {

/// Reads a numeric CSV (comma-separated, '.' decimal) into a DataSet. A
/// leading header row is tolerated: the first line is taken as data only if
/// every field parses as a number. Throws CsvParseError on malformed input.
DataSet read_csv_dataset(std::istream& in);
DataSet read_csv_dataset_file(const std::string& path);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double x);

}  // namespace spca
