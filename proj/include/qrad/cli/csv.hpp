#pragma once

#include "qrad/calibration.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace qrad::cli {

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest round-trip representation, so output is exact and reproducible.
std::string fmt(double v);

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void row(const std::vector<std::string>& cells);
    void comment(const std::string& text);
    std::string str() const { return out_; }

private:
    std::size_t width_;
    std::string out_;
};

struct SweepTable {
    CalibrationInputs inputs;  // far_threshold and n_vts_ref left for the caller
    std::vector<std::string> warnings;
};

/// Columns delta_a_rad_s, control_name (n_add | n_vts), control_value, n_r_eff and
/// optionally sigma, in any order. Lines starting with '#' are ignored.
SweepTable read_sweep_csv(std::istream& in, const std::string& source);
SweepTable read_sweep_csv_file(const std::string& path);
std::string sweep_csv(const CalibrationInputs& inputs);

/// Writes to a temporary sibling and renames it into place. "-" writes to stdout.
void write_output(const std::string& path, const std::string& content);

}  // namespace qrad::cli
