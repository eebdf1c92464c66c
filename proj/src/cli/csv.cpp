#include "qrad/cli/csv.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <system_error>

namespace qrad::cli {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) { row(header); }

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("CsvWriter: row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ += ',';
        out_ += cells[i];
    }
    out_ += '\n';
}

void CsvWriter::comment(const std::string& text) { out_ += "# " + text + "\n"; }

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_num(const std::string& s, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw SchemaError(where + ": not a number '" + s + "'");
    return v;
}

}  // namespace

SweepTable read_sweep_csv(std::istream& in, const std::string& source) {
    SweepTable table;
    std::string line;
    std::size_t lineno = 0;
    std::map<std::string, std::size_t> col;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split(line);
        if (!have_header) {
            for (std::size_t i = 0; i < cells.size(); ++i) col[cells[i]] = i;
            for (const char* required : {"delta_a_rad_s", "control_name", "control_value", "n_r_eff"})
                if (!col.count(required))
                    throw SchemaError(source + ": missing column '" + std::string(required) + "'");
            if (!col.count("sigma"))
                table.warnings.push_back(source + ": no sigma column, using unweighted fits");
            have_header = true;
            continue;
        }
        const std::string where = source + ":" + std::to_string(lineno);
        auto cell = [&](const std::string& name) -> const std::string& {
            const auto i = col.at(name);
            if (i >= cells.size()) throw SchemaError(where + ": missing value for column '" + name + "'");
            return cells[i];
        };
        SweepRecord r;
        r.delta_a = parse_num(cell("delta_a_rad_s"), where);
        r.control_value = parse_num(cell("control_value"), where);
        r.n_r_eff = parse_num(cell("n_r_eff"), where);
        if (col.count("sigma") && !cell("sigma").empty()) {
            const double s = parse_num(cell("sigma"), where);
            if (!(s > 0.0)) throw SchemaError(where + ": column 'sigma' must be > 0");
            r.sigma = s;
        }
        const std::string& name = cell("control_name");
        if (name == "n_add") {
            table.inputs.vs_n_add.push_back(r);
        } else if (name == "n_vts") {
            table.inputs.vs_n_vts.push_back(r);
        } else {
            throw SchemaError(where + ": column 'control_name' must be n_add or n_vts, got '" + name + "'");
        }
    }
    if (!have_header) throw SchemaError(source + ": empty file");
    return table;
}

SweepTable read_sweep_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    return read_sweep_csv(in, path);
}

std::string sweep_csv(const CalibrationInputs& inputs) {
    CsvWriter w({"delta_a_rad_s", "control_name", "control_value", "n_r_eff", "sigma"});
    auto emit = [&](const std::vector<SweepRecord>& rs, const char* name) {
        for (const auto& r : rs)
            w.row({fmt(r.delta_a), name, fmt(r.control_value), fmt(r.n_r_eff), r.sigma ? fmt(*r.sigma) : ""});
    };
    emit(inputs.vs_n_add, "n_add");
    emit(inputs.vs_n_vts, "n_vts");
    return w.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content << std::flush;
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

}  // namespace qrad::cli
