#include "activecq/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "activecq/errors.hpp"

namespace activecq {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string());
        out << content;
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError("non-numeric cell (row " + std::to_string(row) + ", col " + col + ")");
    }
}

}  // namespace

void write_dataset_csv(const Dataset& data, const std::string& path) {
    data.validate();
    std::ostringstream out;
    std::vector<std::string> header;
    if (data.has_treatment()) header.push_back("a");
    for (Eigen::Index j = 0; j < data.z.cols(); ++j)
        header.push_back("z_" + std::to_string(j + 1));
    for (Eigen::Index j = 0; j < data.s.cols(); ++j)
        header.push_back("s_" + std::to_string(j + 1));
    if (data.has_outcomes()) header.push_back("y");
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << "\n";
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        bool first = true;
        auto emit = [&](double v) {
            out << (first ? "" : ",") << format_double(v);
            first = false;
        };
        if (data.has_treatment()) emit(data.a[i]);
        for (Eigen::Index j = 0; j < data.z.cols(); ++j) emit(data.z(i, j));
        for (Eigen::Index j = 0; j < data.s.cols(); ++j) emit(data.s(i, j));
        if (data.has_outcomes()) emit(data.y[i]);
        out << "\n";
    }
    write_file_atomic(path, out.str());

    json meta{{"generator", data.meta.generator},
              {"seed", data.meta.seed},
              {"treatment_mode", to_string(data.meta.treatment_mode)},
              {"noise_sd", data.meta.noise_sd},
              {"rng_version", data.meta.rng_version}};
    if (!data.meta.outcome_variant.empty()) meta["outcome_variant"] = data.meta.outcome_variant;
    write_file_atomic(path + ".meta.json", meta.dump(2) + "\n");
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw EmptyFileError("empty file: " + path);
    const std::vector<std::string> header = split_csv_line(line);
    if (header.empty()) throw EmptyFileError("no header: " + path);

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("row " + std::to_string(lineno) + ": expected " +
                             std::to_string(header.size()) + " cells, got " +
                             std::to_string(cells.size()));
        std::vector<double> vals;
        vals.reserve(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j)
            vals.push_back(parse_cell(cells[j], lineno, header[j]));
        rows.push_back(std::move(vals));
    }

    Dataset d;
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::Index dz = 0, ds = 0;
    bool has_a = false, has_y = false;
    for (const auto& h : header) {
        if (h == "a") has_a = true;
        else if (h == "y") has_y = true;
        else if (h.rfind("z_", 0) == 0) ++dz;
        else if (h.rfind("s_", 0) == 0) ++ds;
        else throw ParseError("unknown column: " + h);
    }
    if (has_a) d.a.resize(n);
    if (dz > 0) d.z.resize(n, dz);
    if (ds > 0) d.s.resize(n, ds);
    if (has_y) d.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::size_t at = 0;
        Eigen::Index zj = 0, sj = 0;
        for (const auto& h : header) {
            const double v = rows[static_cast<std::size_t>(i)][at++];
            if (h == "a") d.a[i] = v;
            else if (h == "y") d.y[i] = v;
            else if (h.rfind("z_", 0) == 0) d.z(i, zj++) = v;
            else d.s(i, sj++) = v;
        }
    }

    const std::string meta_path = path + ".meta.json";
    if (fs::exists(meta_path)) {
        std::ifstream meta_in(meta_path);
        json meta = json::parse(meta_in);
        d.meta.generator = meta.value("generator", "");
        d.meta.seed = meta.value("seed", std::uint64_t{0});
        d.meta.treatment_mode =
            treatment_mode_from_string(meta.value("treatment_mode", "continuous"));
        d.meta.noise_sd = meta.value("noise_sd", 0.0);
        d.meta.rng_version = meta.value("rng_version", "");
        d.meta.outcome_variant = meta.value("outcome_variant", "");
    }
    return d;
}

CovariateTable load_covariates_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw EmptyFileError("empty file: " + path);
    const std::vector<std::string> header = split_csv_line(line);
    if (header.empty()) throw EmptyFileError("no header: " + path);

    CovariateTable table;
    for (const auto& h : header) {
        if (h.rfind("c_", 0) == 0) table.is_continuous.push_back(true);
        else if (h.rfind("b_", 0) == 0) table.is_continuous.push_back(false);
        else throw ParseError("column " + h + ": expected a c_ or b_ prefix");
        table.names.push_back(h);
    }

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("row " + std::to_string(lineno) + ": expected " +
                             std::to_string(header.size()) + " cells");
        std::vector<double> vals;
        for (std::size_t j = 0; j < cells.size(); ++j)
            vals.push_back(parse_cell(cells[j], lineno, header[j]));
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw EmptyFileError("no data rows: " + path);

    table.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < header.size(); ++j)
            table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return table;
}

}  // namespace activecq
