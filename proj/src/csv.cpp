#include "modal/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace modal {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open for reading: " + path);
    return in;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& s, const std::string& path) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw std::invalid_argument("malformed number '" + s + "' in " + path);
    }
    return v;
}

int parse_int(const std::string& s, const std::string& path) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') {
        throw std::invalid_argument("malformed integer '" + s + "' in " + path);
    }
    return static_cast<int>(v);
}

std::string coordinate_header(std::size_t dim) {
    std::string h;
    for (std::size_t j = 0; j < dim; ++j) {
        h += "x" + std::to_string(j + 1) + ",";
    }
    return h;
}

}  // namespace

void write_dataset_csv(const std::string& path, const LabeledDataset& data) {
    std::ofstream out = open_out(path);
    out << coordinate_header(data.dim) << "label\n";
    for (std::size_t i = 0; i < data.n; ++i) {
        const auto row = data.row(i);
        for (std::size_t j = 0; j < data.dim; ++j) {
            out << format_double(row[j]) << ",";
        }
        out << data.labels[i] << "\n";
    }
}

LabeledDataset read_dataset_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty CSV: " + path);
    const std::vector<std::string> header = split_line(line);
    if (header.size() < 2 || header.back() != "label") {
        throw std::invalid_argument("bad dataset header in " + path);
    }
    LabeledDataset data;
    data.dim = header.size() - 1;
    int max_label = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != header.size()) {
            throw std::invalid_argument("bad column count in " + path);
        }
        for (std::size_t j = 0; j < data.dim; ++j) {
            data.points.push_back(parse_double(fields[j], path));
        }
        const int label = parse_int(fields.back(), path);
        if (label < 0) throw std::invalid_argument("negative label in " + path);
        data.labels.push_back(label);
        max_label = std::max(max_label, label);
        data.n += 1;
    }
    if (data.n == 0) throw std::invalid_argument("dataset has no rows: " + path);
    data.k = static_cast<std::size_t>(max_label) + 1;
    return data;
}

void write_samples_csv(const std::string& path, const SampleTable& table) {
    require(table.points.size() == table.requested.size() &&
                table.points.size() == table.assigned.size(),
            "write_samples_csv: column sizes disagree");
    std::ofstream out = open_out(path);
    out << coordinate_header(table.dim) << "requested_label,assigned_label\n";
    for (std::size_t i = 0; i < table.points.size(); ++i) {
        require(table.points[i].size() == table.dim,
                "write_samples_csv: point dim mismatch");
        for (std::size_t j = 0; j < table.dim; ++j) {
            out << format_double(table.points[i][j]) << ",";
        }
        out << table.requested[i] << "," << table.assigned[i] << "\n";
    }
}

SampleTable read_samples_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty CSV: " + path);
    const std::vector<std::string> header = split_line(line);
    if (header.size() < 3 || header[header.size() - 2] != "requested_label" ||
        header.back() != "assigned_label") {
        throw std::invalid_argument("bad samples header in " + path);
    }
    SampleTable table;
    table.dim = header.size() - 2;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != header.size()) {
            throw std::invalid_argument("bad column count in " + path);
        }
        Vec x(table.dim);
        for (std::size_t j = 0; j < table.dim; ++j) x[j] = parse_double(fields[j], path);
        table.points.push_back(std::move(x));
        table.requested.push_back(parse_int(fields[table.dim], path));
        table.assigned.push_back(parse_int(fields[table.dim + 1], path));
    }
    if (table.points.empty()) throw std::invalid_argument("samples CSV has no rows: " + path);
    return table;
}

void write_loss_curve_csv(const std::string& path,
                          const std::vector<std::pair<long, double>>& curve) {
    std::ofstream out = open_out(path);
    out << "step,loss\n";
    for (const auto& [step, loss] : curve) {
        out << step << "," << format_double(loss) << "\n";
    }
}

}  // namespace modal
