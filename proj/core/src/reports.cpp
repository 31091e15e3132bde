#include "specwave/reports.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace specwave {

std::string scenario_hash(const Scenario& scn) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](unsigned char c) {
        h ^= c;
        h *= 1099511628211ull;
    };
    for (unsigned char c : scn.raw_text) mix(c);
    for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(scn.seed >> (8 * i)));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

namespace {
Json num_or_null(double x) {
    if (std::isnan(x)) return nullptr;
    return x;
}
}  // namespace

Json ConstantsChain::toJson() const {
    Json j;
    j["lambda1"] = num_or_null(lambda1);
    j["R"] = num_or_null(R);
    j["ctilde"] = num_or_null(ctilde);
    j["rho"] = num_or_null(rho);
    j["theta_rho"] = num_or_null(theta_rho);
    j["eta"] = num_or_null(eta);
    j["delta"] = num_or_null(delta);
    j["M"] = num_or_null(M);
    j["rate"] = num_or_null(rate);
    j["K"] = num_or_null(K);
    j["C_nu"] = num_or_null(C_nu);
    return j;
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : path_(path), columns_(columns.size()) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += columns[i];
    }
    buffer_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != columns_)
        throw std::invalid_argument("CSV row width mismatch in " + path_);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += fmt_double(values[i]);
    }
    buffer_ += '\n';
}

void CsvWriter::rawRow(const std::string& line) {
    buffer_ += line;
    buffer_ += '\n';
}

CsvWriter::~CsvWriter() {
    std::ofstream out(path_, std::ios::binary);
    out << buffer_;
}

void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
}

}  // namespace specwave
