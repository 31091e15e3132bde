#pragma once

#include <limits>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "specwave/config.hpp"

namespace specwave {

using Json = nlohmann::ordered_json;

/// FNV-1a over the scenario text and seed; embedded in every report.
std::string scenario_hash(const Scenario& scn);

/// Certified constants chain carried through the reports; NaN = not reached.
struct ConstantsChain {
    double lambda1 = nan(""), R = nan(""), ctilde = nan(""), rho = nan("");
    double theta_rho = nan(""), eta = nan(""), delta = nan(""), M = nan("");
    double rate = nan(""), K = nan(""), C_nu = nan("");
    static double nan(const char*) { return std::numeric_limits<double>::quiet_NaN(); }
    Json toJson() const;
};

/// %.17g formatting: reproducible round-trip text for doubles.
std::string fmt_double(double x);

/// CSV writer with fixed column order and %.17g cells.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);
    void rawRow(const std::string& line);
    ~CsvWriter();

private:
    std::string path_;
    std::string buffer_;
    std::size_t columns_;
};

void write_json(const std::string& path, const Json& j);

}  // namespace specwave
