#pragma once

#include "ccspin/blowup.hpp"
#include "ccspin/catalog.hpp"
#include "ccspin/cc.hpp"
#include "ccspin/frame.hpp"
#include "ccspin/normal_forms.hpp"
#include "ccspin/planar.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace ccs {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

// Shortest text with 17 significant digits, '.' separator, locale independent.
std::string num17(double v);

json vec_json(const Vec& v);
Vec vec_from_json(const json& j);

// {"masses": [...], "points": [[x, y], ...]}
json config_json(const Config& c);
Config config_from_json(const json& j);

json cc_json(const CentralConfiguration& cc);
json report_json(const SpectralReport& r);
json chart_json(const FrameChart& ch);
json verdict_json(const SpinVerdict& v);

// Output wrapper: {"artifact": {"name", "version"}, "run": <run config>, "result": ...}
json envelope(const json& run, const json& result);

class CsvWriter {
public:
    CsvWriter(std::ostream& os, const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);
    // header comment line with the run configuration
    static void comment(std::ostream& os, const json& run);

private:
    std::ostream& os_;
    size_t ncol_;
};

void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const json& run);

}  // namespace ccs
