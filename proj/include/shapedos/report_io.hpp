#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shapedos/dos.hpp"
#include "shapedos/ids.hpp"

namespace shapedos {

/// "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

/// Column-major JSON bodies. They contain only computed values, never
/// timestamps or cache statistics, so equal inputs give equal bytes.
nlohmann::json report_body(const DOSReport& report);
nlohmann::json report_body(const CounterexampleReport& report);
nlohmann::json curve_body(const IDSCurve& curve);

std::string report_csv(const DOSReport& report);
std::string curve_csv(const IDSCurve& curve);

/// Formats with 17 significant digits ("nan" for NaN).
std::string format_number(double x);

/// Writes {"metadata": ..., "body": ...} to dir/report.json.
void write_report_json(const std::filesystem::path& dir, const nlohmann::json& metadata,
                       const nlohmann::json& body);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace shapedos
