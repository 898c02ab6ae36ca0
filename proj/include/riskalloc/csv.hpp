#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "riskalloc/mortality_curve.hpp"
#include "riskalloc/rate_curve.hpp"

namespace riskalloc::csv {

/// 12 significant digits, shortest form.
std::string format_double(double value);

/// Mortality table "t,q" with header, t = 1..T ascending.
MortalityCurve load_mortality(const std::filesystem::path& path);
MortalityCurve read_mortality(std::istream& in, const std::string& source);

/// Rate table "t,rate" with header, t = 1..T ascending.
RateCurve load_rates(const std::filesystem::path& path);
RateCurve read_rates(std::istream& in, const std::string& source);

/// Premium target "T,premium" with header, T = 1..N ascending.
std::vector<double> load_target(const std::filesystem::path& path);
std::vector<double> read_target(std::istream& in, const std::string& source);

}  // namespace riskalloc::csv
