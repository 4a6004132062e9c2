#pragma once

// CSV: header `t,mean_sin2,p20,p80,bound_sin2`, one row per checkpoint, values
// with 17 significant digits, '\n' line endings.
// JSON: {"config": <digest>, "rows": [{"t":..,"mean_sin2":..,...}, ...]}.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "coja/harness.hpp"

namespace coja {

enum class SeriesFormat { Csv, Json };

inline constexpr std::string_view kCsvHeader = "t,mean_sin2,p20,p80,bound_sin2";

/// Picks JSON for a ".json" extension and CSV otherwise.
SeriesFormat format_for_path(const std::filesystem::path& path);

std::string to_csv(const AggregateSeries& series);
std::string to_json(const AggregateSeries& series);
AggregateSeries parse_csv(std::string_view text);
AggregateSeries parse_json(std::string_view text);

/// Throws InvalidArgument on an empty series and IoError (with the path) on write failure.
void export_series(const AggregateSeries& series, SeriesFormat format, const std::filesystem::path& path);
AggregateSeries import_series(const std::filesystem::path& path, std::optional<SeriesFormat> format = {});

}  // namespace coja
