#pragma once

#include "predrobust/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace predrobust {

/// Columns read from a chronological CSV with a header row. `y` and `x` are
/// required; `true_vol` is picked up when present; anything else is ignored.
struct SeriesTable {
  std::vector<double> y;
  std::vector<double> x;
  std::optional<std::vector<double>> true_vol;
};

SeriesTable read_series_csv(std::istream& in);
SeriesTable read_series_csv(const std::filesystem::path& path);

/// Fixed-precision, locale-independent number formatting.
std::string format_fixed(double value, int digits);

}  // namespace predrobust
