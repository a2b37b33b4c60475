#pragma once

#include "predrobust/montecarlo.hpp"

#include <array>
#include <optional>
#include <span>
#include <string_view>

namespace predrobust {

/// Reference 5% rejection percentages for one (model, method) row. Cells are
/// ordered κ̄ ∈ {0, 5, 20} outer, column (T or years) inner.
struct ReferenceRow {
  ReferenceTable table;
  std::string_view model;
  std::string_view method;
  std::array<double, 9> cells;
};

std::span<const ReferenceRow> reference_rows();

/// Method labels appearing in the reference tables, in column order.
std::span<const std::string_view> reference_methods();

std::optional<double> reference_value(ReferenceTable table, std::string_view model, std::string_view method,
                                      double kappa, std::int64_t column);

}  // namespace predrobust
