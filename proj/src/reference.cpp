#include "predrobust/reference.hpp"

namespace predrobust {

namespace {

// 5% rejection percentages. Cells: kappa 0, 5, 20 (outer) by column (inner).
// Table 1 columns are years of monthly data (5, 20, 50); Table 2 columns are
// sample sizes 60, 240, 600.
constexpr ReferenceRow kRows[] = {
    {ReferenceTable::Table1, "CNST", "OLS", {42.2, 42.0, 43.0, 19.5, 19.5, 19.7, 11.1, 11.2, 10.9}},
    {ReferenceTable::Table1, "CNST", "BQ", {8.6, 4.9, 4.3, 7.5, 4.5, 4.2, 8.6, 4.1, 3.2}},
    {ReferenceTable::Table1, "CNST", "RLRT", {8.5, 7.7, 8.1, 5.4, 5.9, 5.6, 4.8, 5.2, 5.3}},
    {ReferenceTable::Table1, "CNST", "Cauchy RT", {5.3, 4.9, 5.3, 5.2, 5.4, 4.7, 5.5, 5.1, 5.1}},
    {ReferenceTable::Table1, "CNST", "tau", {5.6, 5.0, 5.3, 5.4, 5.0, 5.1, 5.4, 5.0, 4.8}},
    {ReferenceTable::Table1, "SB", "OLS", {38.3, 38.8, 39.9, 29.6, 30.8, 31.2, 24.3, 26.4, 26.0}},
    {ReferenceTable::Table1, "SB", "BQ", {18.1, 12.9, 11.9, 17.0, 15.1, 14.1, 17.4, 14.8, 14.3}},
    {ReferenceTable::Table1, "SB", "RLRT", {23.8, 22.8, 23.6, 21.0, 21.9, 21.8, 22.4, 24.5, 23.6}},
    {ReferenceTable::Table1, "SB", "Cauchy RT", {5.6, 5.0, 5.1, 5.2, 5.3, 5.0, 5.4, 5.0, 4.9}},
    {ReferenceTable::Table1, "SB", "tau", {8.0, 6.7, 6.3, 7.8, 6.5, 6.0, 7.9, 6.4, 6.0}},
    {ReferenceTable::Table1, "RS", "OLS", {42.9, 43.6, 44.6, 22.0, 23.4, 24.5, 14.9, 18.9, 19.5}},
    {ReferenceTable::Table1, "RS", "BQ", {8.8, 6.3, 6.0, 9.8, 7.2, 6.8, 12.6, 8.9, 8.4}},
    {ReferenceTable::Table1, "RS", "RLRT", {9.3, 10.0, 10.7, 7.5, 9.4, 9.6, 9.6, 13.0, 14.2}},
    {ReferenceTable::Table1, "RS", "Cauchy RT", {5.0, 4.8, 5.2, 4.9, 4.9, 4.9, 5.4, 5.1, 4.8}},
    {ReferenceTable::Table1, "RS", "tau", {5.2, 5.4, 6.1, 5.2, 5.1, 5.8, 5.6, 5.8, 5.8}},
    {ReferenceTable::Table1, "GBM", "OLS", {52.2, 53.7, 53.1, 28.6, 30.2, 30.9, 23.2, 26.0, 27.0}},
    {ReferenceTable::Table1, "GBM", "BQ", {16.8, 12.5, 11.3, 13.9, 12.4, 13.2, 15.8, 11.7, 12.0}},
    {ReferenceTable::Table1, "GBM", "RLRT", {21.7, 22.3, 21.9, 16.3, 17.8, 19.0, 21.4, 23.3, 23.5}},
    {ReferenceTable::Table1, "GBM", "Cauchy RT", {4.4, 4.7, 4.4, 4.3, 4.5, 4.4, 4.6, 4.5, 4.5}},
    {ReferenceTable::Table1, "GBM", "tau", {5.4, 5.5, 6.1, 5.7, 5.7, 5.9, 5.7, 5.9, 6.5}},
    {ReferenceTable::Table2, "CNST", "OLS", {43.9, 43.8, 44.7, 19.4, 19.8, 20.1, 9.7, 11.2, 10.8}},
    {ReferenceTable::Table2, "CNST", "BQ", {8.4, 5.2, 4.8, 7.8, 4.9, 4.5, 9.2, 4.1, 3.4}},
    {ReferenceTable::Table2, "CNST", "RLRT", {8.3, 8.0, 8.1, 5.2, 5.4, 5.3, 4.1, 5.4, 5.3}},
    {ReferenceTable::Table2, "CNST", "tau", {5.5, 5.1, 5.0, 5.5, 4.8, 5.1, 5.1, 5.2, 5.2}},
    {ReferenceTable::Table2, "SB", "OLS", {38.0, 39.6, 40.0, 29.1, 31.1, 31.4, 22.1, 26.1, 26.8}},
    {ReferenceTable::Table2, "SB", "BQ", {17.2, 12.8, 12.3, 16.5, 15.1, 14.5, 17.7, 15.0, 15.2}},
    {ReferenceTable::Table2, "SB", "RLRT", {23.1, 23.5, 24.2, 19.9, 21.8, 21.4, 21.2, 24.6, 25.1}},
    {ReferenceTable::Table2, "SB", "tau", {8.0, 6.7, 6.3, 7.9, 6.2, 5.8, 7.5, 6.5, 6.2}},
    {ReferenceTable::Table2, "ARCH-0.5773", "OLS", {45.0, 44.1, 43.5, 23.5, 22.5, 21.2, 17.2, 17.0, 15.2}},
    {ReferenceTable::Table2, "ARCH-0.5773", "BQ", {9.7, 5.4, 4.8, 9.5, 5.8, 4.6, 13.1, 6.3, 4.6}},
    {ReferenceTable::Table2, "ARCH-0.5773", "RLRT", {9.6, 8.8, 8.7, 9.0, 7.9, 6.7, 13.1, 11.3, 9.1}},
    {ReferenceTable::Table2, "ARCH-0.5773", "tau", {6.1, 5.4, 6.0, 6.1, 5.2, 5.4, 6.0, 5.9, 6.1}},
    {ReferenceTable::Table2, "ARCH-0.7325", "OLS", {45.8, 44.0, 43.6, 24.4, 24.1, 22.6, 19.7, 19.8, 18.1}},
    {ReferenceTable::Table2, "ARCH-0.7325", "BQ", {10.2, 6.2, 5.2, 10.4, 7.1, 5.8, 14.7, 8.3, 6.8}},
    {ReferenceTable::Table2, "ARCH-0.7325", "RLRT", {10.7, 10.0, 9.2, 10.6, 10.0, 8.1, 15.9, 14.9, 12.9}},
    {ReferenceTable::Table2, "ARCH-0.7325", "tau", {5.9, 5.8, 6.5, 6.2, 5.6, 6.0, 6.4, 6.1, 6.1}},
    {ReferenceTable::Table2, "IGARCH-0.9-0.1", "OLS", {44.9, 45.8, 45.6, 20.1, 21.8, 24.3, 11.1, 14.9, 17.3}},
    {ReferenceTable::Table2, "IGARCH-0.9-0.1", "BQ", {8.9, 5.8, 6.0, 7.8, 6.0, 6.9, 9.3, 5.3, 6.4}},
    {ReferenceTable::Table2, "IGARCH-0.9-0.1", "RLRT", {9.1, 10.1, 11.5, 5.7, 8.3, 9.8, 6.2, 9.0, 11.5}},
    {ReferenceTable::Table2, "IGARCH-0.9-0.1", "tau", {6.2, 5.5, 5.5, 5.8, 5.6, 6.0, 5.9, 5.8, 5.7}},
    {ReferenceTable::Table2, "IGARCH-0.1-0.9", "OLS", {46.0, 46.5, 45.1, 26.9, 28.5, 28.0, 21.6, 26.1, 26.2}},
    {ReferenceTable::Table2, "IGARCH-0.1-0.9", "BQ", {11.7, 8.3, 8.1, 12.7, 10.4, 10.9, 16.4, 12.2, 13.4}},
    {ReferenceTable::Table2, "IGARCH-0.1-0.9", "RLRT", {13.3, 13.0, 12.7, 13.7, 14.7, 15.1, 20.2, 23.7, 23.2}},
    {ReferenceTable::Table2, "IGARCH-0.1-0.9", "tau", {6.3, 6.4, 7.4, 6.9, 6.7, 7.2, 6.6, 6.9, 6.9}},
};

constexpr std::string_view kMethods[] = {"OLS", "BQ", "RLRT", "Cauchy RT", "tau"};

int kappa_slot(double kappa) {
  if (kappa == 0.0) return 0;
  if (kappa == 5.0) return 1;
  if (kappa == 20.0) return 2;
  return -1;
}

int column_slot(ReferenceTable table, std::int64_t column) {
  const std::int64_t keys[2][3] = {{5, 20, 50}, {60, 240, 600}};
  const auto& row = keys[table == ReferenceTable::Table1 ? 0 : 1];
  for (int i = 0; i < 3; ++i) {
    if (row[i] == column) return i;
  }
  return -1;
}

}  // namespace

std::span<const ReferenceRow> reference_rows() { return kRows; }

std::span<const std::string_view> reference_methods() { return kMethods; }

std::optional<double> reference_value(ReferenceTable table, std::string_view model, std::string_view method,
                                      double kappa, std::int64_t column) {
  const int k = kappa_slot(kappa);
  const int c = column_slot(table, column);
  if (k < 0 || c < 0) return std::nullopt;
  for (const auto& row : kRows) {
    if (row.table == table && row.model == model && row.method == method) {
      return row.cells[static_cast<std::size_t>(3 * k + c)];
    }
  }
  return std::nullopt;
}

}  // namespace predrobust
