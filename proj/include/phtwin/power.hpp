#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace phtwin {

struct PowerEntry
{
    std::string component;
    std::string part;
    double power_mw = 0.0;
    bool intraoral = false;
    bool optional = false;   ///< can be switched off (e.g. the status LED)
};

struct PowerBudget
{
    std::vector<PowerEntry> entries;
};

struct PowerTotals
{
    double total_mw = 0.0;
    double total_without_optional_mw = 0.0;
    double intraoral_mw = 0.0;
};

/// Sums in integer microwatts, then rounds each total half-up to 0.01 mW.
/// Throws ValidationError for negative entries.
PowerTotals power_totals(const PowerBudget& budget);

/// Measured consumption of the active components at 3.3 V.
PowerBudget reference_budget();

/// Parses a budget file made of [[component]] tables:
///
///   [[component]]
///   name = "ADC"
///   part = "MAX11613"
///   power_mw = 1.09
///   intraoral = true
///   optional = false
///
/// `power_uw` may be given instead of `power_mw`. Throws ValidationError.
PowerBudget parse_power_budget(std::string_view text);

} // namespace phtwin
