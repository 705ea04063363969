#include "phtwin/power.hpp"

#include "phtwin/errors.hpp"

#include <fmt/core.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>

namespace phtwin {

namespace {

std::int64_t to_uw(double mw)
{
    return std::llround(mw * 1000.0);
}

double round_to_10uw(std::int64_t uw)
{
    return static_cast<double>((uw + 5) / 10) / 100.0;
}

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string_view strip_comment(std::string_view line)
{
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"')
            in_string = !in_string;
        else if (line[i] == '#' && !in_string)
            return line.substr(0, i);
    }
    return line;
}

double parse_number(std::string_view v, std::size_t line_no)
{
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ValidationError(fmt::format("line {}: expected a number, got '{}'", line_no, v));
    return out;
}

bool parse_bool(std::string_view v, std::size_t line_no)
{
    if (v == "true")
        return true;
    if (v == "false")
        return false;
    throw ValidationError(fmt::format("line {}: expected true or false, got '{}'", line_no, v));
}

std::string parse_string(std::string_view v, std::size_t line_no)
{
    if (v.size() < 2 || v.front() != '"' || v.back() != '"')
        throw ValidationError(fmt::format("line {}: expected a quoted string, got '{}'", line_no, v));
    return std::string(v.substr(1, v.size() - 2));
}

} // namespace

PowerTotals power_totals(const PowerBudget& budget)
{
    std::int64_t total = 0;
    std::int64_t required = 0;
    std::int64_t intraoral = 0;
    for (const auto& e : budget.entries) {
        if (!(e.power_mw >= 0.0))
            throw ValidationError(fmt::format("component '{}' has negative power", e.component));
        const auto uw = to_uw(e.power_mw);
        total += uw;
        if (!e.optional)
            required += uw;
        if (e.intraoral)
            intraoral += uw;
    }
    return PowerTotals{round_to_10uw(total), round_to_10uw(required), round_to_10uw(intraoral)};
}

PowerBudget reference_budget()
{
    return PowerBudget{{
        {"ADC", "MAX11613", 1.09, true, false},
        {"Temp. Sensor", "LMT70", 0.049, true, false},
        {"Front-end", "TF412", 0.396, true, false},
        {"Microcontroller", "ISP1907HT", 7.35, false, false},
        {"Status LED (blue)", "SML-LX0404SIUPGUSB", 6.93, false, true},
    }};
}

PowerBudget parse_power_budget(std::string_view text)
{
    PowerBudget budget;
    std::optional<PowerEntry> current;
    bool have_power = false;
    std::size_t line_no = 0;

    auto finish = [&] {
        if (!current)
            return;
        if (current->component.empty())
            throw ValidationError(fmt::format("component ending at line {} has no name", line_no));
        if (!have_power)
            throw ValidationError(fmt::format("component '{}' has no power_mw", current->component));
        if (!(current->power_mw >= 0.0))
            throw ValidationError(fmt::format("component '{}' has negative power", current->component));
        budget.entries.push_back(*current);
        current.reset();
        have_power = false;
    };

    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        ++line_no;
        const auto line = trim(strip_comment(text.substr(pos, end - pos)));
        pos = end + 1;
        if (line.empty())
            continue;
        if (line == "[[component]]") {
            finish();
            current = PowerEntry{};
            continue;
        }
        if (line.front() == '[')
            throw ValidationError(fmt::format("line {}: unsupported table '{}'", line_no, line));
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError(fmt::format("line {}: expected key = value", line_no));
        if (!current)
            throw ValidationError(fmt::format("line {}: key outside a [[component]] table", line_no));
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key == "name")
            current->component = parse_string(value, line_no);
        else if (key == "part")
            current->part = parse_string(value, line_no);
        else if (key == "power_mw") {
            current->power_mw = parse_number(value, line_no);
            have_power = true;
        } else if (key == "power_uw") {
            current->power_mw = parse_number(value, line_no) / 1000.0;
            have_power = true;
        } else if (key == "intraoral")
            current->intraoral = parse_bool(value, line_no);
        else if (key == "optional")
            current->optional = parse_bool(value, line_no);
        else
            throw ValidationError(fmt::format("line {}: unknown key '{}'", line_no, key));
    }
    finish();
    return budget;
}

} // namespace phtwin
