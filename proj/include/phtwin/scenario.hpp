#pragma once

// Scenario files drive `simulate`: the bath schedule, every model parameter
// and how the simulated operator annotates the run. Schema in
// docs/scenario-format.md.

#include "phtwin/link.hpp"
#include "phtwin/node.hpp"
#include "phtwin/session.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace phtwin {

struct Scenario
{
    std::string name = "scenario";
    /// Overrides electrode.rng_seed and link.seed when set.
    std::optional<std::uint64_t> seed;
    std::int64_t start_utc_ms = 0;
    double duration_s = 60.0;

    NodeConfig node;
    LinkParams link;
    /// Label per bath segment ("" for none); parallel to node.bath.segments.
    std::vector<std::string> segment_labels;

    bool auto_annotations = true;
    double settle_margin_s = 60.0;      ///< skipped at the start of each labelled window
    double transition_window_s = 30.0;
    std::vector<Annotation> extra_annotations;   ///< device time
};

/// Throws ValidationError.
void validate(const Scenario& s);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);

/// Annotations the simulated operator places, in device time, given the
/// world time at which the device latched t = 0.
std::vector<Annotation> scenario_annotations(const Scenario& s, double device_start_s);

/// 5 h bench run: pH 7 -> 10 -> 4 -> 7 with drift and the aged 31 mV/pH slope.
Scenario reference_run_scenario(std::uint64_t seed = 2026);

/// 90 min at pH 7 with reference windows at both ends and a baseline window.
Scenario stability_scenario(std::uint64_t seed = 1);

} // namespace phtwin
