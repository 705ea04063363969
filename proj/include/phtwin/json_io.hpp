#pragma once

// JSON mappings for configuration structs. Missing keys keep their defaults;
// unknown keys are ignored.

#include "phtwin/device_sim.hpp"
#include "phtwin/firmware.hpp"
#include "phtwin/link.hpp"

#include <json.hpp>

namespace phtwin {

void to_json(nlohmann::json& j, const ElectrodeParams& p);
void from_json(const nlohmann::json& j, ElectrodeParams& p);
void to_json(nlohmann::json& j, const AfeParams& p);
void from_json(const nlohmann::json& j, AfeParams& p);
void to_json(nlohmann::json& j, const TempSensorParams& p);
void from_json(const nlohmann::json& j, TempSensorParams& p);
void to_json(nlohmann::json& j, const FirmwareConfig& p);
void from_json(const nlohmann::json& j, FirmwareConfig& p);
void to_json(nlohmann::json& j, const LinkParams& p);
void from_json(const nlohmann::json& j, LinkParams& p);
void to_json(nlohmann::json& j, const BathSchedule& p);
void from_json(const nlohmann::json& j, BathSchedule& p);

} // namespace phtwin
