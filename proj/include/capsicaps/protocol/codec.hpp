#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

#include "capsicaps/rules/types.hpp"
#include "capsicaps/strategist/strategist.hpp"

// JSON shapes shared by the session log and the HTTP API.
namespace capsicaps::codec {

using nlohmann::json;

json event_to_json(const rules::TurnEvent& e);
rules::TurnEvent event_from_json(const json& j);
json events_to_json(const std::vector<rules::TurnEvent>& events);
std::vector<rules::TurnEvent> events_from_json(const json& j);

json audit_to_json(const rules::MouseAudit& a);

/// Board payload for rendering: gears with per-base vectors, mice, inventory,
/// plus the canonical text under "text".
json state_to_json(const rules::GameState& s);

json report_to_json(const rules::TurnReport& r);

json score_to_json(const strategist::OutcomeScore& s);
json proposal_to_json(const strategist::Proposal& p);

/// Restores the move and declared events; the justification is not read back.
strategist::Proposal proposal_from_json(const json& j);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace capsicaps::codec
