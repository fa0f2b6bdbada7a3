#pragma once

#include <string>
#include <vector>

#include "capsicaps/rules/types.hpp"

// Second evaluator for turn resolution. It shares only the value types with
// the rules kernel: its own grid, degree arithmetic and event scan.
namespace capsicaps::avm {

struct Result {
    rules::GameState final_state;
    std::vector<rules::TurnEvent> events;  // entries before the rotation, then the wave
};

/// Evaluates one move from `state`. Throws std::runtime_error naming the
/// broken rule when the move is illegal.
Result evaluate(const rules::GameState& state, const rules::Move& move);

/// Differences between a claimed turn result and the auditor's own. Each line
/// names the cell or mouse involved; empty means concordance.
std::vector<std::string> audit(const rules::GameState& before, const rules::Move& move,
                               const rules::TurnReport& claimed);

/// Same comparison against an evaluation already in hand.
std::vector<std::string> compare(const Result& mine, const rules::TurnReport& claimed);

std::vector<std::string> diff_states(const rules::GameState& claimed, const rules::GameState& expected);

/// Report consistency: occupied slots and in-play mice must pair up one to one.
std::vector<std::string> cross_consistency(const rules::GameState& state);

}  // namespace capsicaps::avm
