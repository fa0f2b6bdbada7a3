#pragma once

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "capsicaps/rules/types.hpp"

namespace capsicaps::strategist {

using rules::GameState;
using rules::Move;
using rules::TurnEvent;

enum class TieBreak { Lowest, Highest };

struct StrategyConfig {
    int facing_pair_weight = 2;      // adjacent bases facing each other now
    int one_turn_pair_weight = 1;    // facing after one global rotation
    int exit_setup_weight = 1;       // top-row mouse one rotation away from exiting
    TieBreak tie_break = TieBreak::Lowest;
    std::optional<int> degraded_max_events;  // testing hook: truncate declared events
    int alternatives_reported = 5;

    static StrategyConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

StrategyConfig load_strategy_config(const std::string& path);

/// Lexicographic in declaration order; the tie-break key is kept apart.
struct OutcomeScore {
    int exits = 0;
    int to_final_row = 0;
    int advances = 0;  // jumps to a higher row plus entries
    long maneuver_value = 0;

    auto operator<=>(const OutcomeScore&) const = default;
};

using MoveKey = std::tuple<int, int, int, int, int, int>;

/// Canonical ordering: placements by (cell, kind, b, spin -90 first), then
/// plain rotations, then pre-moves by (cell, b, rotation cell, spin).
MoveKey canonical_key(const Move& m);

struct ScoredMove {
    Move move;
    OutcomeScore score;
};

struct PriorityCheck {
    int priority = 0;
    std::string question;
    bool satisfied = false;
    std::optional<ScoredMove> best;  // best candidate meeting this priority
};

struct Justification {
    std::vector<PriorityCheck> checks;
    std::vector<ScoredMove> alternatives;  // runners-up, best first
    int candidates = 0;
    long path_potential_before = 0;
};

struct Proposal {
    Move move;
    std::vector<TurnEvent> declared_events;
    int priority_met = 6;
    OutcomeScore score;
    Justification justification;
};

std::vector<Move> enumerate_moves(const GameState& state);

long path_potential(const GameState& state, const StrategyConfig& cfg = {});

OutcomeScore score_move(const GameState& state, const Move& move, const StrategyConfig& cfg = {});

/// True when `a` should be preferred over `b`.
bool better(const ScoredMove& a, const ScoredMove& b, TieBreak tie);

/// Thrown when a state admits no legal move.
class TerminalPosition : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Proposal select_move(const GameState& state, const StrategyConfig& cfg = {});

/// Proposal for a fixed move (replays, supervisor-entered moves). The
/// justification lists only the move itself.
Proposal propose_move(const GameState& state, const Move& move, const StrategyConfig& cfg = {});

int priority_of(const OutcomeScore& s);

}  // namespace capsicaps::strategist
