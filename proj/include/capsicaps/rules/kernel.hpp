#pragma once

#include <span>
#include <variant>
#include <vector>

#include "capsicaps/rules/errors.hpp"
#include "capsicaps/rules/types.hpp"

namespace capsicaps::rules {

/// L/R type of a square. Throws DomainError outside the board.
SquareType square_type(CellCoord cell, const Level& level);

/// Cell (or off-board marker) a vector points at from `cell`.
Destination vector_to_destination(CellCoord cell, Heading vector, const Level& level);

/// Cells where a gear may legally be placed now: row 1 on an empty board,
/// otherwise empty playable cells orthogonally adjacent to a gear.
std::set<CellCoord> legal_placements(const GameState& state);

struct Connected {};
struct Disconnected {
    int components = 0;
};
using ConnectivityResult = std::variant<Connected, Disconnected>;

ConnectivityResult connectivity_check(const GameState& state);

/// New b for every gear after a ±90 activation at `activated`.
std::map<CellCoord, int> rotation_cascade(const GameState& state, CellCoord activated, Spin spin);

struct JumpAnalysis {
    std::vector<TurnEvent> events;   // exits, jumps, then entries, each by mouse id
    std::vector<MouseAudit> audits;  // one per mouse in play, by mouse id
};

/// One simultaneous wave of exits, jumps and entries computed from a frozen
/// snapshot. Does not modify the state.
JumpAnalysis jump_analysis(const GameState& state);

/// Same analysis visiting mice in the given order; the result must not depend
/// on it.
JumpAnalysis jump_analysis(const GameState& state, std::span<const int> mouse_order);

/// Applies the events of one wave atomically. Throws IllegalMove(JumpConflict)
/// if two mice claim the same base.
void apply_events(GameState& state, std::span<const TurnEvent> events);

/// Validates a move against the phase, placement and activation rules.
void check_move_legal(const GameState& state, const Move& move);

/// Resolves one full turn. The input state is never mutated.
TurnReport apply_move(const GameState& state, const Move& move);

bool victory_check(const GameState& state);

/// Throws std::logic_error naming the first violated state invariant.
void check_invariants(const GameState& state);

}  // namespace capsicaps::rules
