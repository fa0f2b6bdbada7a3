#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace capsicaps::rules {

/// Names of the rules a move can violate; the string form is what audit
/// records carry.
enum class RuleId {
    PhaseViolation,
    AvpAdjacency,
    FirstGearRow,
    ObstacleCell,
    CellOccupied,
    OutOfBoard,
    InventoryUnderflow,
    EmptyCellRotation,
    InvalidRotationState,
    Disconnected,
    JumpConflict,
};

std::string_view rule_name(RuleId id);

/// Coordinates or level data outside the board's domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A move that the rules forbid in the given state.
class IllegalMove : public std::runtime_error {
public:
    IllegalMove(RuleId rule, const std::string& detail);

    RuleId rule() const noexcept { return rule_; }

private:
    RuleId rule_;
};

}  // namespace capsicaps::rules
