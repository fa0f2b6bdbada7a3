#include "capsicaps/rules/errors.hpp"

namespace capsicaps::rules {

std::string_view rule_name(RuleId id) {
    switch (id) {
        case RuleId::PhaseViolation: return "phase-violation";
        case RuleId::AvpAdjacency: return "AVP-adjacency";
        case RuleId::FirstGearRow: return "AVP-first-row";
        case RuleId::ObstacleCell: return "obstacle-cell";
        case RuleId::CellOccupied: return "cell-occupied";
        case RuleId::OutOfBoard: return "out-of-board";
        case RuleId::InventoryUnderflow: return "inventory-underflow";
        case RuleId::EmptyCellRotation: return "empty-cell-rotation";
        case RuleId::InvalidRotationState: return "invalid-rotation-state";
        case RuleId::Disconnected: return "FMTC-disconnected";
        case RuleId::JumpConflict: return "jump-conflict";
    }
    return "unknown";
}

IllegalMove::IllegalMove(RuleId rule, const std::string& detail)
    : std::runtime_error(std::string(rule_name(rule)) + ": " + detail), rule_(rule) {}

}  // namespace capsicaps::rules
