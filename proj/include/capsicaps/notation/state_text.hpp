#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capsicaps/rules/types.hpp"

namespace capsicaps::notation {

// Canonical text dump of a game state, laid out as three tables:
//
//   Level id=9 width=4 height=3 obstacle_map=111111011011 inventory=02030302
//   Move 9
//   Game State Table
//   P11 G3P11R 3 B2000
//   Mouse State Table
//   M1 InPlay P21 G4P21L 180
//   M2 Waiting P20 - -
//   Virtual Board
//   Row 3 (y=3): [G1P13R0B0222] [ Obstacle ] [  P33(R)  ] [G1P43L1B0222]
//   Inventory G1:0 G2:0 G3:1 G4:0
//
// The Virtual Board block is derived from the tables and ignored when read.

/// The tables as written, before they are bound to a level.
struct StateTables {
    std::optional<rules::Level> level;
    std::optional<int> move_number;
    std::map<rules::CellCoord, rules::PlacedGear> gears;
    std::vector<rules::Mouse> mice;
    std::optional<rules::Inventory> inventory;
    std::optional<std::string> checksum;  // fixture files only
};

std::string serialize_state(const rules::GameState& state);
std::string render_virtual_board(const rules::GameState& state);

StateTables parse_state_tables(std::string_view text);

/// Inverse of serialize_state. Throws ParseError on missing sections or
/// tables that disagree with each other.
rules::GameState deserialize_state(std::string_view text);

/// Golden fixture: expected tables and checksum at one move.
struct Fixture {
    int move_number = 0;
    StateTables tables;
};

Fixture parse_fixture(std::string_view text);

/// Field-exact comparison. Returns one line per mismatch, empty on match.
std::vector<std::string> compare_fixture(const Fixture& fixture, const rules::GameState& state,
                                         std::string_view checksum);

}  // namespace capsicaps::notation
