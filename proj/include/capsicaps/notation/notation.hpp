#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "capsicaps/rules/types.hpp"

namespace capsicaps::notation {

using rules::CellCoord;
using rules::GameState;
using rules::Inventory;
using rules::Level;
using rules::Move;
using rules::TurnEvent;

/// Malformed text. line/column are 1-based; 0 means "not applicable".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line, int column);

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// Checksum inventory digit out of range.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MoveText {
    std::string raw;
    std::optional<int> index;  // from a leading "J<n>:"
    Move move;
};

MoveText parse_move_text(std::string_view line);
Move parse_move(std::string_view line);

/// Canonical spacing: "G2@P21(b=0)+90", "G@P11-90", "G@P43:b=3 ; G@P11+90".
std::string format_move(const Move& move);
std::string format_move_line(int index, const Move& move);  // "J18: ..."

CellCoord parse_cell(std::string_view text);  // "P43"

std::set<CellCoord> parse_obstacle_map(std::string_view bits, int width, int height);
std::string format_obstacle_map(const std::set<CellCoord>& obstacles, int width, int height);

Inventory parse_inventory(std::string_view code);
std::string format_inventory(const Inventory& inv);  // "02030302"

/// Events in checksum order: exits, jumps (largest climb first, then mouse id),
/// entries; exits and entries by mouse id.
std::vector<TurnEvent> checksum_order(std::span<const TurnEvent> events);

std::string format_checksum(int move_no, std::span<const TurnEvent> events, const Inventory& inventory);
std::string format_load_checksum(const GameState& state);

struct GameLog {
    std::vector<MoveText> moves;
};

/// Lines without a "J<n>:" prefix are header/footer text and skipped.
GameLog parse_game_log(std::string_view text);
std::string format_game_log(const GameLog& log, int level_id);

/// key=value lines: id, width, height, obstacle_map, inventory. '#' starts a comment.
Level parse_level(std::string_view text);
std::string format_level(const Level& level);

}  // namespace capsicaps::notation
