#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace capsicaps::rules {

// Quarter-turn direction. 0° is up, 90° left, 180° down, 270° right
// (counterclockwise convention).
enum class Heading : std::uint8_t { Up = 0, Left = 1, Down = 2, Right = 3 };

constexpr int degrees(Heading h) { return 90 * static_cast<int>(h); }
constexpr Heading heading_from_quarters(int q) { return static_cast<Heading>(((q % 4) + 4) % 4); }
constexpr Heading opposite(Heading h) { return heading_from_quarters(static_cast<int>(h) + 2); }
std::optional<Heading> heading_from_degrees(int deg);

struct CellCoord {
    int x = 1;  // column, 1-based
    int y = 1;  // row, 1-based from the bottom

    auto operator<=>(const CellCoord&) const = default;
};

std::string to_string(CellCoord c);  // "P43"

enum class SquareType : std::uint8_t { L, R };

constexpr SquareType square_type_of(CellCoord c) {
    return (c.x + c.y) % 2 == 0 ? SquareType::R : SquareType::L;
}

constexpr char to_char(SquareType t) { return t == SquareType::R ? 'R' : 'L'; }

enum class GearKind : std::uint8_t { G1 = 0, G2 = 1, G3 = 2, G4 = 3 };

inline constexpr std::array<GearKind, 4> kAllGearKinds{GearKind::G1, GearKind::G2, GearKind::G3, GearKind::G4};

constexpr int kind_index(GearKind k) { return static_cast<int>(k); }
constexpr int kind_number(GearKind k) { return static_cast<int>(k) + 1; }

/// Whether the gear kind carries a base whose origin (at b=0) is `origin`.
bool has_origin_base(GearKind kind, Heading origin);
std::vector<Heading> origin_bases(GearKind kind);

enum class Slot : std::uint8_t { Empty = 0, Occupied = 1, Nonexistent = 2 };

/// Per-base occupancy, indexed by origin heading (0°, 90°, 180°, 270°).
struct Occupancy {
    std::array<Slot, 4> slots{};

    static Occupancy pristine(GearKind kind);

    Slot at(Heading origin) const { return slots[static_cast<std::size_t>(origin)]; }
    void set(Heading origin, Slot s) { slots[static_cast<std::size_t>(origin)] = s; }

    bool operator==(const Occupancy&) const = default;
};

/// "B0222" style code.
std::string occupancy_code(const Occupancy& occ);

struct PlacedGear {
    GearKind kind = GearKind::G1;
    int b = 0;  // rotation state, quarter turns counterclockwise
    Occupancy occupancy;

    bool operator==(const PlacedGear&) const = default;
};

/// Final heading of a base with the given origin on a gear at rotation b.
constexpr Heading base_vector(Heading origin, int b) {
    return heading_from_quarters(static_cast<int>(origin) + b);
}

/// "G3P11R" prefix used in the state tables.
std::string gear_prefix(GearKind kind, CellCoord cell);

using Inventory = std::array<int, 4>;  // remaining G1..G4

struct Level {
    int id = 0;
    int width = 1;
    int height = 1;
    std::set<CellCoord> obstacles;
    Inventory inventory{};

    int mouse_count() const { return width; }
    bool inside(CellCoord c) const { return c.x >= 1 && c.x <= width && c.y >= 1 && c.y <= height; }
    bool is_obstacle(CellCoord c) const { return obstacles.contains(c); }

    /// Throws DomainError when dimensions or obstacles are out of range.
    void validate() const;

    bool operator==(const Level&) const = default;
};

enum class MouseStatus : std::uint8_t { Waiting, InPlay, Victory };

struct Mouse {
    int id = 1;  // Mx starts below column x
    MouseStatus status = MouseStatus::Waiting;
    CellCoord cell{};      // Px0 while waiting, current cell in play, exit cell above the board on victory
    Heading base = Heading::Up;  // origin base, meaningful only while in play

    bool operator==(const Mouse&) const = default;
};

struct GameState {
    std::shared_ptr<const Level> level;
    std::map<CellCoord, PlacedGear> gears;
    std::vector<Mouse> mice;  // index i holds mouse id i+1
    Inventory inventory{};
    int move_number = 0;

    static GameState initial(std::shared_ptr<const Level> level);

    const PlacedGear* gear_at(CellCoord c) const;
    PlacedGear* gear_at(CellCoord c);
    const Mouse& mouse(int id) const { return mice.at(static_cast<std::size_t>(id - 1)); }
    Mouse& mouse(int id) { return mice.at(static_cast<std::size_t>(id - 1)); }
    int inventory_total() const;

    // Level compared by value so snapshots from different loads are equal.
    bool operator==(const GameState& other) const;
};

enum class Spin : std::int8_t { Minus = -1, Plus = 1 };

constexpr int sign(Spin s) { return static_cast<int>(s); }
constexpr Spin inverse(Spin s) { return s == Spin::Plus ? Spin::Minus : Spin::Plus; }

struct Placement {
    GearKind kind = GearKind::G1;
    CellCoord cell{};
    int initial_b = 0;
    Spin spin = Spin::Plus;
    bool operator==(const Placement&) const = default;
};

struct Rotation {
    CellCoord cell{};
    Spin spin = Spin::Plus;
    bool operator==(const Rotation&) const = default;
};

struct PreMoveRotation {
    CellCoord premove_cell{};
    int premove_b = 0;
    CellCoord rotation_cell{};
    Spin spin = Spin::Plus;
    bool operator==(const PreMoveRotation&) const = default;
};

using Move = std::variant<Placement, Rotation, PreMoveRotation>;

enum class EventPhase : std::uint8_t { PreRotation, PostRotation };

struct EntryEvent {
    int mouse = 0;
    CellCoord cell{};
    Heading base = Heading::Up;
    EventPhase phase = EventPhase::PostRotation;
    auto operator<=>(const EntryEvent&) const = default;
};

struct JumpEvent {
    int mouse = 0;
    CellCoord from{};
    CellCoord to{};
    Heading landing_base = Heading::Up;
    auto operator<=>(const JumpEvent&) const = default;
};

struct ExitEvent {
    int mouse = 0;
    CellCoord from{};
    auto operator<=>(const ExitEvent&) const = default;
};

using TurnEvent = std::variant<EntryEvent, JumpEvent, ExitEvent>;

int event_mouse(const TurnEvent& e);

struct OffBoard {
    CellCoord beyond{};  // e.g. P30 below P31
    Heading side = Heading::Down;
    auto operator<=>(const OffBoard&) const = default;
};

using Destination = std::variant<CellCoord, OffBoard>;

struct ConnectionCheck {
    Heading candidate_base{};
    Heading final_vector{};
    bool opposes = false;
    bool operator==(const ConnectionCheck&) const = default;
};

enum class Conclusion : std::uint8_t { Jumps, Exits, DoesNotJump };

/// One explicit four-step audit per mouse in play.
struct MouseAudit {
    int mouse = 0;
    CellCoord cell{};
    Heading base{};
    Heading vector{};
    Destination destination;
    bool destination_has_gear = false;
    std::vector<ConnectionCheck> connection_checks;
    Conclusion conclusion = Conclusion::DoesNotJump;
    bool operator==(const MouseAudit&) const = default;
};

struct RotationDelta {
    int before = 0;
    int after = 0;
    bool operator==(const RotationDelta&) const = default;
};

struct TurnReport {
    Move move;
    std::optional<RotationDelta> premove_delta;
    std::vector<TurnEvent> pre_rotation_entries;
    std::map<CellCoord, RotationDelta> rotation_deltas;
    std::vector<MouseAudit> audits;
    std::vector<TurnEvent> post_events;
    GameState final_state;

    /// Pre-rotation entries followed by post-rotation events.
    std::vector<TurnEvent> all_events() const;
};

}  // namespace capsicaps::rules
