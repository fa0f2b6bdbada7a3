#include "capsicaps/rules/types.hpp"

#include <numeric>

#include <fmt/format.h>

#include "capsicaps/rules/errors.hpp"

namespace capsicaps::rules {

std::optional<Heading> heading_from_degrees(int deg) {
    switch (deg) {
        case 0: return Heading::Up;
        case 90: return Heading::Left;
        case 180: return Heading::Down;
        case 270: return Heading::Right;
        default: return std::nullopt;
    }
}

std::string to_string(CellCoord c) { return fmt::format("P{}{}", c.x, c.y); }

bool has_origin_base(GearKind kind, Heading origin) {
    switch (kind) {
        case GearKind::G1: return origin == Heading::Up;
        case GearKind::G2: return origin == Heading::Up || origin == Heading::Down;
        case GearKind::G3: return origin != Heading::Up;
        case GearKind::G4: return true;
    }
    return false;
}

std::vector<Heading> origin_bases(GearKind kind) {
    std::vector<Heading> out;
    for (int q = 0; q < 4; ++q) {
        if (has_origin_base(kind, static_cast<Heading>(q))) out.push_back(static_cast<Heading>(q));
    }
    return out;
}

Occupancy Occupancy::pristine(GearKind kind) {
    Occupancy occ;
    for (int q = 0; q < 4; ++q) {
        occ.slots[static_cast<std::size_t>(q)] =
            has_origin_base(kind, static_cast<Heading>(q)) ? Slot::Empty : Slot::Nonexistent;
    }
    return occ;
}

std::string occupancy_code(const Occupancy& occ) {
    std::string out = "B";
    for (Slot s : occ.slots) out.push_back(static_cast<char>('0' + static_cast<int>(s)));
    return out;
}

std::string gear_prefix(GearKind kind, CellCoord cell) {
    return fmt::format("G{}P{}{}{}", kind_number(kind), cell.x, cell.y, to_char(square_type_of(cell)));
}

void Level::validate() const {
    if (width < 1 || height < 1) {
        throw DomainError(fmt::format("board must be at least 1x1, got {}x{}", width, height));
    }
    if (width > 9 || height > 8) {
        // Pxy notation is single-digit per axis; the exit row is height+1.
        throw DomainError(fmt::format("board {}x{} exceeds single-digit coordinates", width, height));
    }
    for (CellCoord c : obstacles) {
        if (!inside(c)) throw DomainError("obstacle " + to_string(c) + " lies outside the board");
    }
    for (int n : inventory) {
        if (n < 0) throw DomainError("negative inventory count");
    }
}

GameState GameState::initial(std::shared_ptr<const Level> level) {
    level->validate();
    GameState s;
    s.inventory = level->inventory;
    for (int x = 1; x <= level->width; ++x) {
        s.mice.push_back(Mouse{x, MouseStatus::Waiting, CellCoord{x, 0}, Heading::Up});
    }
    s.level = std::move(level);
    return s;
}

const PlacedGear* GameState::gear_at(CellCoord c) const {
    auto it = gears.find(c);
    return it == gears.end() ? nullptr : &it->second;
}

PlacedGear* GameState::gear_at(CellCoord c) {
    auto it = gears.find(c);
    return it == gears.end() ? nullptr : &it->second;
}

int GameState::inventory_total() const { return std::accumulate(inventory.begin(), inventory.end(), 0); }

bool GameState::operator==(const GameState& other) const {
    const bool same_level = (level == other.level) || (level && other.level && *level == *other.level);
    return same_level && gears == other.gears && mice == other.mice && inventory == other.inventory &&
           move_number == other.move_number;
}

int event_mouse(const TurnEvent& e) {
    return std::visit([](const auto& ev) { return ev.mouse; }, e);
}

std::vector<TurnEvent> TurnReport::all_events() const {
    std::vector<TurnEvent> out = pre_rotation_entries;
    out.insert(out.end(), post_events.begin(), post_events.end());
    return out;
}

}  // namespace capsicaps::rules
