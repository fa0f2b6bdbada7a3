#include "capsicaps/rules/kernel.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>

#include <fmt/format.h>

namespace capsicaps::rules {

namespace {

constexpr std::array<Heading, 4> kHeadings{Heading::Up, Heading::Left, Heading::Down, Heading::Right};

CellCoord step(CellCoord c, Heading h) {
    switch (h) {
        case Heading::Up: return {c.x, c.y + 1};
        case Heading::Left: return {c.x - 1, c.y};
        case Heading::Down: return {c.x, c.y - 1};
        case Heading::Right: return {c.x + 1, c.y};
    }
    return c;
}

int event_class(const TurnEvent& e) {
    if (std::holds_alternative<ExitEvent>(e)) return 0;
    if (std::holds_alternative<JumpEvent>(e)) return 1;
    return 2;
}

void sort_events(std::vector<TurnEvent>& events) {
    std::ranges::sort(events, [](const TurnEvent& a, const TurnEvent& b) {
        return std::pair{event_class(a), event_mouse(a)} < std::pair{event_class(b), event_mouse(b)};
    });
}

// Empty base on `gear` whose final vector is `wanted`, plus the per-base checks.
std::optional<Heading> find_landing(const PlacedGear& gear, Heading wanted, std::vector<ConnectionCheck>* checks) {
    std::optional<Heading> landing;
    for (Heading origin : kHeadings) {
        if (gear.occupancy.at(origin) != Slot::Empty) continue;
        const Heading final_vector = base_vector(origin, gear.b);
        const bool opposes = final_vector == wanted;
        if (checks) checks->push_back({origin, final_vector, opposes});
        if (opposes && !landing) landing = origin;
    }
    return landing;
}

void require_inside(const Level& level, CellCoord c) {
    if (!level.inside(c)) throw IllegalMove(RuleId::OutOfBoard, to_string(c) + " is outside the board");
}

void require_gear(const GameState& state, CellCoord c) {
    require_inside(*state.level, c);
    if (!state.gear_at(c)) throw IllegalMove(RuleId::EmptyCellRotation, to_string(c) + " holds no gear");
}

void require_b(int b) {
    if (b < 0 || b > 3) throw IllegalMove(RuleId::InvalidRotationState, fmt::format("b={} outside 0..3", b));
}

void require_rotation_phase(const GameState& state) {
    if (state.inventory_total() > 0) {
        throw IllegalMove(RuleId::PhaseViolation,
                          fmt::format("{} gear(s) still in inventory; only placements are allowed",
                                      state.inventory_total()));
    }
}

void apply_cascade(GameState& s, CellCoord activated, Spin spin, TurnReport& report) {
    if (auto conn = connectivity_check(s); auto* bad = std::get_if<Disconnected>(&conn)) {
        throw IllegalMove(RuleId::Disconnected, fmt::format("gear network has {} components", bad->components));
    }
    for (const auto& [cell, b] : rotation_cascade(s, activated, spin)) {
        PlacedGear& g = s.gears.at(cell);
        report.rotation_deltas[cell] = {g.b, b};
        g.b = b;
    }
}

}  // namespace

SquareType square_type(CellCoord cell, const Level& level) {
    if (!level.inside(cell)) throw DomainError(to_string(cell) + " is outside the board");
    return square_type_of(cell);
}

Destination vector_to_destination(CellCoord cell, Heading vector, const Level& level) {
    const CellCoord next = step(cell, vector);
    if (level.inside(next)) return next;
    return OffBoard{next, vector};
}

std::set<CellCoord> legal_placements(const GameState& state) {
    const Level& level = *state.level;
    std::set<CellCoord> out;
    for (int x = 1; x <= level.width; ++x) {
        for (int y = 1; y <= level.height; ++y) {
            const CellCoord c{x, y};
            if (level.is_obstacle(c) || state.gear_at(c)) continue;
            if (state.gears.empty()) {
                if (y == 1) out.insert(c);
                continue;
            }
            const bool adjacent = std::ranges::any_of(kHeadings, [&](Heading h) { return state.gear_at(step(c, h)); });
            if (adjacent) out.insert(c);
        }
    }
    return out;
}

ConnectivityResult connectivity_check(const GameState& state) {
    std::set<CellCoord> unvisited;
    for (const auto& [cell, gear] : state.gears) unvisited.insert(cell);
    int components = 0;
    while (!unvisited.empty()) {
        ++components;
        std::queue<CellCoord> frontier;
        frontier.push(*unvisited.begin());
        unvisited.erase(unvisited.begin());
        while (!frontier.empty()) {
            const CellCoord c = frontier.front();
            frontier.pop();
            for (Heading h : kHeadings) {
                if (auto it = unvisited.find(step(c, h)); it != unvisited.end()) {
                    frontier.push(*it);
                    unvisited.erase(it);
                }
            }
        }
    }
    if (components <= 1) return Connected{};
    return Disconnected{components};
}

std::map<CellCoord, int> rotation_cascade(const GameState& state, CellCoord activated, Spin spin) {
    require_gear(state, activated);
    const SquareType active_type = square_type_of(activated);
    std::map<CellCoord, int> out;
    for (const auto& [cell, gear] : state.gears) {
        const int delta = square_type_of(cell) == active_type ? sign(spin) : -sign(spin);
        out[cell] = (gear.b + delta + 4) % 4;
    }
    return out;
}

JumpAnalysis jump_analysis(const GameState& state) {
    std::vector<int> order(state.mice.size());
    std::iota(order.begin(), order.end(), 1);
    return jump_analysis(state, order);
}

JumpAnalysis jump_analysis(const GameState& state, std::span<const int> mouse_order) {
    const Level& level = *state.level;
    JumpAnalysis out;
    for (int id : mouse_order) {
        const Mouse& m = state.mouse(id);
        if (m.status == MouseStatus::Waiting) {
            const PlacedGear* entry_gear = state.gear_at({m.id, 1});
            if (!entry_gear) continue;
            if (auto base = find_landing(*entry_gear, Heading::Down, nullptr)) {
                out.events.emplace_back(EntryEvent{m.id, {m.id, 1}, *base, EventPhase::PostRotation});
            }
            continue;
        }
        if (m.status != MouseStatus::InPlay) continue;

        const PlacedGear& gear = state.gears.at(m.cell);
        MouseAudit audit;
        audit.mouse = m.id;
        audit.cell = m.cell;
        audit.base = m.base;
        audit.vector = base_vector(m.base, gear.b);
        audit.destination = vector_to_destination(m.cell, audit.vector, level);

        if (m.cell.y == level.height && audit.vector == Heading::Up) {
            audit.conclusion = Conclusion::Exits;
            out.events.emplace_back(ExitEvent{m.id, m.cell});
        } else if (const auto* dest = std::get_if<CellCoord>(&audit.destination)) {
            if (const PlacedGear* target = state.gear_at(*dest)) {
                audit.destination_has_gear = true;
                if (auto landing = find_landing(*target, opposite(audit.vector), &audit.connection_checks)) {
                    audit.conclusion = Conclusion::Jumps;
                    out.events.emplace_back(JumpEvent{m.id, m.cell, *dest, *landing});
                }
            }
        }
        out.audits.push_back(std::move(audit));
    }
    sort_events(out.events);
    std::ranges::sort(out.audits, {}, &MouseAudit::mouse);
    return out;
}

void apply_events(GameState& state, std::span<const TurnEvent> events) {
    std::set<std::pair<CellCoord, Heading>> claimed;
    auto claim = [&](int mouse, CellCoord cell, Heading base) {
        const PlacedGear* g = state.gear_at(cell);
        if (!g || g->occupancy.at(base) != Slot::Empty || !claimed.insert({cell, base}).second) {
            throw IllegalMove(RuleId::JumpConflict,
                              fmt::format("M{} cannot land on {} base {}°", mouse, to_string(cell), degrees(base)));
        }
    };
    for (const TurnEvent& e : events) {
        if (const auto* j = std::get_if<JumpEvent>(&e)) claim(j->mouse, j->to, j->landing_base);
        if (const auto* n = std::get_if<EntryEvent>(&e)) claim(n->mouse, n->cell, n->base);
    }
    // Vacate first so a slot freed this wave is never mistaken for a landing.
    for (const TurnEvent& e : events) {
        const int id = event_mouse(e);
        const Mouse& m = state.mouse(id);
        if (m.status == MouseStatus::InPlay) state.gears.at(m.cell).occupancy.set(m.base, Slot::Empty);
    }
    for (const TurnEvent& e : events) {
        std::visit(
            [&](const auto& ev) {
                using T = std::decay_t<decltype(ev)>;
                Mouse& m = state.mouse(ev.mouse);
                if constexpr (std::is_same_v<T, ExitEvent>) {
                    m.status = MouseStatus::Victory;
                    m.cell = {ev.from.x, state.level->height + 1};
                    m.base = Heading::Up;
                } else {
                    CellCoord cell;
                    Heading base;
                    if constexpr (std::is_same_v<T, JumpEvent>) {
                        cell = ev.to;
                        base = ev.landing_base;
                    } else {
                        cell = ev.cell;
                        base = ev.base;
                    }
                    m.status = MouseStatus::InPlay;
                    m.cell = cell;
                    m.base = base;
                    state.gears.at(cell).occupancy.set(base, Slot::Occupied);
                }
            },
            e);
    }
}

void check_move_legal(const GameState& state, const Move& move) {
    const Level& level = *state.level;
    if (const auto* p = std::get_if<Placement>(&move)) {
        if (state.inventory_total() == 0) {
            throw IllegalMove(RuleId::PhaseViolation, "inventory is empty; placements are over");
        }
        if (state.inventory[kind_index(p->kind)] <= 0) {
            throw IllegalMove(RuleId::InventoryUnderflow, fmt::format("no G{} left in inventory", kind_number(p->kind)));
        }
        require_inside(level, p->cell);
        if (level.is_obstacle(p->cell)) throw IllegalMove(RuleId::ObstacleCell, to_string(p->cell) + " is an obstacle");
        if (state.gear_at(p->cell)) throw IllegalMove(RuleId::CellOccupied, to_string(p->cell) + " already holds a gear");
        require_b(p->initial_b);
        if (state.gears.empty()) {
            if (p->cell.y != 1) {
                throw IllegalMove(RuleId::FirstGearRow, "the first gear must be placed in row y=1, not " + to_string(p->cell));
            }
        } else if (!legal_placements(state).contains(p->cell)) {
            throw IllegalMove(RuleId::AvpAdjacency, to_string(p->cell) + " is not adjacent to any gear");
        }
        return;
    }
    require_rotation_phase(state);
    if (const auto* r = std::get_if<Rotation>(&move)) {
        require_gear(state, r->cell);
        return;
    }
    const auto& pm = std::get<PreMoveRotation>(move);
    require_gear(state, pm.premove_cell);
    require_b(pm.premove_b);
    require_gear(state, pm.rotation_cell);
}

TurnReport apply_move(const GameState& state, const Move& move) {
    check_move_legal(state, move);
    GameState s = state;
    TurnReport report{.move = move, .final_state = {}};

    if (const auto* p = std::get_if<Placement>(&move)) {
        PlacedGear gear{p->kind, p->initial_b, Occupancy::pristine(p->kind)};
        s.inventory[kind_index(p->kind)] -= 1;
        if (p->cell.y == 1) {
            Mouse& m = s.mouse(p->cell.x);
            if (m.status == MouseStatus::Waiting) {
                if (auto base = find_landing(gear, Heading::Down, nullptr)) {
                    gear.occupancy.set(*base, Slot::Occupied);
                    m.status = MouseStatus::InPlay;
                    m.cell = p->cell;
                    m.base = *base;
                    report.pre_rotation_entries.emplace_back(EntryEvent{m.id, p->cell, *base, EventPhase::PreRotation});
                }
            }
        }
        s.gears.emplace(p->cell, gear);
        apply_cascade(s, p->cell, p->spin, report);
    } else if (const auto* r = std::get_if<Rotation>(&move)) {
        apply_cascade(s, r->cell, r->spin, report);
    } else {
        const auto& pm = std::get<PreMoveRotation>(move);
        PlacedGear& g = s.gears.at(pm.premove_cell);
        report.premove_delta = RotationDelta{g.b, pm.premove_b};
        g.b = pm.premove_b;
        apply_cascade(s, pm.rotation_cell, pm.spin, report);
    }

    JumpAnalysis wave = jump_analysis(s);
    apply_events(s, wave.events);
    report.audits = std::move(wave.audits);
    report.post_events = std::move(wave.events);
    s.move_number += 1;
    report.final_state = std::move(s);
    return report;
}

bool victory_check(const GameState& state) {
    return std::ranges::all_of(state.mice, [](const Mouse& m) { return m.status == MouseStatus::Victory; });
}

void check_invariants(const GameState& state) {
    auto fail = [](const std::string& what) { throw std::logic_error("invariant violated: " + what); };
    const Level& level = *state.level;
    Inventory placed{};
    for (const auto& [cell, gear] : state.gears) {
        if (!level.inside(cell)) fail(to_string(cell) + " outside board");
        if (level.is_obstacle(cell)) fail("gear on obstacle " + to_string(cell));
        if (gear.b < 0 || gear.b > 3) fail("b out of range at " + to_string(cell));
        for (Heading h : kHeadings) {
            const bool exists = has_origin_base(gear.kind, h);
            if (exists != (gear.occupancy.at(h) != Slot::Nonexistent)) fail("nonexistent-slot pattern at " + to_string(cell));
        }
        placed[kind_index(gear.kind)] += 1;
    }
    for (int k = 0; k < 4; ++k) {
        if (state.inventory[k] < 0 || placed[k] + state.inventory[k] != level.inventory[k]) {
            fail(fmt::format("inventory conservation for G{}", k + 1));
        }
    }
    if (std::holds_alternative<Disconnected>(connectivity_check(state))) fail("gear network is disconnected");
    if (static_cast<int>(state.mice.size()) != level.mouse_count()) fail("mouse count");

    std::map<std::pair<CellCoord, Heading>, int> seats;
    for (std::size_t i = 0; i < state.mice.size(); ++i) {
        const Mouse& m = state.mice[i];
        if (m.id != static_cast<int>(i) + 1) fail("mouse ids out of order");
        switch (m.status) {
            case MouseStatus::Waiting:
                if (m.cell != CellCoord{m.id, 0}) fail(fmt::format("M{} waiting off its column", m.id));
                break;
            case MouseStatus::Victory:
                if (m.cell.y != level.height + 1) fail(fmt::format("M{} victory cell", m.id));
                break;
            case MouseStatus::InPlay: {
                const PlacedGear* g = state.gear_at(m.cell);
                if (!g || g->occupancy.at(m.base) != Slot::Occupied) fail(fmt::format("M{} seat not occupied", m.id));
                if (++seats[{m.cell, m.base}] > 1) fail("two mice share a base");
                break;
            }
        }
    }
    for (const auto& [cell, gear] : state.gears) {
        for (Heading h : kHeadings) {
            if (gear.occupancy.at(h) == Slot::Occupied && !seats.contains({cell, h})) {
                fail(fmt::format("{} base {}° occupied without a mouse", to_string(cell), degrees(h)));
            }
        }
    }
}

}  // namespace capsicaps::rules
