#include "capsicaps/notation/state_text.hpp"

#include <charconv>
#include <sstream>

#include <fmt/format.h>

#include "capsicaps/notation/notation.hpp"
#include "capsicaps/rules/kernel.hpp"

namespace capsicaps::notation {

using namespace rules;

namespace {

std::string_view status_name(MouseStatus s) {
    switch (s) {
        case MouseStatus::Waiting: return "Waiting";
        case MouseStatus::InPlay: return "InPlay";
        case MouseStatus::Victory: return "Victory";
    }
    return "?";
}

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

int to_int(const std::string& s, int line_no) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError("expected an integer, got '" + s + "'", line_no, 1);
    return v;
}

Occupancy parse_occupancy(const std::string& code, int line_no) {
    if (code.size() != 5 || code[0] != 'B') throw ParseError("occupancy must look like B0222, got '" + code + "'", line_no, 1);
    Occupancy occ;
    for (std::size_t i = 0; i < 4; ++i) {
        const char c = code[i + 1];
        if (c < '0' || c > '2') throw ParseError("occupancy digit must be 0, 1 or 2 in '" + code + "'", line_no, 1);
        occ.slots[i] = static_cast<Slot>(c - '0');
    }
    return occ;
}

std::pair<CellCoord, PlacedGear> parse_gear_row(const std::string& line, int line_no) {
    const auto w = split_ws(line);
    if (w.size() != 4) throw ParseError("gear row needs: cell prefix b occupancy", line_no, 1);
    const CellCoord cell = parse_cell(w[0]);
    if (w[1].size() != 6 || w[1][0] != 'G' || w[1][1] < '1' || w[1][1] > '4') {
        throw ParseError("malformed gear prefix '" + w[1] + "'", line_no, 1);
    }
    const auto kind = static_cast<GearKind>(w[1][1] - '1');
    if (gear_prefix(kind, cell) != w[1]) {
        throw ParseError(fmt::format("prefix {} does not match cell {}", w[1], to_string(cell)), line_no, 1);
    }
    PlacedGear g{kind, to_int(w[2], line_no), parse_occupancy(w[3], line_no)};
    if (g.b < 0 || g.b > 3) throw ParseError("b outside 0..3", line_no, 1);
    const Occupancy pristine = Occupancy::pristine(kind);
    for (std::size_t i = 0; i < 4; ++i) {
        if ((g.occupancy.slots[i] == Slot::Nonexistent) != (pristine.slots[i] == Slot::Nonexistent)) {
            throw ParseError(fmt::format("occupancy {} does not fit a G{}", w[3], kind_number(kind)), line_no, 1);
        }
    }
    return {cell, g};
}

Mouse parse_mouse_row(const std::string& line, int line_no) {
    const auto w = split_ws(line);
    if (w.size() != 5 || w[0].size() < 2 || w[0][0] != 'M') throw ParseError("mouse row needs: id status cell gear base", line_no, 1);
    Mouse m;
    m.id = to_int(w[0].substr(1), line_no);
    if (w[1] == "Waiting") m.status = MouseStatus::Waiting;
    else if (w[1] == "InPlay") m.status = MouseStatus::InPlay;
    else if (w[1] == "Victory") m.status = MouseStatus::Victory;
    else throw ParseError("unknown mouse status '" + w[1] + "'", line_no, 1);
    if (w[2].size() != 3 || w[2][0] != 'P') throw ParseError("malformed cell '" + w[2] + "'", line_no, 1);
    // Waiting and Victory cells sit on row 0 or height+1, so parse digits directly.
    m.cell = {w[2][1] - '0', w[2][2] - '0'};
    if (m.status == MouseStatus::InPlay) {
        auto base = heading_from_degrees(to_int(w[4], line_no));
        if (!base) throw ParseError("base must be 0, 90, 180 or 270", line_no, 1);
        m.base = *base;
    } else if (w[3] != "-" || w[4] != "-") {
        throw ParseError("a mouse off the board has no gear or base", line_no, 1);
    }
    return m;
}

Inventory parse_inventory_row(const std::vector<std::string>& w, int line_no) {
    if (w.size() != 5) throw ParseError("inventory row needs G1:n G2:n G3:n G4:n", line_no, 1);
    Inventory inv{};
    for (std::size_t k = 0; k < 4; ++k) {
        const std::string want = fmt::format("G{}:", k + 1);
        if (w[k + 1].rfind(want, 0) != 0) throw ParseError("expected " + want, line_no, 1);
        inv[k] = to_int(w[k + 1].substr(want.size()), line_no);
    }
    return inv;
}

Level parse_level_row(const std::vector<std::string>& w, int line_no) {
    std::string text;
    for (std::size_t i = 1; i < w.size(); ++i) text += w[i] + "\n";
    try {
        return parse_level(text);
    } catch (const ParseError& e) {
        throw ParseError(e.what(), line_no, 1);
    }
}

}  // namespace

std::string render_virtual_board(const GameState& state) {
    const Level& level = *state.level;
    std::string out;
    for (int y = level.height; y >= 1; --y) {
        out += fmt::format("Row {} (y={}):", y, y);
        for (int x = 1; x <= level.width; ++x) {
            const CellCoord c{x, y};
            if (const PlacedGear* g = state.gear_at(c)) {
                out += fmt::format(" [{}{}{}]", gear_prefix(g->kind, c), g->b, occupancy_code(g->occupancy));
            } else if (level.is_obstacle(c)) {
                out += " [ Obstacle ]";
            } else {
                out += fmt::format(" [  {}({})  ]", to_string(c), to_char(square_type_of(c)));
            }
        }
        out += "\n";
    }
    return out;
}

std::string serialize_state(const GameState& state) {
    const Level& level = *state.level;
    std::string out = fmt::format("Level id={} width={} height={} obstacle_map={} inventory={}\n", level.id, level.width,
                                  level.height, format_obstacle_map(level.obstacles, level.width, level.height),
                                  format_inventory(level.inventory));
    out += fmt::format("Move {}\n", state.move_number);
    out += "Game State Table\n";
    for (const auto& [cell, g] : state.gears) {
        out += fmt::format("{} {} {} {}\n", to_string(cell), gear_prefix(g.kind, cell), g.b, occupancy_code(g.occupancy));
    }
    out += "Mouse State Table\n";
    for (const Mouse& m : state.mice) {
        const std::string cell = fmt::format("P{}{}", m.cell.x, m.cell.y);
        if (m.status == MouseStatus::InPlay) {
            const PlacedGear& g = state.gears.at(m.cell);
            out += fmt::format("M{} {} {} {} {}\n", m.id, status_name(m.status), cell, gear_prefix(g.kind, m.cell).substr(0, 6),
                               degrees(m.base));
        } else {
            out += fmt::format("M{} {} {} - -\n", m.id, status_name(m.status), cell);
        }
    }
    out += "Virtual Board\n";
    out += render_virtual_board(state);
    out += fmt::format("Inventory G1:{} G2:{} G3:{} G4:{}\n", state.inventory[0], state.inventory[1], state.inventory[2],
                       state.inventory[3]);
    return out;
}

StateTables parse_state_tables(std::string_view text) {
    enum class Section { None, Gears, Mice, Board };
    StateTables t;
    Section section = Section::None;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto w = split_ws(line);
        if (w.empty()) continue;
        if (line.find("Game State Table") != std::string::npos) {
            section = Section::Gears;
        } else if (line.find("Mouse State Table") != std::string::npos) {
            section = Section::Mice;
        } else if (line.find("Virtual Board") != std::string::npos) {
            section = Section::Board;
        } else if (w[0] == "Level") {
            t.level = parse_level_row(w, line_no);
            section = Section::None;
        } else if (w[0] == "Move") {
            if (w.size() != 2) throw ParseError("expected 'Move <n>'", line_no, 1);
            t.move_number = to_int(w[1], line_no);
            section = Section::None;
        } else if (w[0] == "Inventory") {
            t.inventory = parse_inventory_row(w, line_no);
            section = Section::None;
        } else if (w[0] == "Checksum") {
            if (w.size() != 2) throw ParseError("expected 'Checksum <string>'", line_no, 1);
            t.checksum = w[1];
            section = Section::None;
        } else if (section == Section::Gears) {
            auto [cell, g] = parse_gear_row(line, line_no);
            if (!t.gears.emplace(cell, g).second) throw ParseError("duplicate gear row " + to_string(cell), line_no, 1);
        } else if (section == Section::Mice) {
            t.mice.push_back(parse_mouse_row(line, line_no));
        } else if (section == Section::Board && w[0] == "Row") {
            // derived rendering
        } else {
            throw ParseError("unexpected line '" + line + "'", line_no, 1);
        }
    }
    return t;
}

GameState deserialize_state(std::string_view text) {
    StateTables t = parse_state_tables(text);
    if (!t.level) throw ParseError("state text lacks a Level line", 0, 0);
    if (!t.move_number) throw ParseError("state text lacks a Move line", 0, 0);
    if (!t.inventory) throw ParseError("state text lacks an Inventory line", 0, 0);
    GameState s;
    s.level = std::make_shared<const Level>(*t.level);
    s.gears = std::move(t.gears);
    s.mice = std::move(t.mice);
    s.inventory = *t.inventory;
    s.move_number = *t.move_number;
    try {
        check_invariants(s);
    } catch (const std::logic_error& e) {
        throw ParseError(std::string("inconsistent state text: ") + e.what(), 0, 0);
    }
    return s;
}

Fixture parse_fixture(std::string_view text) {
    Fixture f;
    f.tables = parse_state_tables(text);
    if (!f.tables.move_number) throw ParseError("fixture lacks a Move line", 0, 0);
    f.move_number = *f.tables.move_number;
    return f;
}

std::vector<std::string> compare_fixture(const Fixture& fixture, const GameState& state, std::string_view checksum) {
    std::vector<std::string> diffs;
    const StateTables& want = fixture.tables;
    if (state.move_number != fixture.move_number) {
        diffs.push_back(fmt::format("move: expected J{}, got J{}", fixture.move_number, state.move_number));
    }
    for (const auto& [cell, g] : want.gears) {
        const PlacedGear* got = state.gear_at(cell);
        if (!got) {
            diffs.push_back(fmt::format("{}: expected {}, cell is empty", to_string(cell), gear_prefix(g.kind, cell)));
            continue;
        }
        if (got->kind != g.kind) diffs.push_back(fmt::format("{}: kind G{} vs G{}", to_string(cell), kind_number(g.kind), kind_number(got->kind)));
        if (got->b != g.b) diffs.push_back(fmt::format("{}: b expected {}, got {}", to_string(cell), g.b, got->b));
        if (got->occupancy != g.occupancy) {
            diffs.push_back(fmt::format("{}: occupancy expected {}, got {}", to_string(cell), occupancy_code(g.occupancy),
                                        occupancy_code(got->occupancy)));
        }
    }
    for (const auto& [cell, g] : state.gears) {
        if (!want.gears.contains(cell)) diffs.push_back(fmt::format("{}: unexpected gear {}", to_string(cell), gear_prefix(g.kind, cell)));
    }
    for (const Mouse& m : want.mice) {
        if (m.id < 1 || m.id > static_cast<int>(state.mice.size())) {
            diffs.push_back(fmt::format("M{}: no such mouse", m.id));
            continue;
        }
        const Mouse& got = state.mouse(m.id);
        if (got.status != m.status) diffs.push_back(fmt::format("M{}: status {} vs {}", m.id, status_name(m.status), status_name(got.status)));
        if (got.cell != m.cell) {
            diffs.push_back(fmt::format("M{}: cell expected P{}{}, got P{}{}", m.id, m.cell.x, m.cell.y, got.cell.x, got.cell.y));
        }
        if (m.status == MouseStatus::InPlay && got.base != m.base) {
            diffs.push_back(fmt::format("M{}: base expected {}, got {}", m.id, degrees(m.base), degrees(got.base)));
        }
    }
    if (want.inventory && *want.inventory != state.inventory) {
        diffs.push_back(fmt::format("inventory expected {}, got {}", format_inventory(*want.inventory), format_inventory(state.inventory)));
    }
    if (want.checksum && *want.checksum != checksum) {
        diffs.push_back(fmt::format("checksum expected {}, got {}", *want.checksum, checksum));
    }
    return diffs;
}

}  // namespace capsicaps::notation
