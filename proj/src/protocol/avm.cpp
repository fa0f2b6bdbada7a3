#include "capsicaps/protocol/avm.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace capsicaps::avm {

using namespace rules;

namespace {

constexpr int kNoBase = -1;
constexpr int kFree = 0;

struct Square {
    bool gear = false;
    int kind = 0;                                  // 1..4
    int b = 0;
    int seat[4] = {kNoBase, kNoBase, kNoBase, kNoBase};  // by origin degree / 90; mouse id when taken
};

struct Rodent {
    char status = 'W';  // W waiting, P in play, V victory
    int x = 0, y = 0;
    int base_deg = 0;
};

struct Board {
    int w = 0, h = 0;
    std::vector<std::vector<Square>> sq;  // [x][y], 1-based
    std::vector<Rodent> mice;             // [id], 1-based
    std::vector<std::pair<int, int>> blocked;
    int stock[5] = {0, 0, 0, 0, 0};
    int move_no = 0;

    bool on_board(int x, int y) const { return x >= 1 && x <= w && y >= 1 && y <= h; }
    bool is_blocked(int x, int y) const { return std::ranges::find(blocked, std::pair{x, y}) != blocked.end(); }
    int gear_count() const {
        int n = 0;
        for (int x = 1; x <= w; ++x)
            for (int y = 1; y <= h; ++y) n += sq[x][y].gear ? 1 : 0;
        return n;
    }
    int stock_total() const { return stock[1] + stock[2] + stock[3] + stock[4]; }
};

int final_deg(int origin_deg, int b) { return (origin_deg + 90 * b) % 360; }

std::vector<int> bases_of(int kind) {
    switch (kind) {
        case 1: return {0};
        case 2: return {0, 180};
        case 3: return {90, 180, 270};
        default: return {0, 90, 180, 270};
    }
}

Board load(const GameState& s) {
    Board bd;
    bd.w = s.level->width;
    bd.h = s.level->height;
    bd.sq.assign(static_cast<std::size_t>(bd.w + 2), std::vector<Square>(static_cast<std::size_t>(bd.h + 2)));
    for (CellCoord c : s.level->obstacles) bd.blocked.emplace_back(c.x, c.y);
    for (const auto& [c, g] : s.gears) {
        Square& q = bd.sq[c.x][c.y];
        q.gear = true;
        q.kind = kind_number(g.kind);
        q.b = g.b;
        for (int d : bases_of(q.kind)) q.seat[d / 90] = kFree;
    }
    bd.mice.resize(s.mice.size() + 1);
    for (const Mouse& m : s.mice) {
        Rodent& r = bd.mice[static_cast<std::size_t>(m.id)];
        r.x = m.cell.x;
        r.y = m.cell.y;
        if (m.status == MouseStatus::InPlay) {
            r.status = 'P';
            r.base_deg = degrees(m.base);
            bd.sq[r.x][r.y].seat[r.base_deg / 90] = m.id;
        } else {
            r.status = m.status == MouseStatus::Waiting ? 'W' : 'V';
        }
    }
    for (int k = 1; k <= 4; ++k) bd.stock[k] = s.inventory[static_cast<std::size_t>(k - 1)];
    bd.move_no = s.move_number;
    return bd;
}

GameState store(const Board& bd, const std::shared_ptr<const Level>& level) {
    GameState s;
    s.level = level;
    s.move_number = bd.move_no;
    for (int k = 1; k <= 4; ++k) s.inventory[static_cast<std::size_t>(k - 1)] = bd.stock[k];
    for (int x = 1; x <= bd.w; ++x) {
        for (int y = 1; y <= bd.h; ++y) {
            const Square& q = bd.sq[x][y];
            if (!q.gear) continue;
            PlacedGear g;
            g.kind = static_cast<GearKind>(q.kind - 1);
            g.b = q.b;
            for (int i = 0; i < 4; ++i) {
                g.occupancy.slots[static_cast<std::size_t>(i)] =
                    q.seat[i] == kNoBase ? Slot::Nonexistent : (q.seat[i] == kFree ? Slot::Empty : Slot::Occupied);
            }
            s.gears[{x, y}] = g;
        }
    }
    for (std::size_t id = 1; id < bd.mice.size(); ++id) {
        const Rodent& r = bd.mice[id];
        Mouse m;
        m.id = static_cast<int>(id);
        m.cell = {r.x, r.y};
        m.status = r.status == 'W' ? MouseStatus::Waiting : r.status == 'P' ? MouseStatus::InPlay : MouseStatus::Victory;
        if (r.status == 'P') m.base = static_cast<Heading>(r.base_deg / 90);
        s.mice.push_back(m);
    }
    return s;
}

[[noreturn]] void illegal(const std::string& why) { throw std::runtime_error("auditor: " + why); }

void check_gear_cell(const Board& bd, CellCoord c) {
    if (!bd.on_board(c.x, c.y)) illegal(fmt::format("P{}{} is off the board", c.x, c.y));
    if (!bd.sq[c.x][c.y].gear) illegal(fmt::format("P{}{} has no gear", c.x, c.y));
}

void turn_all(Board& bd, CellCoord active, int spin) {
    const int parity = (active.x + active.y) % 2;
    for (int x = 1; x <= bd.w; ++x) {
        for (int y = 1; y <= bd.h; ++y) {
            Square& q = bd.sq[x][y];
            if (!q.gear) continue;
            const int step = ((x + y) % 2 == parity) ? spin : -spin;
            q.b = ((q.b + step) % 4 + 4) % 4;
        }
    }
}

bool network_connected(const Board& bd) {
    std::vector<std::pair<int, int>> cells;
    for (int x = 1; x <= bd.w; ++x)
        for (int y = 1; y <= bd.h; ++y)
            if (bd.sq[x][y].gear) cells.emplace_back(x, y);
    if (cells.size() <= 1) return true;
    std::vector<std::pair<int, int>> reached{cells.front()};
    for (std::size_t i = 0; i < reached.size(); ++i) {
        for (const auto& c : cells) {
            if (std::ranges::find(reached, c) != reached.end()) continue;
            if (std::abs(c.first - reached[i].first) + std::abs(c.second - reached[i].second) == 1) reached.push_back(c);
        }
    }
    return reached.size() == cells.size();
}

std::vector<TurnEvent> wave(Board& bd) {
    struct Claim {
        int x, y, deg;
    };
    std::vector<TurnEvent> events;
    std::vector<Claim> claims;
    for (std::size_t id = 1; id < bd.mice.size(); ++id) {
        const Rodent& r = bd.mice[id];
        const int mid = static_cast<int>(id);
        if (r.status == 'P') {
            const Square& here = bd.sq[r.x][r.y];
            const int v = final_deg(r.base_deg, here.b);
            if (r.y == bd.h && v == 0) {
                events.emplace_back(ExitEvent{mid, {r.x, r.y}});
                continue;
            }
            int tx = r.x, ty = r.y;
            if (v == 0) ++ty;
            if (v == 90) --tx;
            if (v == 180) --ty;
            if (v == 270) ++tx;
            if (!bd.on_board(tx, ty) || !bd.sq[tx][ty].gear) continue;
            const Square& there = bd.sq[tx][ty];
            for (int d = 0; d < 360; d += 90) {
                if (there.seat[d / 90] != kFree) continue;
                if ((final_deg(d, there.b) + 180) % 360 != v) continue;
                events.emplace_back(JumpEvent{mid, {r.x, r.y}, {tx, ty}, static_cast<Heading>(d / 90)});
                claims.push_back({tx, ty, d});
            }
        } else if (r.status == 'W' && bd.sq[mid][1].gear) {
            const Square& entry = bd.sq[mid][1];
            for (int d = 0; d < 360; d += 90) {
                if (entry.seat[d / 90] != kFree || final_deg(d, entry.b) != 180) continue;
                events.emplace_back(EntryEvent{mid, {mid, 1}, static_cast<Heading>(d / 90), EventPhase::PostRotation});
                claims.push_back({mid, 1, d});
            }
        }
    }
    for (std::size_t i = 0; i < claims.size(); ++i)
        for (std::size_t j = i + 1; j < claims.size(); ++j)
            if (claims[i].x == claims[j].x && claims[i].y == claims[j].y && claims[i].deg == claims[j].deg)
                illegal(fmt::format("two mice land on P{}{} base {}", claims[i].x, claims[i].y, claims[i].deg));

    for (const TurnEvent& e : events) {
        const Rodent& r = bd.mice[static_cast<std::size_t>(std::visit([](const auto& ev) { return ev.mouse; }, e))];
        if (r.status == 'P') bd.sq[r.x][r.y].seat[r.base_deg / 90] = kFree;
    }
    for (const TurnEvent& e : events) {
        if (const auto* x = std::get_if<ExitEvent>(&e)) {
            Rodent& r = bd.mice[static_cast<std::size_t>(x->mouse)];
            r.status = 'V';
            r.y = bd.h + 1;
            r.base_deg = 0;
        } else if (const auto* j = std::get_if<JumpEvent>(&e)) {
            Rodent& r = bd.mice[static_cast<std::size_t>(j->mouse)];
            r.x = j->to.x;
            r.y = j->to.y;
            r.base_deg = degrees(j->landing_base);
            bd.sq[r.x][r.y].seat[r.base_deg / 90] = j->mouse;
        } else {
            const auto& n = std::get<EntryEvent>(e);
            Rodent& r = bd.mice[static_cast<std::size_t>(n.mouse)];
            r.status = 'P';
            r.x = n.cell.x;
            r.y = 1;
            r.base_deg = degrees(n.base);
            bd.sq[r.x][1].seat[r.base_deg / 90] = n.mouse;
        }
    }
    return events;
}

std::string event_text(const TurnEvent& e) {
    return std::visit(
        [](const auto& ev) -> std::string {
            using T = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<T, ExitEvent>) return fmt::format("M{} exits from {}", ev.mouse, to_string(ev.from));
            else if constexpr (std::is_same_v<T, JumpEvent>)
                return fmt::format("M{} {}->{} base {}", ev.mouse, to_string(ev.from), to_string(ev.to), degrees(ev.landing_base));
            else return fmt::format("M{} enters {} base {}", ev.mouse, to_string(ev.cell), degrees(ev.base));
        },
        e);
}

}  // namespace

Result evaluate(const GameState& state, const Move& move) {
    Board bd = load(state);
    std::vector<TurnEvent> events;

    if (const auto* p = std::get_if<Placement>(&move)) {
        const int k = kind_number(p->kind);
        const int x = p->cell.x, y = p->cell.y;
        if (bd.stock_total() == 0) illegal("placement after the inventory ran out");
        if (bd.stock[k] == 0) illegal(fmt::format("no G{} left", k));
        if (!bd.on_board(x, y)) illegal(fmt::format("P{}{} is off the board", x, y));
        if (bd.is_blocked(x, y)) illegal(fmt::format("P{}{} is an obstacle", x, y));
        if (bd.sq[x][y].gear) illegal(fmt::format("P{}{} is taken", x, y));
        if (p->initial_b < 0 || p->initial_b > 3) illegal("b out of range");
        if (bd.gear_count() == 0) {
            if (y != 1) illegal("first gear off row 1");
        } else {
            bool touches = false;
            for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
                if (bd.on_board(x + dx, y + dy) && bd.sq[x + dx][y + dy].gear) touches = true;
            if (!touches) illegal(fmt::format("P{}{} touches no gear", x, y));
        }
        Square& q = bd.sq[x][y];
        q.gear = true;
        q.kind = k;
        q.b = p->initial_b;
        for (int d : bases_of(k)) q.seat[d / 90] = kFree;
        bd.stock[k] -= 1;
        Rodent& waiting = bd.mice[static_cast<std::size_t>(x)];
        if (y == 1 && waiting.status == 'W') {
            for (int d : bases_of(k)) {
                if (final_deg(d, q.b) != 180) continue;
                waiting.status = 'P';
                waiting.x = x;
                waiting.y = 1;
                waiting.base_deg = d;
                q.seat[d / 90] = x;
                events.emplace_back(EntryEvent{x, {x, 1}, static_cast<Heading>(d / 90), EventPhase::PreRotation});
                break;
            }
        }
        if (!network_connected(bd)) illegal("gear network split");
        turn_all(bd, p->cell, sign(p->spin));
    } else {
        if (bd.stock_total() > 0) illegal("rotation while gears remain in inventory");
        CellCoord active;
        int spin = 0;
        if (const auto* r = std::get_if<Rotation>(&move)) {
            active = r->cell;
            spin = sign(r->spin);
        } else {
            const auto& pm = std::get<PreMoveRotation>(move);
            check_gear_cell(bd, pm.premove_cell);
            if (pm.premove_b < 0 || pm.premove_b > 3) illegal("pre-move b out of range");
            bd.sq[pm.premove_cell.x][pm.premove_cell.y].b = pm.premove_b;
            active = pm.rotation_cell;
            spin = sign(pm.spin);
        }
        check_gear_cell(bd, active);
        if (!network_connected(bd)) illegal("gear network split");
        turn_all(bd, active, spin);
    }

    for (TurnEvent& e : wave(bd)) events.push_back(std::move(e));
    bd.move_no += 1;
    return {store(bd, state.level), std::move(events)};
}

std::vector<std::string> diff_states(const GameState& claimed, const GameState& expected) {
    std::vector<std::string> out;
    std::set<CellCoord> cells;
    for (const auto& [c, g] : claimed.gears) cells.insert(c);
    for (const auto& [c, g] : expected.gears) cells.insert(c);
    for (CellCoord c : cells) {
        const PlacedGear* a = claimed.gear_at(c);
        const PlacedGear* e = expected.gear_at(c);
        if (!a || !e) {
            out.push_back(fmt::format("{}: gear {} in claim, {} in audit", to_string(c), a ? "present" : "absent", e ? "present" : "absent"));
            continue;
        }
        if (a->kind != e->kind) out.push_back(fmt::format("{}: kind G{} claimed, G{} audited", to_string(c), kind_number(a->kind), kind_number(e->kind)));
        if (a->b != e->b) out.push_back(fmt::format("{}: b claimed {}, auditor {}", to_string(c), a->b, e->b));
        if (a->occupancy != e->occupancy) {
            out.push_back(fmt::format("{}: occupancy claimed {}, auditor {}", to_string(c), occupancy_code(a->occupancy), occupancy_code(e->occupancy)));
        }
    }
    const std::size_t n = std::max(claimed.mice.size(), expected.mice.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= claimed.mice.size() || i >= expected.mice.size()) {
            out.push_back(fmt::format("M{}: missing from one side", i + 1));
            continue;
        }
        if (claimed.mice[i] != expected.mice[i]) {
            const Mouse& a = claimed.mice[i];
            const Mouse& e = expected.mice[i];
            out.push_back(fmt::format("M{}: claimed P{}{}/{}, auditor P{}{}/{}", i + 1, a.cell.x, a.cell.y, degrees(a.base),
                                      e.cell.x, e.cell.y, degrees(e.base)));
        }
    }
    if (claimed.inventory != expected.inventory) out.push_back("inventory differs");
    if (claimed.move_number != expected.move_number) {
        out.push_back(fmt::format("move number claimed {}, auditor {}", claimed.move_number, expected.move_number));
    }
    return out;
}

std::vector<std::string> compare(const Result& mine, const TurnReport& claimed) {
    std::vector<std::string> out;
    auto sorted_text = [](const std::vector<TurnEvent>& ev) {
        std::vector<std::string> t;
        for (const auto& e : ev) t.push_back(event_text(e));
        std::ranges::sort(t);
        return t;
    };
    const auto claimed_events = sorted_text(claimed.all_events());
    const auto audited_events = sorted_text(mine.events);
    for (const auto& e : claimed_events)
        if (!std::ranges::binary_search(audited_events, e)) out.push_back("event not confirmed: " + e);
    for (const auto& e : audited_events)
        if (!std::ranges::binary_search(claimed_events, e)) out.push_back("event missing from claim: " + e);
    for (auto& d : diff_states(claimed.final_state, mine.final_state)) out.push_back(std::move(d));
    for (auto& d : cross_consistency(claimed.final_state)) out.push_back(std::move(d));
    return out;
}

std::vector<std::string> audit(const GameState& before, const Move& move, const TurnReport& claimed) {
    Result mine;
    try {
        mine = evaluate(before, move);
    } catch (const std::runtime_error& e) {
        return {e.what()};
    }
    return compare(mine, claimed);
}

std::vector<std::string> cross_consistency(const GameState& state) {
    std::vector<std::string> out;
    for (const auto& [c, g] : state.gears) {
        for (int i = 0; i < 4; ++i) {
            const Slot s = g.occupancy.slots[static_cast<std::size_t>(i)];
            int riders = 0;
            for (const Mouse& m : state.mice)
                if (m.status == MouseStatus::InPlay && m.cell == c && static_cast<int>(m.base) == i) ++riders;
            if (s == Slot::Occupied && riders != 1) {
                out.push_back(fmt::format("{} base {}: table says occupied, {} mice listed", to_string(c), i * 90, riders));
            }
            if (s != Slot::Occupied && riders > 0) {
                out.push_back(fmt::format("{} base {}: table says free, mouse listed there", to_string(c), i * 90));
            }
        }
    }
    for (const Mouse& m : state.mice) {
        if (m.status == MouseStatus::InPlay && !state.gear_at(m.cell)) {
            out.push_back(fmt::format("M{}: listed on {} which holds no gear", m.id, to_string(m.cell)));
        }
    }
    return out;
}

}  // namespace capsicaps::avm
