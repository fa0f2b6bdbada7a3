#include "capsicaps/strategist/strategist.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "capsicaps/rules/kernel.hpp"

namespace capsicaps::strategist {

using namespace rules;

namespace {

constexpr std::array<Heading, 4> kHeadings{Heading::Up, Heading::Left, Heading::Down, Heading::Right};

CellCoord neighbour(CellCoord c, Heading h) {
    switch (h) {
        case Heading::Up: return {c.x, c.y + 1};
        case Heading::Left: return {c.x - 1, c.y};
        case Heading::Down: return {c.x, c.y - 1};
        case Heading::Right: return {c.x + 1, c.y};
    }
    return c;
}

// Whether some base of `a` points at `b` while a base of `b` points back,
// with at most one of the two occupied, after shifting b-values by da/db.
bool facing(const PlacedGear& a, int da, const PlacedGear& b, int db, Heading towards_b) {
    for (Heading oa : kHeadings) {
        const Slot sa = a.occupancy.at(oa);
        if (sa == Slot::Nonexistent || base_vector(oa, a.b + da) != towards_b) continue;
        for (Heading ob : kHeadings) {
            const Slot sb = b.occupancy.at(ob);
            if (sb == Slot::Nonexistent || base_vector(ob, b.b + db) != opposite(towards_b)) continue;
            if (sa == Slot::Empty || sb == Slot::Empty) return true;
        }
    }
    return false;
}

const char* kQuestions[] = {
    "",
    "Can a mouse exit now?",
    "Can a mouse reach the final row?",
    "Can a mouse climb a row or enter the board?",
    "Can a move build a future jump path?",
    "Can a pre-move improve the rotation?",
    "Is the chosen move the best available?",
};

}  // namespace

StrategyConfig StrategyConfig::from_json(const nlohmann::json& j) {
    StrategyConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "facing_pair_weight") c.facing_pair_weight = value.get<int>();
        else if (key == "one_turn_pair_weight") c.one_turn_pair_weight = value.get<int>();
        else if (key == "exit_setup_weight") c.exit_setup_weight = value.get<int>();
        else if (key == "alternatives_reported") c.alternatives_reported = value.get<int>();
        else if (key == "degraded_max_events") {
            if (!value.is_null()) c.degraded_max_events = value.get<int>();
        } else if (key == "tie_break") {
            const auto s = value.get<std::string>();
            if (s == "lowest") c.tie_break = TieBreak::Lowest;
            else if (s == "highest") c.tie_break = TieBreak::Highest;
            else throw std::invalid_argument("tie_break must be \"lowest\" or \"highest\"");
        } else {
            throw std::invalid_argument("unknown strategy config key '" + key + "'");
        }
    }
    if (c.degraded_max_events && *c.degraded_max_events < 0) throw std::invalid_argument("degraded_max_events < 0");
    return c;
}

nlohmann::json StrategyConfig::to_json() const {
    nlohmann::json j{{"facing_pair_weight", facing_pair_weight},
                     {"one_turn_pair_weight", one_turn_pair_weight},
                     {"exit_setup_weight", exit_setup_weight},
                     {"tie_break", tie_break == TieBreak::Lowest ? "lowest" : "highest"},
                     {"alternatives_reported", alternatives_reported}};
    j["degraded_max_events"] = degraded_max_events ? nlohmann::json(*degraded_max_events) : nlohmann::json(nullptr);
    return j;
}

StrategyConfig load_strategy_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open strategy config " + path);
    return StrategyConfig::from_json(nlohmann::json::parse(in));
}

MoveKey canonical_key(const Move& m) {
    return std::visit(
        [](const auto& v) -> MoveKey {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Placement>) {
                return {0, v.cell.x, v.cell.y, kind_index(v.kind), v.initial_b, sign(v.spin)};
            } else if constexpr (std::is_same_v<T, Rotation>) {
                return {1, v.cell.x, v.cell.y, 0, 0, sign(v.spin)};
            } else {
                return {2, v.premove_cell.x, v.premove_cell.y, v.premove_b, v.rotation_cell.x * 10 + v.rotation_cell.y,
                        sign(v.spin)};
            }
        },
        m);
}

std::vector<Move> enumerate_moves(const GameState& state) {
    std::vector<Move> out;
    if (state.inventory_total() > 0) {
        for (CellCoord cell : legal_placements(state)) {
            for (GearKind k : kAllGearKinds) {
                if (state.inventory[kind_index(k)] == 0) continue;
                for (int b = 0; b < 4; ++b) {
                    for (Spin s : {Spin::Minus, Spin::Plus}) out.emplace_back(Placement{k, cell, b, s});
                }
            }
        }
        return out;
    }
    if (state.gears.empty()) return out;
    // Every activation is one of two global rotations; name them by the lowest cell.
    const CellCoord anchor = state.gears.begin()->first;
    for (Spin s : {Spin::Minus, Spin::Plus}) out.emplace_back(Rotation{anchor, s});
    for (const auto& [cell, gear] : state.gears) {
        for (int b = 0; b < 4; ++b) {
            if (b == gear.b) continue;
            for (Spin s : {Spin::Minus, Spin::Plus}) out.emplace_back(PreMoveRotation{cell, b, anchor, s});
        }
    }
    return out;
}

long path_potential(const GameState& state, const StrategyConfig& cfg) {
    long total = 0;
    for (const auto& [cell, a] : state.gears) {
        for (Heading h : {Heading::Up, Heading::Right}) {
            const PlacedGear* b = state.gear_at(neighbour(cell, h));
            if (!b) continue;
            // Neighbours always differ in square type, so a global rotation turns them oppositely.
            if (facing(a, 0, *b, 0, h)) total += cfg.facing_pair_weight;
            else if (facing(a, 1, *b, -1, h) || facing(a, -1, *b, 1, h)) total += cfg.one_turn_pair_weight;
        }
    }
    for (const Mouse& m : state.mice) {
        if (m.status != MouseStatus::InPlay || m.cell.y != state.level->height) continue;
        const int b = state.gears.at(m.cell).b;
        if (base_vector(m.base, b + 1) == Heading::Up || base_vector(m.base, b + 3) == Heading::Up) {
            total += cfg.exit_setup_weight;
        }
    }
    return total;
}

namespace {

OutcomeScore score_report(const TurnReport& r, const StrategyConfig& cfg) {
    OutcomeScore s;
    const int height = r.final_state.level->height;
    for (const TurnEvent& e : r.all_events()) {
        if (std::holds_alternative<ExitEvent>(e)) {
            ++s.exits;
        } else if (const auto* j = std::get_if<JumpEvent>(&e)) {
            if (j->to.y == height) ++s.to_final_row;
            if (j->to.y > j->from.y) ++s.advances;
        } else {
            ++s.advances;
        }
    }
    s.maneuver_value = path_potential(r.final_state, cfg);
    return s;
}

std::vector<TurnEvent> declared(const TurnReport& r, const StrategyConfig& cfg) {
    std::vector<TurnEvent> ev = r.all_events();
    if (cfg.degraded_max_events && static_cast<int>(ev.size()) > *cfg.degraded_max_events) {
        ev.resize(static_cast<std::size_t>(*cfg.degraded_max_events));
    }
    return ev;
}

bool meets(const OutcomeScore& s, int priority) {
    switch (priority) {
        case 1: return s.exits > 0;
        case 2: return s.to_final_row > 0;
        case 3: return s.advances > 0;
        case 4: return s.maneuver_value > 0;
    }
    return false;
}

}  // namespace

OutcomeScore score_move(const GameState& state, const Move& move, const StrategyConfig& cfg) {
    return score_report(apply_move(state, move), cfg);
}

bool better(const ScoredMove& a, const ScoredMove& b, TieBreak tie) {
    if (a.score != b.score) return a.score > b.score;
    return tie == TieBreak::Lowest ? canonical_key(a.move) < canonical_key(b.move)
                                   : canonical_key(a.move) > canonical_key(b.move);
}

int priority_of(const OutcomeScore& s) {
    for (int p = 1; p <= 4; ++p)
        if (meets(s, p)) return p;
    return 6;
}

Proposal select_move(const GameState& state, const StrategyConfig& cfg) {
    const std::vector<Move> moves = enumerate_moves(state);
    if (moves.empty()) throw TerminalPosition(fmt::format("no legal move at J{}", state.move_number));

    std::vector<ScoredMove> scored;
    scored.reserve(moves.size());
    for (const Move& m : moves) {
        try {
            scored.push_back({m, score_move(state, m, cfg)});
        } catch (const IllegalMove&) {
            // legal by the placement and phase rules but ends in a jump conflict
        }
    }
    if (scored.empty()) throw TerminalPosition(fmt::format("every move at J{} ends in a jump conflict", state.move_number));
    std::ranges::sort(scored, [&](const ScoredMove& a, const ScoredMove& b) { return better(a, b, cfg.tie_break); });

    const ScoredMove& best = scored.front();
    const TurnReport report = apply_move(state, best.move);

    Proposal p;
    p.move = best.move;
    p.declared_events = declared(report, cfg);
    p.score = best.score;
    p.priority_met = priority_of(best.score);
    if (p.priority_met == 6 && std::holds_alternative<PreMoveRotation>(best.move)) p.priority_met = 5;

    Justification& j = p.justification;
    j.candidates = static_cast<int>(scored.size());
    j.path_potential_before = path_potential(state, cfg);
    for (int pr = 1; pr <= 4; ++pr) {
        PriorityCheck c{pr, kQuestions[pr], false, std::nullopt};
        // scored is best-first, so the first hit is the best move of this class.
        auto it = std::ranges::find_if(scored, [&](const ScoredMove& s) { return meets(s.score, pr); });
        if (it != scored.end()) {
            c.satisfied = true;
            c.best = *it;
        }
        j.checks.push_back(std::move(c));
    }
    PriorityCheck pre{5, kQuestions[5], false, std::nullopt};
    if (state.inventory_total() == 0) {
        auto it = std::ranges::find_if(scored, [](const ScoredMove& s) { return std::holds_alternative<PreMoveRotation>(s.move); });
        auto plain = std::ranges::find_if(scored, [](const ScoredMove& s) { return std::holds_alternative<Rotation>(s.move); });
        if (it != scored.end()) {
            pre.best = *it;
            pre.satisfied = plain == scored.end() || it->score > plain->score;
        }
    }
    j.checks.push_back(std::move(pre));
    j.checks.push_back(PriorityCheck{6, kQuestions[6], true, best});
    const auto n = std::min<std::size_t>(scored.size(), static_cast<std::size_t>(std::max(cfg.alternatives_reported, 0)) + 1);
    j.alternatives.assign(scored.begin() + 1, scored.begin() + static_cast<std::ptrdiff_t>(n));
    return p;
}

Proposal propose_move(const GameState& state, const Move& move, const StrategyConfig& cfg) {
    const TurnReport report = apply_move(state, move);
    Proposal p;
    p.move = move;
    p.declared_events = declared(report, cfg);
    p.score = score_report(report, cfg);
    p.priority_met = priority_of(p.score);
    p.justification.candidates = 1;
    p.justification.path_potential_before = path_potential(state, cfg);
    p.justification.checks.push_back(PriorityCheck{6, kQuestions[6], true, ScoredMove{move, p.score}});
    return p;
}

}  // namespace capsicaps::strategist
