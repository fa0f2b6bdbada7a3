#include <gtest/gtest.h>

#include <random>

#include "capsicaps/notation/notation.hpp"
#include "capsicaps/rules/kernel.hpp"
#include "capsicaps/strategist/strategist.hpp"
#include "support.hpp"

using namespace capsicaps::rules;
using namespace capsicaps::strategist;
using capsicaps::notation::format_move;
using capsicaps::notation::parse_move;
using testsupport::level9_after;

namespace {

CellCoord P(int xy) { return {xy / 10, xy % 10}; }

// Independent pair scan: every ordered pair of gears one step apart, every
// base pair, all three global shifts, degrees arithmetic instead of Heading.
long pair_scan_oracle(const GameState& s, int w_now, int w_turn, int w_exit) {
    auto deg = [](int origin_q, int b) { return ((origin_q + b) % 4 + 4) % 4 * 90; };
    auto dir_deg = [](CellCoord from, CellCoord to) {
        if (to.y == from.y + 1) return 0;
        if (to.x == from.x - 1) return 90;
        if (to.y == from.y - 1) return 180;
        return 270;
    };
    long total = 0;
    for (const auto& [ca, ga] : s.gears) {
        for (const auto& [cb, gb] : s.gears) {
            if (!(ca < cb) || std::abs(ca.x - cb.x) + std::abs(ca.y - cb.y) != 1) continue;
            const int d = dir_deg(ca, cb);
            int best = 0;
            for (int shift : {0, 1, -1}) {
                for (int qa = 0; qa < 4; ++qa) {
                    for (int qb = 0; qb < 4; ++qb) {
                        const auto oa = ga.occupancy.slots[static_cast<std::size_t>(qa)];
                        const auto ob = gb.occupancy.slots[static_cast<std::size_t>(qb)];
                        if (oa == Slot::Nonexistent || ob == Slot::Nonexistent) continue;
                        if (oa == Slot::Occupied && ob == Slot::Occupied) continue;
                        if (deg(qa, ga.b + shift) != d || deg(qb, gb.b - shift) != (d + 180) % 360) continue;
                        best = std::max(best, shift == 0 ? w_now : w_turn);
                    }
                }
            }
            total += best;
        }
    }
    for (const Mouse& m : s.mice) {
        if (m.status != MouseStatus::InPlay || m.cell.y != s.level->height) continue;
        const int b = s.gears.at(m.cell).b, q = static_cast<int>(m.base);
        if (deg(q, b + 1) == 0 || deg(q, b - 1) == 0) total += w_exit;
    }
    return total;
}

GameState bare(int w, int h, Inventory inv = {}) {
    auto lv = std::make_shared<Level>();
    lv->width = w;
    lv->height = h;
    lv->inventory = inv;
    return GameState::initial(lv);
}

}  // namespace

TEST(Enumerate, EmptyLevel9Board) {
    const auto moves = enumerate_moves(level9_after(0));
    EXPECT_EQ(moves.size(), 128u);  // 4 cells x 4 kinds x 4 b x 2 spins
    for (const Move& m : moves) EXPECT_TRUE(std::holds_alternative<Placement>(m));
}

TEST(Enumerate, J9StateIsForcedToP43) {
    const auto moves = enumerate_moves(level9_after(8));
    // Inventory holds one G1 and one G3, so 2 kinds x 4 b x 2 spins.
    EXPECT_EQ(moves.size(), 16u);
    for (const Move& m : moves) EXPECT_EQ(std::get<Placement>(m).cell, P(43));
}

TEST(Enumerate, FullBoardDeduplicatesNoOpPremoves) {
    const auto s = level9_after(10);
    const auto moves = enumerate_moves(s);
    EXPECT_EQ(moves.size(), 62u);
    // Oracle: all 10 x 4 x 2 pre-moves minus the ones that leave b unchanged, plus 2 rotations.
    std::set<std::tuple<CellCoord, int, int>> distinct;
    for (const auto& [cell, g] : s.gears)
        for (int b = 0; b < 4; ++b)
            for (int sp : {-1, 1})
                if (b != g.b) distinct.insert({cell, b, sp});
    EXPECT_EQ(moves.size(), distinct.size() + 2);
}

TEST(Enumerate, AllLegal) {
    for (int n : {0, 3, 8, 10, 17}) {
        const auto s = level9_after(n);
        for (const Move& m : enumerate_moves(s)) EXPECT_NO_THROW(apply_move(s, m)) << format_move(m);
    }
}

TEST(PathPotential, OneTurnPair) {
    auto s = bare(2, 2);
    s.gears[P(21)] = PlacedGear{GearKind::G1, 3, Occupancy::pristine(GearKind::G1)};  // vector 270
    s.gears[P(22)] = PlacedGear{GearKind::G1, 3, Occupancy::pristine(GearKind::G1)};  // vector 270
    EXPECT_EQ(path_potential(s), 1);
}

TEST(PathPotential, EmptyBoard) { EXPECT_EQ(path_potential(level9_after(0)), 0); }

TEST(PathPotential, MatchesPairScanOracle) {
    const auto log = testsupport::game_log("level9");
    for (int n = 0; n <= 25; ++n) {
        const auto s = level9_after(n);
        EXPECT_EQ(path_potential(s), pair_scan_oracle(s, 2, 1, 1)) << "J" << n;
        StrategyConfig c;
        c.facing_pair_weight = 7;
        c.one_turn_pair_weight = 3;
        c.exit_setup_weight = 5;
        EXPECT_EQ(path_potential(s, c), pair_scan_oracle(s, 7, 3, 5)) << "J" << n;
    }
}

TEST(PathPotential, J12Frozen) {
    // Frozen from the pair-scan oracle.
    const auto s = level9_after(12);
    EXPECT_EQ(path_potential(s), pair_scan_oracle(s, 2, 1, 1));
    EXPECT_EQ(path_potential(s), 15);
}

TEST(Score, J18PremoveOutranksPlainRotation) {
    const auto s = level9_after(17);
    const auto pre = score_move(s, parse_move("G@P43:b=3 ; G@P11+90"));
    const auto plain = score_move(s, parse_move("G@P11+90"));
    EXPECT_EQ(pre.exits, 1);
    EXPECT_EQ(pre.to_final_row, 1);
    EXPECT_GE(pre.advances, 1);
    EXPECT_EQ(plain.exits, 1);
    EXPECT_EQ(plain.to_final_row, 0);
    EXPECT_GT(pre, plain);
}

TEST(Score, EventFreeRotation) {
    const auto s = level9_after(23);
    const auto sc = score_move(s, parse_move("G@P11-90"));
    EXPECT_EQ(sc.exits, 0);
    EXPECT_EQ(sc.to_final_row, 0);
    EXPECT_EQ(sc.advances, 0);
}

TEST(Select, J17ChoosesExitPlusFinalRow) {
    const auto p = select_move(level9_after(17));
    EXPECT_EQ(p.priority_met, 1);
    EXPECT_GE(p.score, score_move(level9_after(17), parse_move("G@P43:b=3 ; G@P11+90")));
    EXPECT_EQ(p.declared_events, apply_move(level9_after(17), p.move).all_events());
    ASSERT_FALSE(p.justification.checks.empty());
    EXPECT_TRUE(p.justification.checks[0].satisfied);
}

TEST(Select, J9ForcedCell) {
    const auto p = select_move(level9_after(8));
    EXPECT_EQ(std::get<Placement>(p.move).cell, P(43));
}

TEST(Select, PriorityOneDominates) {
    // 1x1 board, M1 on a G1 at b=1 (vector 90). -90 brings it to 0 and exits; +90 does not.
    auto s = bare(1, 1);
    Occupancy occ = Occupancy::pristine(GearKind::G1);
    occ.set(Heading::Up, Slot::Occupied);
    s.gears[P(11)] = PlacedGear{GearKind::G1, 1, occ};
    s.mice[0] = Mouse{1, MouseStatus::InPlay, P(11), Heading::Up};
    const auto p = select_move(s);
    EXPECT_EQ(p.move, Move(Rotation{P(11), Spin::Minus}));
    EXPECT_EQ(p.score.exits, 1);
}

TEST(Select, TerminalPosition) {
    auto s = bare(1, 1);
    EXPECT_THROW(select_move(s), TerminalPosition);
}

TEST(Select, TieBreakToggle) {
    StrategyConfig hi;
    hi.tie_break = TieBreak::Highest;
    const auto s = level9_after(0);
    const auto lo_p = select_move(s);
    const auto hi_p = select_move(s, hi);
    EXPECT_EQ(lo_p.score, hi_p.score);
    EXPECT_LE(canonical_key(lo_p.move), canonical_key(hi_p.move));
}

TEST(Select, DegradedPredictorTruncates) {
    StrategyConfig c;
    c.degraded_max_events = 2;
    const auto p = propose_move(level9_after(11), parse_move("G@P11-90"), c);
    EXPECT_EQ(p.declared_events.size(), 2u);
    EXPECT_EQ(propose_move(level9_after(11), parse_move("G@P11-90")).declared_events.size(), 3u);
}

TEST(Config, JsonRoundTrip) {
    StrategyConfig c;
    c.facing_pair_weight = 4;
    c.tie_break = TieBreak::Highest;
    c.degraded_max_events = 2;
    const auto back = StrategyConfig::from_json(c.to_json());
    EXPECT_EQ(back.facing_pair_weight, 4);
    EXPECT_EQ(back.tie_break, TieBreak::Highest);
    EXPECT_EQ(back.degraded_max_events, 2);
    EXPECT_THROW(StrategyConfig::from_json({{"depth", 2}}), std::invalid_argument);
}

TEST(Properties, RandomStatesLegalityAndPhase) {
    std::mt19937 rng(7);
    const auto log = testsupport::game_log("level9");
    for (int trial = 0; trial < 40; ++trial) {
        auto s = GameState::initial(testsupport::level("level9"));
        const int depth = static_cast<int>(rng() % 14);
        for (int i = 0; i < depth; ++i) {
            const auto moves = enumerate_moves(s);
            if (moves.empty()) break;
            s = apply_move(s, moves[rng() % moves.size()]).final_state;
        }
        if (enumerate_moves(s).empty()) continue;
        const auto p = select_move(s);
        const auto moves = enumerate_moves(s);
        EXPECT_NE(std::ranges::find(moves, p.move), moves.end());
        if (s.inventory_total() > 0) EXPECT_TRUE(std::holds_alternative<Placement>(p.move));
        int max_exits = 0;
        for (const Move& m : moves) max_exits = std::max(max_exits, score_move(s, m).exits);
        EXPECT_EQ(p.score.exits, max_exits);
        const auto again = select_move(s);
        EXPECT_EQ(again.move, p.move);
        // Scaling the maneuver weights keeps the winner whenever the leading fields decide.
        StrategyConfig scaled;
        scaled.facing_pair_weight *= 3;
        scaled.one_turn_pair_weight *= 3;
        scaled.exit_setup_weight *= 3;
        const auto q = select_move(s, scaled);
        EXPECT_EQ(std::tie(q.score.exits, q.score.to_final_row, q.score.advances),
                  std::tie(p.score.exits, p.score.to_final_row, p.score.advances));
        EXPECT_EQ(q.move, p.move);
    }
}
