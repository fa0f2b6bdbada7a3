#include <gtest/gtest.h>

#include "capsicaps/notation/notation.hpp"
#include "capsicaps/notation/state_text.hpp"
#include "capsicaps/rules/kernel.hpp"
#include "support.hpp"

using namespace capsicaps::rules;
using capsicaps::notation::format_load_checksum;
using capsicaps::notation::parse_move;
using testsupport::level9_after;

namespace {

CellCoord P(int xy) { return {xy / 10, xy % 10}; }

GameState bare(int w, int h, Inventory inv = {}) {
    auto lv = std::make_shared<Level>();
    lv->width = w;
    lv->height = h;
    lv->inventory = inv;
    return GameState::initial(lv);
}

void put(GameState& s, int xy, GearKind k, int b) { s.gears[P(xy)] = PlacedGear{k, b, Occupancy::pristine(k)}; }

template <class T>
std::vector<T> only(const std::vector<TurnEvent>& events) {
    std::vector<T> out;
    for (const auto& e : events)
        if (const auto* p = std::get_if<T>(&e)) out.push_back(*p);
    return out;
}

}  // namespace

TEST(Topology, SquareType) {
    const auto s = level9_after(0);
    EXPECT_EQ(square_type(P(11), *s.level), SquareType::R);
    EXPECT_EQ(square_type(P(21), *s.level), SquareType::L);
    EXPECT_EQ(square_type(P(43), *s.level), SquareType::L);
    EXPECT_THROW(square_type(P(51), *s.level), DomainError);
    EXPECT_THROW(square_type(P(10), *s.level), DomainError);
}

TEST(Topology, BaseVector) {
    EXPECT_EQ(base_vector(Heading::Up, 3), Heading::Right);
    EXPECT_EQ(base_vector(Heading::Down, 0), Heading::Down);
    EXPECT_EQ(base_vector(Heading::Right, 1), Heading::Up);
}

TEST(Topology, VectorToDestination) {
    const auto s = level9_after(0);
    EXPECT_EQ(vector_to_destination(P(22), Heading::Left, *s.level), Destination{P(12)});
    EXPECT_EQ(vector_to_destination(P(21), Heading::Right, *s.level), Destination{P(31)});
    EXPECT_EQ(vector_to_destination(P(31), Heading::Down, *s.level), (Destination{OffBoard{P(30), Heading::Down}}));
    EXPECT_EQ(vector_to_destination(P(43), Heading::Up, *s.level), (Destination{OffBoard{P(44), Heading::Up}}));
}

TEST(Placement, EmptyBoardIsRowOne) {
    const auto s = level9_after(0);
    EXPECT_EQ(legal_placements(s), (std::set<CellCoord>{P(11), P(21), P(31), P(41)}));
}

TEST(Placement, J9StateForcesP43) {
    const auto s = level9_after(8);
    EXPECT_EQ(legal_placements(s), std::set<CellCoord>{P(43)});
    EXPECT_EQ(format_load_checksum(s), "Load_b:P11=0;P12=2;P13=1;P21=0;P22=2;P31=3;P41=3;P42=3");
    EXPECT_EQ(s.inventory, (Inventory{1, 0, 1, 0}));
}

TEST(Placement, FullBoardHasNoCells) { EXPECT_TRUE(legal_placements(level9_after(10)).empty()); }

TEST(Placement, ObstaclesExcluded) {
    auto s = level9_after(0);
    put(s, 22, GearKind::G4, 0);
    const auto cells = legal_placements(s);
    EXPECT_FALSE(cells.contains(P(23)));
    EXPECT_FALSE(cells.contains(P(32)));
    EXPECT_EQ(cells, (std::set<CellCoord>{P(12), P(21)}));
}

TEST(Connectivity, Examples) {
    EXPECT_TRUE(std::holds_alternative<Connected>(connectivity_check(level9_after(11))));
    auto s = bare(4, 3);
    EXPECT_TRUE(std::holds_alternative<Connected>(connectivity_check(s)));
    put(s, 11, GearKind::G1, 0);
    EXPECT_TRUE(std::holds_alternative<Connected>(connectivity_check(s)));
    put(s, 31, GearKind::G1, 0);
    const auto r = connectivity_check(s);
    ASSERT_TRUE(std::holds_alternative<Disconnected>(r));
    EXPECT_EQ(std::get<Disconnected>(r).components, 2);
}

TEST(Cascade, J9Listing) {
    auto s = level9_after(8);
    put(s, 43, GearKind::G1, 0);
    const auto b = rotation_cascade(s, P(43), Spin::Plus);
    const std::map<CellCoord, int> expected{{P(12), 3}, {P(21), 1}, {P(41), 0}, {P(43), 1}, {P(11), 3},
                                            {P(13), 0}, {P(22), 1}, {P(31), 2}, {P(42), 2}};
    EXPECT_EQ(b, expected);
}

TEST(Cascade, EmptyCellIsIllegal) {
    const auto s = level9_after(8);
    try {
        rotation_cascade(s, P(33), Spin::Plus);
        FAIL() << "expected IllegalMove";
    } catch (const IllegalMove& e) {
        EXPECT_EQ(e.rule(), RuleId::EmptyCellRotation);
    }
}

TEST(Cascade, OppositeTypeWithOppositeSpinIsEquivalent) {
    const auto s = level9_after(10);
    EXPECT_EQ(rotation_cascade(s, P(11), Spin::Plus), rotation_cascade(s, P(21), Spin::Minus));
    EXPECT_EQ(rotation_cascade(s, P(11), Spin::Plus), rotation_cascade(s, P(33), Spin::Plus));
}

TEST(Jumps, J12TripleJump) {
    auto s = level9_after(11);
    EXPECT_EQ(format_load_checksum(s), "Load_b:P11=3;P12=3;P13=0;P21=0;P22=1;P31=2;P33=0;P41=0;P42=2;P43=1");
    for (const auto& [cell, b] : rotation_cascade(s, P(11), Spin::Minus)) s.gears.at(cell).b = b;
    const JumpAnalysis ja = jump_analysis(s);
    const auto jumps = only<JumpEvent>(ja.events);
    ASSERT_EQ(ja.events.size(), 3u);
    EXPECT_EQ(jumps[0], (JumpEvent{1, P(21), P(31), Heading::Up}));
    EXPECT_EQ(jumps[1], (JumpEvent{2, P(22), P(12), Heading::Right}));
    EXPECT_EQ(jumps[2], (JumpEvent{3, P(31), P(41), Heading::Up}));
    ASSERT_EQ(ja.audits.size(), 4u);
    EXPECT_EQ(ja.audits[3].mouse, 4);
    EXPECT_EQ(ja.audits[3].conclusion, Conclusion::DoesNotJump);
}

TEST(Jumps, J9AuditDetail) {
    const auto r = apply_move(level9_after(8), parse_move("G1@P43(b=0)+90"));
    ASSERT_EQ(r.audits.size(), 4u);
    const MouseAudit& m3 = r.audits[2];
    EXPECT_EQ(m3.cell, P(22));
    EXPECT_EQ(m3.vector, Heading::Down);
    EXPECT_EQ(m3.destination, Destination{P(21)});
    // Empty bases 90° and 270° on G4P21L1; only 270° faces.
    ASSERT_EQ(m3.connection_checks.size(), 2u);
    EXPECT_EQ(m3.connection_checks[0], (ConnectionCheck{Heading::Left, Heading::Down, false}));
    EXPECT_EQ(m3.connection_checks[1], (ConnectionCheck{Heading::Right, Heading::Up, true}));
    EXPECT_EQ(m3.conclusion, Conclusion::Jumps);
    const MouseAudit& m4 = r.audits[3];
    EXPECT_EQ(m4.destination, (Destination{OffBoard{P(30), Heading::Down}}));
    EXPECT_EQ(m4.conclusion, Conclusion::DoesNotJump);
}

TEST(Jumps, NoGearsNoEvents) {
    auto s = bare(2, 1);
    EXPECT_TRUE(jump_analysis(s).events.empty());
    put(s, 11, GearKind::G1, 0);  // base points up, not down
    EXPECT_TRUE(jump_analysis(s).events.empty());
}

TEST(Jumps, PostRotationEntryOnRowOneGear) {
    auto s = bare(1, 1);
    put(s, 11, GearKind::G3, 0);
    const auto ja = jump_analysis(s);
    ASSERT_EQ(ja.events.size(), 1u);
    EXPECT_EQ(ja.events[0], TurnEvent(EntryEvent{1, P(11), Heading::Down, EventPhase::PostRotation}));
}

TEST(Jumps, OrderIndependent) {
    auto s = level9_after(11);
    for (const auto& [cell, b] : rotation_cascade(s, P(11), Spin::Minus)) s.gears.at(cell).b = b;
    const std::vector<int> forward{1, 2, 3, 4}, backward{4, 3, 2, 1}, mixed{3, 1, 4, 2};
    const auto a = jump_analysis(s, forward);
    EXPECT_EQ(a.events, jump_analysis(s, backward).events);
    EXPECT_EQ(a.events, jump_analysis(s, mixed).events);
    EXPECT_EQ(a.audits, jump_analysis(s, mixed).audits);
}

TEST(Jumps, SameBaseConflictIsAnError) {
    auto s = bare(2, 1);
    put(s, 11, GearKind::G1, 0);
    const std::vector<TurnEvent> clash{EntryEvent{1, P(11), Heading::Up, EventPhase::PostRotation},
                                       EntryEvent{2, P(11), Heading::Up, EventPhase::PostRotation}};
    try {
        apply_events(s, clash);
        FAIL() << "expected IllegalMove";
    } catch (const IllegalMove& e) {
        EXPECT_EQ(e.rule(), RuleId::JumpConflict);
    }
}

TEST(Turn, J10DoubleJump) {
    const auto before = level9_after(9);
    const auto r = apply_move(before, parse_move("G3@P33(b=0)+90"));
    const auto jumps = only<JumpEvent>(r.post_events);
    ASSERT_EQ(jumps.size(), 2u);
    EXPECT_EQ(jumps[0], (JumpEvent{3, P(21), P(31), Heading::Down}));
    EXPECT_EQ(jumps[1], (JumpEvent{4, P(31), P(41), Heading::Down}));
    EXPECT_EQ(r.final_state.gears.at(P(33)).b, 1);
    EXPECT_EQ(r.final_state.inventory, (Inventory{0, 0, 0, 0}));
    EXPECT_EQ(before, level9_after(9)) << "input state mutated";
}

TEST(Turn, J18ExitAndJumps) {
    const auto r = apply_move(level9_after(17), parse_move("G@P43:b=3 ; G@P11+90"));
    ASSERT_EQ(r.post_events.size(), 3u);
    EXPECT_EQ(r.post_events[0], TurnEvent(ExitEvent{4, P(33)}));
    EXPECT_EQ(r.post_events[1], TurnEvent(JumpEvent{1, P(41), P(31), Heading::Up}));
    EXPECT_EQ(r.post_events[2], TurnEvent(JumpEvent{3, P(42), P(43), Heading::Up}));
    ASSERT_TRUE(r.premove_delta);
    EXPECT_EQ(r.premove_delta->after, 3);
    EXPECT_EQ(r.final_state.mouse(4).status, MouseStatus::Victory);
    EXPECT_EQ(r.final_state.mouse(4).cell, P(34));
    EXPECT_FALSE(victory_check(r.final_state));
}

TEST(Turn, J9OriginalProposalViolatesAvp) {
    try {
        apply_move(level9_after(8), parse_move("G1@P33(b=0)+90"));
        FAIL() << "expected IllegalMove";
    } catch (const IllegalMove& e) {
        EXPECT_EQ(e.rule(), RuleId::AvpAdjacency);
        EXPECT_EQ(rule_name(e.rule()), "AVP-adjacency");
    }
}

TEST(Turn, PhaseRules) {
    auto expect_rule = [](const GameState& s, const Move& m, RuleId id) {
        try {
            apply_move(s, m);
            ADD_FAILURE() << "expected " << rule_name(id);
        } catch (const IllegalMove& e) {
            EXPECT_EQ(e.rule(), id) << e.what();
        }
    };
    const auto j0 = level9_after(0);
    expect_rule(j0, parse_move("G@P11+90"), RuleId::PhaseViolation);
    expect_rule(j0, parse_move("G1@P12(b=0)+90"), RuleId::FirstGearRow);
    expect_rule(level9_after(10), parse_move("G1@P43(b=0)+90"), RuleId::PhaseViolation);
    expect_rule(level9_after(10), parse_move("G@P32+90"), RuleId::EmptyCellRotation);
    expect_rule(level9_after(8), parse_move("G2@P43(b=0)+90"), RuleId::InventoryUnderflow);
    expect_rule(level9_after(8), parse_move("G1@P21(b=0)+90"), RuleId::CellOccupied);
    expect_rule(level9_after(5), parse_move("G1@P32(b=0)+90"), RuleId::ObstacleCell);
    expect_rule(level9_after(5), parse_move("G1@P51(b=0)+90"), RuleId::OutOfBoard);
}

TEST(Turn, CaseBEntersBeforeRotation) {
    const auto r = apply_move(bare(1, 1, {0, 0, 0, 1}), parse_move("G4@P11(b=2)+90"));
    ASSERT_EQ(r.pre_rotation_entries.size(), 1u);
    EXPECT_EQ(r.pre_rotation_entries[0], TurnEvent(EntryEvent{1, P(11), Heading::Up, EventPhase::PreRotation}));
    EXPECT_EQ(r.final_state.gears.at(P(11)).b, 3);
    EXPECT_EQ(r.final_state.mouse(1).base, Heading::Up);
}

TEST(Turn, CaseAGeneralEntryRule) {
    // The 270° base of a G3 at b=3 points down, so M1 boards before the rotation.
    const auto r = apply_move(bare(1, 1, {0, 0, 1, 0}), parse_move("G3@P11(b=3)+90"));
    ASSERT_EQ(r.pre_rotation_entries.size(), 1u);
    EXPECT_EQ(std::get<EntryEvent>(r.pre_rotation_entries[0]).base, Heading::Right);
    EXPECT_EQ(r.final_state.mouse(1).cell, P(11));
}

TEST(Turn, Level9RecordedGameWins) {
    const auto s = level9_after(25);
    EXPECT_TRUE(victory_check(s));
    check_invariants(s);
}

TEST(Victory, Examples) {
    EXPECT_FALSE(victory_check(level9_after(0)));
    EXPECT_FALSE(victory_check(level9_after(18)));
}
