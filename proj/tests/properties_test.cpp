#include <gtest/gtest.h>

#include "property_suites.hpp"

// Smaller corpora than the acceptance run, different seeds.

TEST(Properties, RotationGroupLaws) {
    const auto r = properties::rotation_group_laws(300, 11);
    EXPECT_TRUE(r.pass) << r.detail;
    EXPECT_EQ(r.cases, 300);
}

TEST(Properties, RandomMovesKeepInvariantsAndAuditorAgrees) {
    const auto r = properties::random_move_corpus(3000, 12);
    EXPECT_TRUE(r.invariants.pass) << r.invariants.detail;
    EXPECT_TRUE(r.avm.pass) << r.avm.detail;
    EXPECT_EQ(r.avm.cases, 3000);
}

TEST(Properties, FapSessions) {
    const auto r = properties::fap_sessions(30, 13);
    EXPECT_TRUE(r.pass) << r.detail;
    EXPECT_GT(r.cases, 0);
}

TEST(Properties, NotationRoundTrip) {
    const auto r = properties::notation_round_trip(14);
    EXPECT_TRUE(r.pass) << r.detail;
}
