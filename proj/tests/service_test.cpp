#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <unistd.h>

#include "capsicaps/notation/notation.hpp"
#include "capsicaps/service/runner.hpp"
#include "capsicaps/service/server.hpp"
#include "support.hpp"

using namespace capsicaps;
using namespace capsicaps::service;
using testsupport::data_path;
using testsupport::slurp;

namespace fs = std::filesystem;

namespace {

std::map<int, notation::Fixture> level9_fixtures() { return load_fixtures(data_path("fixtures/level9")); }

fs::path scratch_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / fmt::format("capsicaps-{}-{}", name, ::getpid());
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Verify, Level9GoldenReplay) {
    const auto res = verify(testsupport::level("level9"), testsupport::game_log("level9"), level9_fixtures(), "level9.log");
    EXPECT_TRUE(res.pass()) << res.report();
    EXPECT_EQ(res.legal_count(), 25);
    EXPECT_EQ(res.fixtures.size(), 4u);
    EXPECT_EQ(res.moves[8].checksum, "J9_State-M3@P21-INV0010");
    EXPECT_EQ(res.moves[17].checksum, "J18_State-M4_OUT_M3@P43_M1@P31-INV0000");
    EXPECT_TRUE(res.findings.empty());
    EXPECT_LT(res.elapsed_ms, 1000.0);
}

TEST(Verify, ReportIsDeterministic) {
    const auto a = verify(testsupport::level("level9"), testsupport::game_log("level9"), level9_fixtures(), "x");
    const auto b = verify(testsupport::level("level9"), testsupport::game_log("level9"), level9_fixtures(), "x");
    EXPECT_EQ(a.report(false), b.report(false));
    auto ja = a.to_json(), jb = b.to_json();
    ja.erase("elapsed_ms");
    jb.erase("elapsed_ms");
    EXPECT_EQ(ja, jb);
}

TEST(Verify, Level6ReconstructedMapAllLegal) {
    const auto res = verify(testsupport::level("level6"), testsupport::game_log("level6"), {}, "level6.log");
    EXPECT_TRUE(res.pass()) << res.report();
    EXPECT_EQ(res.legal_count(), 19);
    for (const auto& m : res.final_mice) EXPECT_EQ(m.status, rules::MouseStatus::Victory);
}

TEST(Verify, Level6PublishedMapStopsAtObstacle) {
    const auto res = verify(testsupport::level("level6_published_map"), testsupport::game_log("level6"), {}, "level6.log");
    EXPECT_FALSE(res.pass());
    ASSERT_GE(res.moves.size(), 5u);
    EXPECT_EQ(res.moves[4].kind, MoveStatus::Illegal);
    EXPECT_EQ(res.moves[4].rule, "obstacle-cell");
    EXPECT_EQ(res.moves[5].kind, MoveStatus::NotReplayed);
}

TEST(Verify, OriginalJ9IsIllegal) {
    std::string text = slurp(data_path("logs/level9.log"));
    const std::string good = "J9: G1@P43(b=0)+90";
    ASSERT_NE(text.find(good), std::string::npos);
    text.replace(text.find(good), good.size(), "J9: G1@P33(b=0)+90");
    const auto res = verify(testsupport::level("level9"), notation::parse_game_log(text), {}, "j9.log");
    EXPECT_EQ(res.moves[8].kind, MoveStatus::Illegal);
    EXPECT_EQ(res.moves[8].rule, "AVP-adjacency");
    EXPECT_EQ(res.legal_count(), 8);
}

TEST(Verify, FixtureMismatchIsCellByCell) {
    auto fx = level9_fixtures();
    fx.at(10).tables.gears.at({2, 2}).b ^= 1;
    const auto res = verify(testsupport::level("level9"), testsupport::game_log("level9"), fx, "x");
    EXPECT_FALSE(res.pass());
    EXPECT_EQ(res.moves[9].kind, MoveStatus::FixtureMismatch);
    ASSERT_FALSE(res.moves[9].diff.empty());
    EXPECT_NE(res.moves[9].diff[0].find("P22"), std::string::npos);
    EXPECT_NE(res.report().find("fixture J10: MISMATCH"), std::string::npos);
}

TEST(Autoplay, MicroLevelMinimalVictory) {
    const auto res = autoplay(testsupport::level("micro1x1"), {}, 10);
    EXPECT_TRUE(res.victory);
    // Brute force: no single move wins from J0, so two is minimal.
    auto j0 = rules::GameState::initial(testsupport::level("micro1x1"));
    for (const auto& m : strategist::enumerate_moves(j0)) EXPECT_FALSE(rules::victory_check(rules::apply_move(j0, m).final_state));
    EXPECT_EQ(res.moves_played, 2);
    int cycles = 0;
    for (const auto& r : res.log) cycles += r["record"] == "cycle";
    EXPECT_EQ(cycles, 2);
}

TEST(Autoplay, ZeroMovesEmptyLog) {
    const auto res = autoplay(testsupport::level("level9"), {}, 0);
    EXPECT_TRUE(res.log.empty());
    EXPECT_EQ(res.moves_played, 0);
}

TEST(Autoplay, Level6Terminates) {
    std::ostringstream sink;
    const auto res = autoplay(testsupport::level("level6"), {}, 200, &sink);
    EXPECT_LE(res.moves_played, 200);
    EXPECT_FALSE(res.stop_reason.empty());
    const std::string text = sink.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(res.log.size()));
}

TEST(Autoplay, StalemateReported) {
    auto lv = std::make_shared<rules::Level>();
    lv->width = 2;
    lv->height = 1;
    const auto res = autoplay(lv, {}, 5);
    EXPECT_TRUE(res.stalemate);
    EXPECT_EQ(res.stop_reason.rfind("stalemate", 0), 0u);
}

TEST(Config, DataDirFromEnvironment) {
    ::setenv("CAPSICAPS_DATA_DIR", "/tmp/elsewhere", 1);
    EXPECT_EQ(data_dir(), "/tmp/elsewhere");
    ::unsetenv("CAPSICAPS_DATA_DIR");
    EXPECT_EQ(data_dir("fallback"), "fallback");
}

class Api : public ::testing::Test {
protected:
    void SetUp() override {
        dir = scratch_dir("api");
        service = std::make_unique<SessionService>(CAPSICAPS_DATA_DIR, (dir / "sessions").string());
        mount(server, *service);
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
    }
    void TearDown() override {
        server.stop();
        thread.join();
        fs::remove_all(dir);
    }

    std::pair<int, json> post(const std::string& path, const json& body = json::object()) {
        auto r = client->Post(path, body.dump(), "application/json");
        return {r->status, json::parse(r->body)};
    }
    std::pair<int, json> get(const std::string& path) {
        auto r = client->Get(path);
        return {r->status, json::parse(r->body)};
    }
    std::string create() {
        auto [st, body] = post("/sessions", {{"level_id", 9}});
        EXPECT_EQ(st, 201);
        return body["session_id"];
    }

    fs::path dir;
    httplib::Server server;
    std::unique_ptr<SessionService> service;
    std::unique_ptr<httplib::Client> client;
    std::thread thread;
    int port = 0;
};

TEST_F(Api, CreateEchoesJ0) {
    auto [st, body] = post("/sessions", {{"level_id", 9}});
    EXPECT_EQ(st, 201);
    EXPECT_EQ(body["phase"], "AwaitingStart");
    EXPECT_EQ(body["j0_state"]["mice"].size(), 4u);
    EXPECT_EQ(body["j0_state"]["level"]["obstacles"], json({"P23", "P32"}));
    EXPECT_EQ(post("/sessions", {{"level_id", 99}}).first, 404);
    EXPECT_EQ(post("/sessions", {{"level_id", "../x"}}).first, 400);
    EXPECT_EQ(client->Post("/sessions", "{", "application/json")->status, 400);
}

TEST_F(Api, FullCycleThenErrorMidCycle) {
    const auto id = create();
    const auto base = "/sessions/" + id;
    EXPECT_EQ(post(base + "/signal", {{"type", "ok"}}).second["phase"], "ProposalPending");
    EXPECT_EQ(post(base + "/signal", {{"type", "ok"}}).first, 409);  // nothing proposed yet
    auto [pst, prop] = post(base + "/propose");
    EXPECT_EQ(pst, 200);
    EXPECT_EQ(get(base + "/proposal").second["move"], prop["move"]);
    auto [bst, gate_b] = post(base + "/signal", {{"type", "ok"}});
    EXPECT_EQ(gate_b["checkpoint"]["result"], "passed");
    EXPECT_EQ(gate_b["phase"], "CalculationPending");
    EXPECT_EQ(post(base + "/signal", {{"type", "ok"}}).first, 409);
    auto [cst, calc] = post(base + "/calculate");
    EXPECT_EQ(cst, 200);
    EXPECT_EQ(calc["phase"], "ChecksumPending");
    auto [kst, gate_c] = post(base + "/signal", {{"type", "ok"}});
    const std::string checksum = gate_c["checksum"];
    EXPECT_EQ(checksum.rfind("J1_State-", 0), 0u);
    EXPECT_EQ(post(base + "/signal", {{"type", "ok"}}).second["phase"], "ProposalPending");
    auto [sst, state] = get(base + "/state");
    EXPECT_EQ(state["cycle_no"], 2);
    EXPECT_EQ(state["last_checksum"], checksum);
    EXPECT_EQ(state["locked_state"]["gears"].size(), 1u);
    EXPECT_NE(state["virtual_board"].get<std::string>().find("Row 1"), std::string::npos);

    post(base + "/propose");
    post(base + "/signal", {{"type", "ok"}});
    auto [est, err] = post(base + "/signal", {{"type", "error"}, {"text", "wrong"}});
    EXPECT_EQ(est, 200);
    EXPECT_EQ(err["audit"]["at_phase"], "CalculationPending");
    EXPECT_EQ(err["audit"]["rule"], "supervisor-flagged, cause undetermined");
    EXPECT_EQ(err["reverted_checksum"], checksum);
    auto [lst, log] = get(base + "/log");
    EXPECT_EQ(log.back()["record"], "fap");
    EXPECT_EQ(log.back()["reverted_to"], err["reverted_checksum"]);
    EXPECT_EQ(get(base + "/state").second["locked_state"], state["locked_state"]);
}

TEST_F(Api, ProposalRulesAndProbe) {
    const auto id = create();
    const auto base = "/sessions/" + id;
    post(base + "/signal", {{"type", "ok"}});
    auto [st, body] = post(base + "/propose", {{"move", "G@P11+90"}});
    EXPECT_EQ(st, 422);
    EXPECT_EQ(body["rule"], "phase-violation");
    EXPECT_EQ(post(base + "/propose", {{"move", "G9@P11"}}).first, 400);
    EXPECT_EQ(get(base + "/proposal").first, 404);
    post(base + "/propose", {{"move", "G4@P21(b=2)+90"}});
    auto [pst, probe] = post(base + "/signal", {{"type", "probe"}, {"text", "why?"}});
    EXPECT_EQ(probe["phase"], "ProposalPending");
    EXPECT_EQ(probe["answer"]["move"], "G4@P21(b=2)+90");
    EXPECT_EQ(post(base + "/signal", {{"type", "maybe"}}).first, 400);
    EXPECT_EQ(get("/sessions/nope/state").first, 404);
    EXPECT_EQ(post(base + "/calculate").first, 409);
}

TEST_F(Api, LegacySessionRevertsIllegalProposal) {
    auto [st, body] = post("/sessions", {{"level_id", "micro1x1"}, {"options", {{"legacy_no_avp", true}}}});
    const auto base = "/sessions/" + body["session_id"].get<std::string>();
    post(base + "/signal", {{"type", "ok"}});
    EXPECT_EQ(post(base + "/propose", {{"move", "G1@P12(b=0)+90"}}).first, 200);  // off the 1x1 board
    auto [gst, gate_b] = post(base + "/signal", {{"type", "ok"}});
    EXPECT_EQ(gate_b["checkpoint"]["result"], "fault");
    EXPECT_EQ(gate_b["audit"]["rule"], "out-of-board");
    EXPECT_EQ(gate_b["reverted_checksum"], "J0_State-INV1000");
    EXPECT_EQ(gate_b["phase"], "ProposalPending");
}

TEST_F(Api, ConcurrentSessions) {
    std::vector<std::thread> workers;
    std::atomic<int> ok{0};
    for (int w = 0; w < 4; ++w) {
        workers.emplace_back([&] {
            httplib::Client c("127.0.0.1", port);
            auto call = [&](const std::string& path, const json& b) {
                auto r = c.Post(path, b.dump(), "application/json");
                return std::make_pair(r->status, json::parse(r->body));
            };
            const std::string id = call("/sessions", {{"level_id", 9}}).second["session_id"];
            const auto base = "/sessions/" + id;
            call(base + "/signal", {{"type", "ok"}});
            for (int n = 0; n < 4; ++n) {
                call(base + "/propose", json::object());
                call(base + "/signal", {{"type", "ok"}});
                call(base + "/calculate", json::object());
                call(base + "/signal", {{"type", "ok"}});
                if (call(base + "/signal", {{"type", "ok"}}).second["phase"] == "ProposalPending") ++ok;
            }
        });
    }
    for (auto& t : workers) t.join();
    EXPECT_EQ(ok, 16);
    EXPECT_EQ(get("/sessions").second["sessions"].size(), 4u);
}

TEST(Persistence, RestartContinuesFromLockedState) {
    const auto dir = scratch_dir("persist");
    json locked;
    {
        SessionService svc(CAPSICAPS_DATA_DIR, dir.string());
        const std::string id = svc.create({{"level_id", 9}}).body["session_id"];
        svc.signal(id, {{"type", "ok"}});
        for (int n = 0; n < 3; ++n) {
            svc.propose(id, json::object());
            svc.signal(id, {{"type", "ok"}});
            svc.calculate(id);
            svc.signal(id, {{"type", "ok"}});
            svc.signal(id, {{"type", "ok"}});
        }
        svc.propose(id, json::object());  // pending work is not persisted
        locked = svc.state(id).body["locked_state"];
    }
    SessionService again(CAPSICAPS_DATA_DIR, dir.string());
    EXPECT_EQ(again.load_persisted(), 1u);
    const auto st = again.state("s1").body;
    EXPECT_EQ(st["locked_state"], locked);
    EXPECT_EQ(st["phase"], "ProposalPending");
    EXPECT_EQ(again.propose("s1", json::object()).status, 200);
    EXPECT_EQ(again.create({{"level_id", 9}}).body["session_id"], "s2");
    fs::remove_all(dir);
}
