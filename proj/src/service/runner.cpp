#include "capsicaps/service/runner.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "capsicaps/protocol/session.hpp"
#include "capsicaps/rules/kernel.hpp"

namespace capsicaps::service {

using namespace rules;
using protocol::Session;
using protocol::Signal;

namespace {

const char* status_word(MouseStatus s) {
    switch (s) {
        case MouseStatus::Waiting: return "Waiting";
        case MouseStatus::InPlay: return "InPlay";
        case MouseStatus::Victory: return "Victory";
    }
    return "?";
}

const char* kind_word(MoveStatus::Kind k) {
    switch (k) {
        case MoveStatus::Legal: return "legal";
        case MoveStatus::Illegal: return "illegal";
        case MoveStatus::FixtureMismatch: return "fixture-mismatch";
        case MoveStatus::NotReplayed: return "not-replayed";
    }
    return "?";
}

const Signal kOk{Signal::Ok, ""};

// The protocol reverted the cycle on its own (checkpoint fault).
struct CycleFault : std::runtime_error {
    explicit CycleFault(const protocol::AuditRecord& a) : std::runtime_error(a.rule), rule(a.rule) {}
    std::string rule;
};

// One auto-Ok cycle for a proposal already submitted; returns the checksum.
std::string drive_cycle(Session& s) {
    for (;;) {
        s.signal(kOk);
        const auto r = s.internal_checkpoint();
        if (std::holds_alternative<protocol::CheckpointPassed>(r)) break;
        if (const auto* a = std::get_if<protocol::AuditRecord>(&r)) throw CycleFault(*a);
        // PSP retraction: the corrected proposal is pending again.
    }
    s.execute_calculation();
    const std::string checksum = s.signal(kOk).checksum.value();
    s.signal(kOk);
    return checksum;
}

}  // namespace

bool VerificationResult::pass() const {
    for (const auto& m : moves)
        if (m.kind != MoveStatus::Legal) return false;
    for (const auto& f : fixtures)
        if (!f.match) return false;
    return true;
}

int VerificationResult::legal_count() const {
    int n = 0;
    for (const auto& m : moves) n += m.kind == MoveStatus::Legal || m.kind == MoveStatus::FixtureMismatch;
    return n;
}

std::string VerificationResult::report(bool with_timing) const {
    std::string out = fmt::format("verify {} on level {}\n", log_id.empty() ? "log" : log_id, level_id);
    for (const auto& m : moves) {
        out += fmt::format("J{} {} {}", m.index, m.move, kind_word(m.kind));
        if (!m.rule.empty()) out += fmt::format("({})", m.rule);
        if (!m.checksum.empty()) out += " " + m.checksum;
        out += '\n';
        for (const auto& d : m.diff) out += "  " + d + '\n';
    }
    int matched = 0;
    for (const auto& f : fixtures) {
        matched += f.match;
        out += fmt::format("fixture J{}: {}\n", f.move_number, f.match ? "match" : "MISMATCH");
        for (const auto& d : f.diff) out += "  " + d + '\n';
    }
    std::vector<std::string> mice;
    for (const auto& m : final_mice) {
        mice.push_back(fmt::format("M{} {}{}", m.id, status_word(m.status),
                                   m.status == MouseStatus::InPlay ? " " + to_string(m.cell) : ""));
    }
    out += fmt::format("final mice: {}\n", fmt::join(mice, ", "));
    for (const auto& f : findings) out += "finding: " + f + '\n';
    out += fmt::format("result: {} ({}/{} moves legal, {}/{} fixtures)\n", pass() ? "PASS" : "FAIL", legal_count(),
                       moves.size(), matched, fixtures.size());
    if (with_timing) out += fmt::format("elapsed: {:.1f} ms\n", elapsed_ms);
    return out;
}

json VerificationResult::to_json() const {
    json jm = json::array();
    for (const auto& m : moves) {
        json j{{"index", m.index}, {"move", m.move}, {"status", kind_word(m.kind)}};
        if (!m.rule.empty()) j["rule"] = m.rule;
        if (!m.checksum.empty()) j["checksum"] = m.checksum;
        if (!m.diff.empty()) j["diff"] = m.diff;
        jm.push_back(j);
    }
    json jf = json::array();
    for (const auto& f : fixtures) jf.push_back({{"move_number", f.move_number}, {"match", f.match}, {"diff", f.diff}});
    json mice = json::array();
    for (const auto& m : final_mice) mice.push_back({{"id", m.id}, {"status", status_word(m.status)}, {"cell", to_string(m.cell)}});
    return {{"log_id", log_id}, {"level_id", level_id}, {"moves", jm},       {"fixtures", jf},
            {"final_mice", mice}, {"findings", findings}, {"pass", pass()}, {"elapsed_ms", elapsed_ms}};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::shared_ptr<const Level> load_level_file(const std::string& path) {
    return std::make_shared<const Level>(notation::parse_level(read_file(path)));
}

std::string data_dir(const std::string& fallback) {
    const char* env = std::getenv("CAPSICAPS_DATA_DIR");
    return env && *env ? env : fallback;
}

std::map<int, notation::Fixture> load_fixtures(const std::string& dir) {
    namespace fs = std::filesystem;
    std::map<int, notation::Fixture> out;
    static const std::regex name(R"(J(\d+)\.fixture)");
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::smatch m;
        const std::string file = entry.path().filename().string();
        if (!std::regex_match(file, m, name)) continue;
        auto f = notation::parse_fixture(read_file(entry.path().string()));
        if (f.move_number != std::stoi(m[1])) {
            throw std::runtime_error(fmt::format("{} declares move {}", file, f.move_number));
        }
        out.emplace(f.move_number, std::move(f));
    }
    return out;
}

VerificationResult verify(std::shared_ptr<const Level> level, const notation::GameLog& log,
                          const std::map<int, notation::Fixture>& fixtures, std::string log_id) {
    const auto t0 = std::chrono::steady_clock::now();
    VerificationResult res;
    res.log_id = std::move(log_id);
    res.level_id = level->id;
    Session s(level);
    s.signal(kOk);
    bool halted = false;
    for (const auto& mt : log.moves) {
        MoveStatus st;
        st.index = mt.index.value_or(s.cycle_no());
        st.move = notation::format_move(mt.move);
        if (halted) {
            st.kind = MoveStatus::NotReplayed;
            res.moves.push_back(std::move(st));
            continue;
        }
        try {
            s.propose(mt.move);
            st.checksum = drive_cycle(s);
        } catch (const protocol::ProposalRejected& e) {
            st.kind = MoveStatus::Illegal;
            st.rule = std::string(rule_name(e.rule));
        } catch (const CycleFault& e) {
            st.kind = MoveStatus::Illegal;
            st.rule = e.rule;
        }
        if (st.kind == MoveStatus::Illegal) {
            halted = true;
            res.moves.push_back(std::move(st));
            continue;
        }
        if (auto it = fixtures.find(s.locked_state().move_number); it != fixtures.end()) {
            FixtureComparison fc;
            fc.move_number = it->first;
            fc.diff = notation::compare_fixture(it->second, s.locked_state(), st.checksum);
            fc.match = fc.diff.empty();
            if (!fc.match) {
                st.kind = MoveStatus::FixtureMismatch;
                st.diff = fc.diff;
            }
            res.fixtures.push_back(std::move(fc));
        }
        res.moves.push_back(std::move(st));
    }
    for (const auto& [n, f] : fixtures) {
        if (std::ranges::none_of(res.fixtures, [&](const FixtureComparison& c) { return c.move_number == n; })) {
            res.fixtures.push_back({n, false, {fmt::format("fixture J{} was never reached", n)}});
        }
    }
    res.final_mice = s.locked_state().mice;
    if (!halted && !victory_check(s.locked_state())) {
        int out = 0;
        for (const auto& m : res.final_mice) out += m.status == MouseStatus::Victory;
        res.findings.push_back(fmt::format("log ends with {}/{} mice exited", out, res.final_mice.size()));
    }
    res.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

AutoplayResult autoplay(std::shared_ptr<const Level> level, const strategist::StrategyConfig& cfg, int max_moves,
                        std::ostream* sink) {
    AutoplayResult res;
    level->validate();
    if (max_moves <= 0) {
        res.stop_reason = "max-moves";
        return res;
    }
    protocol::SessionOptions opt;
    opt.strategy = cfg;
    Session s(level, opt, sink);
    s.signal(kOk);
    while (true) {
        if (victory_check(s.locked_state())) {
            res.victory = true;
            res.stop_reason = "victory";
            break;
        }
        if (res.moves_played >= max_moves) {
            res.stop_reason = "max-moves";
            break;
        }
        try {
            s.propose();
        } catch (const strategist::TerminalPosition& e) {
            res.stalemate = true;
            res.stop_reason = std::string("stalemate: ") + e.what();
            break;
        }
        drive_cycle(s);
        ++res.moves_played;
    }
    res.log = s.log();
    return res;
}

}  // namespace capsicaps::service
