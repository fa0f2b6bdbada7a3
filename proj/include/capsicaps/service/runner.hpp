#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "capsicaps/notation/notation.hpp"
#include "capsicaps/notation/state_text.hpp"
#include "capsicaps/strategist/strategist.hpp"

namespace capsicaps::service {

using nlohmann::json;

struct MoveStatus {
    enum Kind { Legal, Illegal, FixtureMismatch, NotReplayed } kind = Legal;
    int index = 0;
    std::string move;
    std::string rule;      // Illegal
    std::string checksum;  // Legal / FixtureMismatch
    std::vector<std::string> diff;
};

struct FixtureComparison {
    int move_number = 0;
    bool match = false;
    std::vector<std::string> diff;
};

struct VerificationResult {
    std::string log_id;
    int level_id = 0;
    std::vector<MoveStatus> moves;
    std::vector<FixtureComparison> fixtures;
    std::vector<rules::Mouse> final_mice;
    std::vector<std::string> findings;
    double elapsed_ms = 0;

    /// Every move legal and every fixture matched.
    bool pass() const;
    int legal_count() const;
    /// Deterministic text report; timing is the last line when requested.
    std::string report(bool with_timing = true) const;
    json to_json() const;
};

/// Fixture files "J<n>.fixture" in a directory, keyed by move number.
std::map<int, notation::Fixture> load_fixtures(const std::string& dir);

/// Replays the log through the gated cycle with an auto-Ok supervisor.
VerificationResult verify(std::shared_ptr<const rules::Level> level, const notation::GameLog& log,
                          const std::map<int, notation::Fixture>& fixtures, std::string log_id = "");

struct AutoplayResult {
    std::vector<json> log;  // session log records
    int moves_played = 0;
    bool victory = false;
    bool stalemate = false;
    std::string stop_reason;  // "victory", "max-moves", "stalemate: ..."
};

/// Strategist proposes, supervisor auto-Oks, until victory or max_moves.
/// Records are also streamed to `sink` when given.
AutoplayResult autoplay(std::shared_ptr<const rules::Level> level, const strategist::StrategyConfig& cfg, int max_moves,
                        std::ostream* sink = nullptr);

std::shared_ptr<const rules::Level> load_level_file(const std::string& path);
std::string read_file(const std::string& path);

/// Data directory: CAPSICAPS_DATA_DIR if set, else `fallback`.
std::string data_dir(const std::string& fallback = "data");

}  // namespace capsicaps::service
