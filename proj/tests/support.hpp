#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

#include "capsicaps/notation/notation.hpp"
#include "capsicaps/rules/kernel.hpp"

namespace testsupport {

inline std::string data_path(const std::string& rel) { return std::string(CAPSICAPS_DATA_DIR) + "/" + rel; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::shared_ptr<const capsicaps::rules::Level> level(const std::string& name) {
    return std::make_shared<const capsicaps::rules::Level>(
        capsicaps::notation::parse_level(slurp(data_path("levels/" + name + ".txt"))));
}

inline capsicaps::notation::GameLog game_log(const std::string& name) {
    return capsicaps::notation::parse_game_log(slurp(data_path("logs/" + name + ".log")));
}

/// State after the first `n` moves of a recorded game.
inline capsicaps::rules::GameState replay(const std::string& level_name, const std::string& log_name, int n) {
    auto s = capsicaps::rules::GameState::initial(level(level_name));
    const auto log = game_log(log_name);
    for (int i = 0; i < n; ++i) s = capsicaps::rules::apply_move(s, log.moves.at(static_cast<std::size_t>(i)).move).final_state;
    return s;
}

inline capsicaps::rules::GameState level9_after(int n) { return replay("level9", "level9", n); }

}  // namespace testsupport
