// capsicaps: verify recorded games, let the strategist play, or serve sessions over HTTP.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <httplib.h>

#include "capsicaps/notation/notation.hpp"
#include "capsicaps/service/runner.hpp"
#include "capsicaps/service/server.hpp"

using namespace capsicaps;

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

int run_verify(const std::string& level_file, const std::string& log_file, const std::string& fixtures_dir, bool as_json) {
    const auto level = service::load_level_file(level_file);
    const auto log = notation::parse_game_log(service::read_file(log_file));
    const auto fixtures = fixtures_dir.empty() ? std::map<int, notation::Fixture>{} : service::load_fixtures(fixtures_dir);
    const auto res = service::verify(level, log, fixtures, std::filesystem::path(log_file).filename().string());
    if (as_json) std::cout << res.to_json().dump(2) << '\n';
    else std::cout << res.report();
    return res.pass() ? 0 : 1;
}

int run_autoplay(const std::string& level_file, const std::string& config_file, int max_moves, const std::string& out_file) {
    const auto level = service::load_level_file(level_file);
    const auto cfg = config_file.empty() ? strategist::StrategyConfig{} : strategist::load_strategy_config(config_file);
    std::ofstream file;
    std::ostream* sink = &std::cout;
    if (!out_file.empty()) {
        file.open(out_file);
        if (!file) throw std::runtime_error("cannot write " + out_file);
        sink = &file;
    }
    const auto res = service::autoplay(level, cfg, max_moves, sink);
    std::cerr << fmt::format("{} moves, {}\n", res.moves_played, res.stop_reason);
    return 0;
}

int run_serve(const std::string& bind, const std::string& data) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--bind", "expected HOST:PORT");
    const std::string host = bind.substr(0, colon);
    const int port = std::stoi(bind.substr(colon + 1));

    service::SessionService sessions(data, data + "/sessions");
    const auto restored = sessions.load_persisted();
    httplib::Server server;
    service::mount(server, sessions);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    if (!server.bind_to_port(host, port)) {
        std::cerr << "cannot bind " << bind << '\n';
        return 2;
    }
    std::cerr << fmt::format("serving on {} ({} sessions restored from {}/sessions)\n", bind, restored, data);
    server.listen_after_bind();
    g_server = nullptr;
    std::cerr << "stopped\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Caps i Caps engine and session service"};
    app.require_subcommand(1);

    std::string level_file, log_file, fixtures_dir, config_file, out_file;
    bool as_json = false;
    int max_moves = 200;
    std::string bind = "127.0.0.1:8080";
    std::string data = service::data_dir();

    auto* verify = app.add_subcommand("verify", "Replay a game log with auto-Ok and compare fixtures");
    verify->add_option("--level", level_file, "Level file")->required()->check(CLI::ExistingFile);
    verify->add_option("--log", log_file, "Game log")->required()->check(CLI::ExistingFile);
    verify->add_option("--fixtures", fixtures_dir, "Directory of J<n>.fixture files")->check(CLI::ExistingDirectory);
    verify->add_flag("--json", as_json, "Print the result as JSON");

    auto* autoplay = app.add_subcommand("autoplay", "Let the strategist play with an auto-Ok supervisor");
    autoplay->add_option("--level", level_file, "Level file")->required()->check(CLI::ExistingFile);
    autoplay->add_option("--config", config_file, "Strategy config (JSON)")->check(CLI::ExistingFile);
    autoplay->add_option("--max-moves", max_moves, "Move limit")->check(CLI::NonNegativeNumber);
    autoplay->add_option("--out", out_file, "Write the session log here instead of stdout");

    auto* serve = app.add_subcommand("serve", "Serve the HTTP session API");
    serve->add_option("--bind", bind, "HOST:PORT")->capture_default_str();
    serve->add_option("--data", data, "Data directory (levels/, sessions/); default from CAPSICAPS_DATA_DIR")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*verify) return run_verify(level_file, log_file, fixtures_dir, as_json);
        if (*autoplay) return run_autoplay(level_file, config_file, max_moves, out_file);
        if (*serve) return run_serve(bind, data);
    } catch (const notation::ParseError& e) {
        std::cerr << fmt::format("parse error (line {}, column {}): {}\n", e.line(), e.column(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
