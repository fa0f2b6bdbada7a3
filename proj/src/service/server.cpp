#include "capsicaps/service/server.hpp"

#include <filesystem>
#include <fstream>
#include <regex>

#include <fmt/format.h>
#include <httplib.h>

#include "capsicaps/notation/notation.hpp"
#include "capsicaps/notation/state_text.hpp"
#include "capsicaps/protocol/codec.hpp"
#include "capsicaps/protocol/session.hpp"
#include "capsicaps/service/runner.hpp"

namespace capsicaps::service {

namespace fs = std::filesystem;
using protocol::Phase;
using protocol::Session;
using protocol::Signal;

struct SessionService::Entry {
    std::string id;
    std::mutex command;
    std::unique_ptr<std::ofstream> file;
    std::optional<Session> session;

    mutable std::mutex snap_mutex;
    std::shared_ptr<const json> snapshot;
    std::shared_ptr<const json> log;

    void refresh() {
        const Session& s = *session;
        auto snap = std::make_shared<json>();
        *snap = json::object();
        (*snap)["session_id"] = id;
        (*snap)["level_id"] = s.locked_state().level->id;
        (*snap)["phase"] = protocol::phase_name(s.phase());
        (*snap)["cycle_no"] = s.cycle_no();
        (*snap)["last_checksum"] = s.last_checksum();
        (*snap)["checksum_history"] = s.checksum_history();
        (*snap)["locked_state"] = codec::state_to_json(s.locked_state());
        (*snap)["virtual_board"] = notation::render_virtual_board(s.locked_state());
        (*snap)["open_gate"] = open_gate(s);
        (*snap)["proposal"] = s.pending_proposal() ? codec::proposal_to_json(*s.pending_proposal()) : json(nullptr);
        (*snap)["report"] = s.pending_report() ? codec::report_to_json(*s.pending_report()) : json(nullptr);
        (*snap)["checksum"] = s.pending_checksum() ? json(*s.pending_checksum()) : json(nullptr);
        auto lg = std::make_shared<json>(s.log());
        std::lock_guard lock(snap_mutex);
        snapshot = std::move(snap);
        log = std::move(lg);
    }

    static json open_gate(const Session& s) {
        switch (s.phase()) {
            case Phase::AwaitingStart: return "A";
            case Phase::ProposalPending: return s.pending_proposal() ? json("B") : json(nullptr);
            case Phase::ChecksumPending: return "C";
            case Phase::Locked: return "D";
            default: return nullptr;
        }
    }

    std::shared_ptr<const json> read(bool want_log) const {
        std::lock_guard lock(snap_mutex);
        return want_log ? log : snapshot;
    }
};

namespace {

using Reply = SessionService::Reply;

Reply error(int status, const std::string& msg, json extra = json::object()) {
    extra["error"] = msg;
    return {status, extra};
}

}  // namespace

SessionService::SessionService(std::string data_dir, std::string sessions_dir)
    : data_dir_(std::move(data_dir)), sessions_dir_(std::move(sessions_dir)) {
    if (!sessions_dir_.empty()) fs::create_directories(sessions_dir_);
}

SessionService::~SessionService() = default;

std::size_t SessionService::load_persisted() {
    if (sessions_dir_.empty()) return 0;
    std::size_t n = 0;
    static const std::regex name(R"(s(\d+)\.jsonl)");
    for (const auto& e : fs::directory_iterator(sessions_dir_)) {
        std::smatch m;
        const std::string file = e.path().filename().string();
        if (!std::regex_match(file, m, name)) continue;
        std::ifstream in(e.path());
        auto records = protocol::read_log(in);
        auto entry = std::make_unique<Entry>();
        entry->id = file.substr(0, file.size() - 6);
        entry->file = std::make_unique<std::ofstream>(e.path(), std::ios::app);
        entry->session.emplace(Session::restore(records, {}, entry->file.get()));
        entry->refresh();
        std::unique_lock lock(map_mutex_);
        next_id_ = std::max(next_id_, std::stoi(m[1]) + 1);
        sessions_[entry->id] = std::move(entry);
        ++n;
    }
    return n;
}

std::string SessionService::level_path(const json& level_id) const {
    std::string name;
    if (level_id.is_number_integer()) name = fmt::format("level{}", level_id.get<int>());
    else if (level_id.is_string()) name = level_id.get<std::string>();
    else throw std::invalid_argument("level_id must be a number or a name");
    static const std::regex safe(R"([A-Za-z0-9_-]+)");
    if (!std::regex_match(name, safe)) throw std::invalid_argument("bad level name '" + name + "'");
    return data_dir_ + "/levels/" + name + ".txt";
}

SessionService::Entry* SessionService::find(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second.get();
}

Reply SessionService::create(const json& body) {
    if (!body.contains("level_id")) return error(400, "level_id is required");
    std::shared_ptr<const rules::Level> level;
    protocol::SessionOptions opt;
    try {
        const auto path = level_path(body.at("level_id"));
        if (!fs::exists(path)) return error(404, "no such level");
        level = load_level_file(path);
        if (body.contains("options")) {
            const auto& o = body.at("options");
            opt.legacy_no_avp = o.value("legacy_no_avp", false);
            if (o.contains("strategy")) opt.strategy = strategist::StrategyConfig::from_json(o.at("strategy"));
        }
    } catch (const std::exception& e) {
        return error(400, e.what());
    }
    auto entry = std::make_unique<Entry>();
    {
        std::unique_lock lock(map_mutex_);
        entry->id = fmt::format("s{}", next_id_++);
    }
    if (!sessions_dir_.empty()) {
        entry->file = std::make_unique<std::ofstream>(sessions_dir_ + "/" + entry->id + ".jsonl");
        if (!*entry->file) return error(500, "cannot write session log");
    }
    try {
        entry->session.emplace(level, std::move(opt), entry->file.get());
    } catch (const std::exception& e) {
        return error(400, e.what());
    }
    entry->refresh();
    json out{{"session_id", entry->id},
             {"j0_state", codec::state_to_json(entry->session->locked_state())},
             {"phase", protocol::phase_name(entry->session->phase())},
             {"checksum", entry->session->last_checksum()}};
    std::unique_lock lock(map_mutex_);
    sessions_[entry->id] = std::move(entry);
    return {201, out};
}

Reply SessionService::list() const {
    json ids = json::array();
    std::shared_lock lock(map_mutex_);
    for (const auto& [id, e] : sessions_) ids.push_back(id);
    return {200, {{"sessions", ids}}};
}

Reply SessionService::state(const std::string& id) const {
    const Entry* e = find(id);
    if (!e) return error(404, "no such session");
    return {200, *e->read(false)};
}

Reply SessionService::proposal(const std::string& id) const {
    const Entry* e = find(id);
    if (!e) return error(404, "no such session");
    const auto snap = e->read(false);
    if (snap->at("proposal").is_null()) return error(404, "no proposal pending");
    return {200, snap->at("proposal")};
}

Reply SessionService::log(const std::string& id) const {
    const Entry* e = find(id);
    if (!e) return error(404, "no such session");
    return {200, *e->read(true)};
}

Reply SessionService::signal(const std::string& id, const json& body) {
    Entry* e = find(id);
    if (!e) return error(404, "no such session");
    const auto type = Signal::parse_type(body.value("type", ""));
    if (!type) return error(400, "type must be ok, error or probe");
    std::lock_guard lock(e->command);
    Session& s = *e->session;
    json out;
    try {
        const auto r = s.signal({*type, body.value("text", "")});
        if (r.audit) {
            out["audit"] = r.audit->to_json();
            out["reverted_checksum"] = r.audit->reverted_to;
        }
        if (r.checksum) out["checksum"] = *r.checksum;
        if (*type == Signal::Probe) out["answer"] = r.answer;
        // Gate-B Ok: the internal checkpoint runs before anything else can happen.
        if (s.phase() == Phase::InternalCheckpoint) {
            const auto cp = s.internal_checkpoint();
            if (std::holds_alternative<protocol::CheckpointPassed>(cp)) {
                out["checkpoint"] = {{"result", "passed"}};
            } else if (const auto* psp = std::get_if<protocol::PspRetraction>(&cp)) {
                out["checkpoint"] = {{"result", "retraction"},
                                     {"retracted", codec::proposal_to_json(psp->retracted)},
                                     {"corrected", codec::proposal_to_json(psp->corrected)}};
            } else {
                const auto& a = std::get<protocol::AuditRecord>(cp);
                out["checkpoint"] = {{"result", "fault"}};
                out["audit"] = a.to_json();
                out["reverted_checksum"] = a.reverted_to;
            }
        }
    } catch (const protocol::SignalRejected& ex) {
        return error(409, ex.what(), {{"phase", protocol::phase_name(s.phase())}});
    }
    out["phase"] = protocol::phase_name(s.phase());
    e->refresh();
    return {200, out};
}

Reply SessionService::propose(const std::string& id, const json& body) {
    Entry* e = find(id);
    if (!e) return error(404, "no such session");
    std::lock_guard lock(e->command);
    Session& s = *e->session;
    try {
        const auto& p = body.contains("move") ? s.propose(notation::parse_move(body.at("move").get<std::string>())) : s.propose();
        e->refresh();
        return {200, codec::proposal_to_json(p)};
    } catch (const protocol::ProposalRejected& ex) {
        e->refresh();
        return error(422, ex.what(), {{"rule", rules::rule_name(ex.rule)}});
    } catch (const protocol::PhaseError& ex) {
        return error(409, ex.what(), {{"phase", protocol::phase_name(s.phase())}});
    } catch (const strategist::TerminalPosition& ex) {
        return error(409, ex.what(), {{"stalemate", true}});
    } catch (const notation::ParseError& ex) {
        return error(400, ex.what(), {{"column", ex.column()}});
    }
}

Reply SessionService::calculate(const std::string& id) {
    Entry* e = find(id);
    if (!e) return error(404, "no such session");
    std::lock_guard lock(e->command);
    Session& s = *e->session;
    json out;
    try {
        out["report"] = codec::report_to_json(s.execute_calculation());
    } catch (const protocol::PhaseError& ex) {
        return error(409, ex.what(), {{"phase", protocol::phase_name(s.phase())}});
    } catch (const protocol::AvmHardFault& f) {
        out["hard_fault"] = true;
        out["audit"] = f.record.to_json();
        out["reverted_checksum"] = f.record.reverted_to;
    }
    out["phase"] = protocol::phase_name(s.phase());
    e->refresh();
    return {200, out};
}

void mount(httplib::Server& server, SessionService& service) {
    auto send = [](httplib::Response& res, const Reply& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    auto body_of = [](const httplib::Request& req) {
        return req.body.empty() ? json::object() : json::parse(req.body);
    };
    auto with_body = [=](auto fn) {
        return [=](const httplib::Request& req, httplib::Response& res) {
            json body;
            try {
                body = body_of(req);
            } catch (const json::parse_error& e) {
                send(res, error(400, std::string("malformed JSON: ") + e.what()));
                return;
            }
            send(res, fn(req, body));
        };
    };
    const std::string id = "/sessions/([A-Za-z0-9_-]+)";
    server.Post("/sessions", with_body([&](const httplib::Request&, const json& b) { return service.create(b); }));
    server.Get("/sessions", [&, send](const httplib::Request&, httplib::Response& res) { send(res, service.list()); });
    server.Get(id + "/state", [&, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.state(req.matches[1]));
    });
    server.Get(id + "/proposal", [&, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.proposal(req.matches[1]));
    });
    server.Get(id + "/log", [&, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.log(req.matches[1]));
    });
    server.Post(id + "/signal", with_body([&](const httplib::Request& req, const json& b) { return service.signal(req.matches[1], b); }));
    server.Post(id + "/propose", with_body([&](const httplib::Request& req, const json& b) { return service.propose(req.matches[1], b); }));
    server.Post(id + "/calculate", with_body([&](const httplib::Request& req, const json&) { return service.calculate(req.matches[1]); }));
    server.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            send(res, error(500, e.what()));
        }
    });
}

}  // namespace capsicaps::service
