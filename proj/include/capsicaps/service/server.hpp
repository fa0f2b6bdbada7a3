#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "json.hpp"

namespace httplib {
class Server;
}

namespace capsicaps::service {

using nlohmann::json;

/// Live sessions behind the HTTP API. Commands on one session are
/// serialized; reads come from the snapshot taken after the last command.
class SessionService {
public:
    struct Reply {
        int status = 200;
        json body;
    };

    /// Levels are read from `<data_dir>/levels`. Logs go to `sessions_dir`
    /// as `<id>.jsonl`; an empty sessions_dir keeps everything in memory.
    SessionService(std::string data_dir, std::string sessions_dir);
    ~SessionService();

    /// Restores every log found in sessions_dir. Returns the count.
    std::size_t load_persisted();

    Reply create(const json& body);
    Reply list() const;
    Reply state(const std::string& id) const;
    Reply proposal(const std::string& id) const;
    Reply log(const std::string& id) const;
    Reply signal(const std::string& id, const json& body);
    Reply propose(const std::string& id, const json& body);
    Reply calculate(const std::string& id);

private:
    struct Entry;
    Entry* find(const std::string& id) const;
    std::string level_path(const json& level_id) const;

    std::string data_dir_;
    std::string sessions_dir_;
    mutable std::shared_mutex map_mutex_;
    std::map<std::string, std::unique_ptr<Entry>> sessions_;
    int next_id_ = 1;
};

/// Registers the routes on `server`.
void mount(httplib::Server& server, SessionService& service);

}  // namespace capsicaps::service
