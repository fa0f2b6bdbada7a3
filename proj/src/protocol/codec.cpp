#include "capsicaps/protocol/codec.hpp"

#include <openssl/evp.h>

#include <stdexcept>

#include <fmt/format.h>

#include "capsicaps/notation/notation.hpp"
#include "capsicaps/notation/state_text.hpp"

namespace capsicaps::codec {

using namespace rules;

namespace {

const char* status_name(MouseStatus s) {
    switch (s) {
        case MouseStatus::Waiting: return "Waiting";
        case MouseStatus::InPlay: return "InPlay";
        case MouseStatus::Victory: return "Victory";
    }
    return "?";
}

Heading heading_of(const json& j) {
    auto h = heading_from_degrees(j.get<int>());
    if (!h) throw std::invalid_argument("base must be 0, 90, 180 or 270");
    return *h;
}

CellCoord cell_of(const json& j) { return notation::parse_cell(j.get<std::string>()); }

}  // namespace

json event_to_json(const TurnEvent& e) {
    return std::visit(
        [](const auto& ev) -> json {
            using T = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<T, EntryEvent>) {
                return {{"type", "entry"}, {"mouse", ev.mouse}, {"cell", to_string(ev.cell)}, {"base", degrees(ev.base)},
                        {"phase", ev.phase == EventPhase::PreRotation ? "pre" : "post"}};
            } else if constexpr (std::is_same_v<T, JumpEvent>) {
                return {{"type", "jump"}, {"mouse", ev.mouse}, {"from", to_string(ev.from)}, {"to", to_string(ev.to)},
                        {"base", degrees(ev.landing_base)}};
            } else {
                return {{"type", "exit"}, {"mouse", ev.mouse}, {"from", to_string(ev.from)}};
            }
        },
        e);
}

TurnEvent event_from_json(const json& j) {
    const auto type = j.at("type").get<std::string>();
    const int mouse = j.at("mouse").get<int>();
    if (type == "entry") {
        const auto phase = j.at("phase").get<std::string>() == "pre" ? EventPhase::PreRotation : EventPhase::PostRotation;
        return EntryEvent{mouse, cell_of(j.at("cell")), heading_of(j.at("base")), phase};
    }
    if (type == "jump") return JumpEvent{mouse, cell_of(j.at("from")), cell_of(j.at("to")), heading_of(j.at("base"))};
    if (type == "exit") return ExitEvent{mouse, cell_of(j.at("from"))};
    throw std::invalid_argument("unknown event type '" + type + "'");
}

json events_to_json(const std::vector<TurnEvent>& events) {
    json a = json::array();
    for (const auto& e : events) a.push_back(event_to_json(e));
    return a;
}

std::vector<TurnEvent> events_from_json(const json& j) {
    std::vector<TurnEvent> out;
    for (const auto& e : j) out.push_back(event_from_json(e));
    return out;
}

json audit_to_json(const MouseAudit& a) {
    json checks = json::array();
    for (const auto& c : a.connection_checks) {
        checks.push_back({{"base", degrees(c.candidate_base)}, {"vector", degrees(c.final_vector)}, {"opposes", c.opposes}});
    }
    json dest;
    if (const auto* c = std::get_if<CellCoord>(&a.destination)) dest = to_string(*c);
    else dest = "off-board " + to_string(std::get<OffBoard>(a.destination).beyond);
    const char* conclusion = a.conclusion == Conclusion::Jumps ? "jumps" : a.conclusion == Conclusion::Exits ? "exits" : "does not jump";
    return {{"mouse", a.mouse},         {"cell", to_string(a.cell)},
            {"base", degrees(a.base)},  {"vector", degrees(a.vector)},
            {"destination", dest},      {"destination_has_gear", a.destination_has_gear},
            {"checks", checks},         {"conclusion", conclusion}};
}

json state_to_json(const GameState& s) {
    json gears = json::array();
    for (const auto& [cell, g] : s.gears) {
        json vectors = json::object();
        for (Heading h : origin_bases(g.kind)) vectors[std::to_string(degrees(h))] = degrees(base_vector(h, g.b));
        gears.push_back({{"cell", to_string(cell)},
                         {"kind", kind_number(g.kind)},
                         {"square", std::string(1, to_char(square_type_of(cell)))},
                         {"b", g.b},
                         {"occupancy", occupancy_code(g.occupancy)},
                         {"vectors", vectors}});
    }
    json mice = json::array();
    for (const Mouse& m : s.mice) {
        json jm{{"id", m.id}, {"status", status_name(m.status)}, {"cell", to_string(m.cell)}};
        jm["base"] = m.status == MouseStatus::InPlay ? json(degrees(m.base)) : json(nullptr);
        mice.push_back(jm);
    }
    json obstacles = json::array();
    for (CellCoord c : s.level->obstacles) obstacles.push_back(to_string(c));
    return {{"level",
             {{"id", s.level->id}, {"width", s.level->width}, {"height", s.level->height}, {"obstacles", obstacles}}},
            {"move_number", s.move_number},
            {"inventory", s.inventory},
            {"gears", gears},
            {"mice", mice},
            {"load_checksum", notation::format_load_checksum(s)},
            {"text", notation::serialize_state(s)}};
}

json report_to_json(const TurnReport& r) {
    json deltas = json::object();
    for (const auto& [cell, d] : r.rotation_deltas) deltas[to_string(cell)] = {d.before, d.after};
    json audits = json::array();
    for (const auto& a : r.audits) audits.push_back(audit_to_json(a));
    json j{{"move", notation::format_move(r.move)},
           {"pre_rotation_entries", events_to_json(r.pre_rotation_entries)},
           {"rotation_deltas", deltas},
           {"audits", audits},
           {"post_events", events_to_json(r.post_events)},
           {"final_state", state_to_json(r.final_state)}};
    if (r.premove_delta) j["premove_delta"] = {r.premove_delta->before, r.premove_delta->after};
    return j;
}

json score_to_json(const strategist::OutcomeScore& s) {
    return {{"exits", s.exits}, {"to_final_row", s.to_final_row}, {"advances", s.advances}, {"maneuver_value", s.maneuver_value}};
}

json proposal_to_json(const strategist::Proposal& p) {
    auto scored = [](const strategist::ScoredMove& m) {
        return json{{"move", notation::format_move(m.move)}, {"score", score_to_json(m.score)}};
    };
    json checks = json::array();
    for (const auto& c : p.justification.checks) {
        checks.push_back({{"priority", c.priority},
                          {"question", c.question},
                          {"satisfied", c.satisfied},
                          {"best", c.best ? scored(*c.best) : json(nullptr)}});
    }
    json alts = json::array();
    for (const auto& a : p.justification.alternatives) alts.push_back(scored(a));
    return {{"move", notation::format_move(p.move)},
            {"declared_events", events_to_json(p.declared_events)},
            {"priority_met", p.priority_met},
            {"score", score_to_json(p.score)},
            {"justification",
             {{"checks", checks},
              {"alternatives", alts},
              {"candidates", p.justification.candidates},
              {"path_potential_before", p.justification.path_potential_before}}}};
}

strategist::Proposal proposal_from_json(const json& j) {
    strategist::Proposal p;
    p.move = notation::parse_move(j.at("move").get<std::string>());
    p.declared_events = events_from_json(j.at("declared_events"));
    if (j.contains("priority_met")) p.priority_met = j.at("priority_met").get<int>();
    return p;
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    std::string hex;
    hex.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

}  // namespace capsicaps::codec
