#include "capsicaps/protocol/session.hpp"

#include <algorithm>
#include <future>
#include <istream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "capsicaps/notation/notation.hpp"
#include "capsicaps/notation/state_text.hpp"
#include "capsicaps/protocol/avm.hpp"
#include "capsicaps/protocol/codec.hpp"
#include "capsicaps/rules/kernel.hpp"

namespace capsicaps::protocol {

using namespace rules;

namespace {

std::vector<TurnEvent> sorted(std::vector<TurnEvent> ev) {
    std::ranges::sort(ev);
    return ev;
}

std::string events_text(const std::vector<TurnEvent>& ev) {
    std::vector<std::string> parts;
    for (const auto& e : ev) parts.push_back(codec::event_to_json(e).dump());
    return parts.empty() ? "none" : fmt::format("{}", fmt::join(parts, ", "));
}

const char* gate_of(Phase p) {
    switch (p) {
        case Phase::AwaitingStart: return "A";
        case Phase::ProposalPending: return "B";
        case Phase::ChecksumPending: return "C";
        case Phase::Locked: return "D";
        default: return nullptr;
    }
}

const char* type_name(Signal::Type t) {
    switch (t) {
        case Signal::Ok: return "ok";
        case Signal::Error: return "error";
        case Signal::Probe: return "probe";
    }
    return "?";
}

}  // namespace

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::AwaitingStart: return "AwaitingStart";
        case Phase::ProposalPending: return "ProposalPending";
        case Phase::InternalCheckpoint: return "InternalCheckpoint";
        case Phase::CalculationPending: return "CalculationPending";
        case Phase::ChecksumPending: return "ChecksumPending";
        case Phase::Locked: return "Locked";
        case Phase::Reverting: return "Reverting";
    }
    return "?";
}

std::optional<Signal::Type> Signal::parse_type(std::string_view s) {
    if (s == "ok") return Ok;
    if (s == "error") return Error;
    if (s == "probe") return Probe;
    return std::nullopt;
}

json AuditRecord::to_json() const {
    return {{"cycle_no", cycle_no}, {"at_phase", phase_name(at_phase)}, {"annulled", annulled},
            {"rule", rule},         {"narrative", narrative},           {"reverted_to", reverted_to}};
}

ProposalRejected::ProposalRejected(RuleId r, const std::string& detail)
    : std::runtime_error(std::string(rule_name(r)) + ": " + detail), rule(r) {}

AvmHardFault::AvmHardFault(AuditRecord r)
    : std::runtime_error(fmt::format("AVM discrepancy persisted at cycle {}", r.cycle_no)), record(std::move(r)) {}

std::string initial_checksum(const GameState& j0) {
    std::string inv;
    for (int n : j0.inventory) inv += std::to_string(n);
    return fmt::format("J{}_State-INV{}", j0.move_number, inv);
}

Session::Session(std::shared_ptr<const Level> level, SessionOptions options, std::ostream* log_sink)
    : level_(std::move(level)), options_(std::move(options)), sink_(log_sink) {
    level_->validate();
    // Built from the level alone, then pinned through the text form like every later save point.
    locked_text_ = notation::serialize_state(GameState::initial(level_));
    locked_ = notation::deserialize_state(locked_text_);
    last_checksum_ = initial_checksum(locked_);
    append({{"record", "session"},
            {"level", notation::format_level(*level_)},
            {"options",
             {{"strategy", options_.strategy.to_json()},
              {"legacy_no_avp", options_.legacy_no_avp},
              {"avm_attempts", options_.avm_attempts}}},
            {"checksum", last_checksum_},
            {"state", locked_text_},
            {"digest", codec::sha256_hex(locked_text_)},
            {"at", now_text()}});
}

Session Session::restore(const std::vector<json>& records, SessionOptions options, std::ostream* log_sink) {
    if (records.empty() || records.front().value("record", "") != "session") {
        throw std::invalid_argument("session log must start with a session record");
    }
    auto level = std::make_shared<const Level>(notation::parse_level(records.front().at("level").get<std::string>()));
    Session s(level, std::move(options), nullptr);
    s.log_ = records;
    for (const json& r : records) {
        if (r.value("record", "") != "cycle" && r.value("record", "") != "session") continue;
        const auto text = r.at("state").get<std::string>();
        if (codec::sha256_hex(text) != r.at("digest").get<std::string>()) {
            throw std::invalid_argument(fmt::format("digest mismatch in the save point of cycle {}", r.value("cycle_no", 0)));
        }
        s.locked_text_ = text;
        s.last_checksum_ = r.at("checksum").get<std::string>();
    }
    s.locked_ = notation::deserialize_state(s.locked_text_);
    s.phase_ = Phase::ProposalPending;
    s.sink_ = log_sink;
    return s;
}

std::vector<std::string> Session::checksum_history() const {
    std::vector<std::string> out;
    for (const json& r : log_)
        if (r.value("record", "") == "cycle" || r.value("record", "") == "session") out.push_back(r.at("checksum").get<std::string>());
    return out;
}

void Session::append(json record) {
    if (sink_) {
        *sink_ << record.dump() << '\n';
        sink_->flush();
    }
    log_.push_back(std::move(record));
}

std::string Session::now_text() const {
    const auto t = std::chrono::system_clock::to_time_t(options_.clock());
    return fmt::format("{:%Y-%m-%dT%H:%M:%S}Z", fmt::gmtime(t));
}

void Session::submit_proposal(const Proposal& p) {
    if (phase_ != Phase::ProposalPending) throw PhaseError(fmt::format("proposal submitted in phase {}", phase_name(phase_)));
    if (!options_.legacy_no_avp) {
        try {
            check_move_legal(locked_, p.move);
        } catch (const IllegalMove& e) {
            append({{"record", "rejection"},
                    {"cycle_no", cycle_no()},
                    {"move", notation::format_move(p.move)},
                    {"rule", rule_name(e.rule())},
                    {"detail", e.what()},
                    {"at", now_text()}});
            throw ProposalRejected(e.rule(), e.what());
        }
    }
    proposal_ = p;
    cycle_times_["proposal"] = now_text();
}

const Proposal& Session::propose() {
    submit_proposal(strategist::select_move(locked_, options_.strategy));
    return *proposal_;
}

const Proposal& Session::propose(const Move& move) {
    Proposal p;
    try {
        p = strategist::propose_move(locked_, move, options_.strategy);
    } catch (const IllegalMove&) {
        p = Proposal{};  // nothing to simulate; submit_proposal decides whether it may stand
        p.move = move;
    }
    submit_proposal(p);
    return *proposal_;
}

SignalOutcome Session::signal(const Signal& s) {
    const Phase at = phase_;
    if (s.type == Signal::Ok) {
        const bool open = at == Phase::AwaitingStart || (at == Phase::ProposalPending && proposal_) ||
                          at == Phase::ChecksumPending || at == Phase::Locked;
        if (!open) throw SignalRejected(fmt::format("no gate is open in phase {}", phase_name(at)));
    }
    json rec{{"type", type_name(s.type)}, {"phase", phase_name(at)}, {"at", now_text()}};
    if (const char* g = gate_of(at); g && s.type == Signal::Ok) rec["gate"] = g;
    if (!s.text.empty()) rec["text"] = s.text;
    cycle_signals_.push_back(rec);

    SignalOutcome out;
    switch (s.type) {
        case Signal::Probe: {
            out.answer = proposal_ ? codec::proposal_to_json(*proposal_) : json(nullptr);
            append({{"record", "probe"},
                    {"cycle_no", cycle_no()},
                    {"phase", phase_name(at)},
                    {"text", s.text},
                    {"answer", out.answer},
                    {"at", now_text()}});
            break;
        }
        case Signal::Error: out.audit = fap_revert(at); break;
        case Signal::Ok:
            if (at == Phase::AwaitingStart) {
                phase_ = Phase::ProposalPending;
            } else if (at == Phase::ProposalPending) {
                phase_ = Phase::InternalCheckpoint;
            } else if (at == Phase::ChecksumPending) {
                const auto events = report_->all_events();
                checksum_ = notation::format_checksum(report_->final_state.move_number, events, report_->final_state.inventory);
                cycle_times_["checksum"] = now_text();
                out.checksum = checksum_;
                phase_ = Phase::Locked;
            } else {
                commit();
            }
            break;
    }
    out.phase = phase_;
    return out;
}

CheckpointResult Session::internal_checkpoint() {
    if (phase_ != Phase::InternalCheckpoint) throw PhaseError(fmt::format("checkpoint run in phase {}", phase_name(phase_)));
    std::vector<TurnEvent> verified;
    try {
        verified = avm::evaluate(locked_, proposal_->move).events;
    } catch (const std::runtime_error&) {
        // Only reachable when the AVP filter is off; the proposal cannot stand.
        return fap_revert(Phase::InternalCheckpoint);
    }
    if (sorted(verified) == sorted(proposal_->declared_events)) {
        phase_ = Phase::CalculationPending;
        cycle_times_["checkpoint"] = now_text();
        return CheckpointPassed{};
    }
    PspRetraction r{*proposal_, *proposal_};
    r.corrected.declared_events = verified;
    append({{"record", "psp"},
            {"cycle_no", cycle_no()},
            {"retracted", codec::proposal_to_json(r.retracted)},
            {"corrected", codec::proposal_to_json(r.corrected)},
            {"declared", codec::events_to_json(r.retracted.declared_events)},
            {"verified", codec::events_to_json(verified)},
            {"at", now_text()}});
    // The gate-B Ok approved the retracted proposal; it no longer counts.
    for (auto& sig : cycle_signals_)
        if (sig.value("gate", "") == "B") sig["voided"] = true;
    proposal_ = r.corrected;
    phase_ = Phase::ProposalPending;
    return r;
}

const TurnReport& Session::execute_calculation() {
    if (phase_ != Phase::CalculationPending) throw PhaseError(fmt::format("calculation run in phase {}", phase_name(phase_)));
    const Move move = proposal_->move;
    std::vector<std::string> diffs;
    json discrepancies = json::array();
    for (int attempt = 1; attempt <= options_.avm_attempts; ++attempt) {
        avm_tries_ = attempt;
        auto primary = std::async(std::launch::async, [this, &move] { return apply_move(locked_, move); });
        const avm::Result mine = avm::evaluate(locked_, move);
        TurnReport report = primary.get();
        if (options_.primary_fault) options_.primary_fault(report, attempt);
        diffs = avm::compare(mine, report);
        if (diffs.empty()) {
            report_ = std::move(report);
            cycle_times_["calculation"] = now_text();
            if (!discrepancies.empty()) cycle_times_["avm_discrepancies"] = discrepancies;
            phase_ = Phase::ChecksumPending;
            return *report_;
        }
        discrepancies.push_back({{"attempt", attempt}, {"diff", diffs}});
    }
    avm_failure_ = {fmt::format("primary and auditor disagreed on {} attempts", options_.avm_attempts)};
    avm_failure_->insert(avm_failure_->end(), diffs.begin(), diffs.end());
    AuditRecord rec = fap_revert(Phase::CalculationPending);
    throw AvmHardFault(rec);
}

AuditRecord Session::classify(Phase at_phase) {
    AuditRecord rec;
    rec.cycle_no = cycle_no();
    rec.at_phase = at_phase;
    rec.reverted_to = last_checksum_;
    if (proposal_) rec.annulled.push_back("proposal " + notation::format_move(proposal_->move));
    if (report_) rec.annulled.push_back("turn report");
    if (checksum_) rec.annulled.push_back("checksum " + *checksum_);

    if (!proposal_) {
        rec.rule = kCauseUndetermined;
        rec.narrative.push_back("no proposal was pending; nothing to audit");
        return rec;
    }
    if (avm_failure_) {
        rec.rule = "AVM-discrepancy";
        rec.narrative = *avm_failure_;
        return rec;
    }
    const Move& move = proposal_->move;
    try {
        check_move_legal(locked_, move);
    } catch (const IllegalMove& e) {
        rec.rule = std::string(rule_name(e.rule()));
        rec.narrative.push_back(fmt::format("{} violates {}", notation::format_move(move), e.what()));
        return rec;
    }
    avm::Result mine;
    try {
        apply_move(locked_, move);
        mine = avm::evaluate(locked_, move);
    } catch (const IllegalMove& e) {
        rec.rule = std::string(rule_name(e.rule()));
        rec.narrative.push_back(e.what());
        return rec;
    } catch (const std::runtime_error& e) {
        rec.rule = "AVM-discrepancy";
        rec.narrative.push_back(e.what());
        return rec;
    }
    if (report_) {
        if (auto rcp = avm::cross_consistency(report_->final_state); !rcp.empty()) {
            rec.rule = "RCP-inconsistency";
            rec.narrative = std::move(rcp);
            return rec;
        }
        if (auto diff = avm::compare(mine, *report_); !diff.empty()) {
            rec.rule = "AVM-discrepancy";
            rec.narrative = std::move(diff);
            return rec;
        }
    }
    if (sorted(mine.events) != sorted(proposal_->declared_events)) {
        rec.rule = "PSP-declared-mismatch";
        rec.narrative.push_back("declared: " + events_text(proposal_->declared_events));
        rec.narrative.push_back("verified: " + events_text(mine.events));
        return rec;
    }
    if (checksum_ && report_) {
        const auto expect = notation::format_checksum(report_->final_state.move_number, report_->all_events(),
                                                      report_->final_state.inventory);
        if (expect != *checksum_) {
            rec.rule = "checksum-mismatch";
            rec.narrative.push_back(fmt::format("emitted {}, recomputed {}", *checksum_, expect));
            return rec;
        }
    }
    rec.rule = kCauseUndetermined;
    rec.narrative.push_back("AVP, PSP, AVM and RCP checks all pass on the annulled artifacts");
    return rec;
}

AuditRecord Session::fap_revert(Phase at_phase) {
    phase_ = Phase::Reverting;
    AuditRecord rec = classify(at_phase);
    locked_ = notation::deserialize_state(locked_text_);
    json j = rec.to_json();
    j["record"] = "fap";
    j["state_digest"] = codec::sha256_hex(notation::serialize_state(locked_));
    j["signals"] = cycle_signals_;
    j["at"] = now_text();
    append(std::move(j));
    reset_cycle();
    phase_ = at_phase == Phase::AwaitingStart ? Phase::AwaitingStart : Phase::ProposalPending;
    return rec;
}

void Session::reset_cycle() {
    proposal_.reset();
    report_.reset();
    checksum_.reset();
    cycle_signals_ = json::array();
    cycle_times_ = json::object();
    avm_tries_ = 0;
    avm_failure_.reset();
}

void Session::commit() {
    const std::string loaded_from = last_checksum_;
    const std::string load_checksum = notation::format_load_checksum(locked_);
    std::string text = notation::serialize_state(report_->final_state);
    locked_ = notation::deserialize_state(text);
    locked_text_ = std::move(text);
    last_checksum_ = *checksum_;
    cycle_times_["commit"] = now_text();
    append({{"record", "cycle"},
            {"cycle_no", locked_.move_number},
            {"proposal", codec::proposal_to_json(*proposal_)},
            {"signals", cycle_signals_},
            {"report", codec::report_to_json(*report_)},
            {"avm_attempts", avm_tries_},
            {"checksum", last_checksum_},
            {"loaded_from", loaded_from},
            {"load_checksum", load_checksum},
            {"state", locked_text_},
            {"digest", codec::sha256_hex(locked_text_)},
            {"timestamps", cycle_times_}});
    reset_cycle();
    phase_ = Phase::ProposalPending;
}

GameState replay_from(const std::vector<json>& records, int from_cycle) {
    std::optional<GameState> state;
    for (const json& r : records) {
        const auto kind = r.value("record", "");
        if (kind == "session" && from_cycle == 0) state = notation::deserialize_state(r.at("state").get<std::string>());
        if (kind != "cycle") continue;
        const int n = r.at("cycle_no").get<int>();
        if (n == from_cycle) state = notation::deserialize_state(r.at("state").get<std::string>());
        if (n > from_cycle) {
            if (!state) throw std::invalid_argument(fmt::format("no save point for cycle {}", from_cycle));
            state = apply_move(*state, notation::parse_move(r.at("proposal").at("move").get<std::string>())).final_state;
        }
    }
    if (!state) throw std::invalid_argument(fmt::format("no save point for cycle {}", from_cycle));
    return *state;
}

std::vector<json> read_log(std::istream& in) {
    std::vector<json> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(json::parse(line));
    }
    return out;
}

}  // namespace capsicaps::protocol
