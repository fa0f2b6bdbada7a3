#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "capsicaps/rules/errors.hpp"
#include "capsicaps/rules/types.hpp"
#include "capsicaps/strategist/strategist.hpp"

namespace capsicaps::protocol {

using nlohmann::json;
using rules::GameState;
using strategist::Proposal;

enum class Phase {
    AwaitingStart,       // J0 shown, waiting for the Step-A Ok
    ProposalPending,     // gate B: waiting for a proposal, then its Ok
    InternalCheckpoint,  // transient: gate-B Ok received, verification not yet run
    CalculationPending,
    ChecksumPending,     // gate C: report shown
    Locked,              // gate D: checksum shown
    Reverting,           // transient, inside fap_revert
};

const char* phase_name(Phase p);

struct Signal {
    enum Type { Ok, Error, Probe } type = Ok;
    std::string text;

    static std::optional<Type> parse_type(std::string_view s);
};

/// A signal the current phase does not accept.
class SignalRejected : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An operation called out of phase (driver bug, not a supervisor action).
class PhaseError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct AuditRecord {
    int cycle_no = 0;
    Phase at_phase = Phase::ProposalPending;
    std::vector<std::string> annulled;
    std::string rule;  // rule id, or "supervisor-flagged, cause undetermined"
    std::vector<std::string> narrative;
    std::string reverted_to;

    json to_json() const;
};

inline constexpr const char* kCauseUndetermined = "supervisor-flagged, cause undetermined";

struct PspRetraction {
    Proposal retracted;
    Proposal corrected;
};

/// submit_proposal refused the proposal; the phase is unchanged.
struct ProposalRejected : std::runtime_error {
    ProposalRejected(rules::RuleId rule, const std::string& detail);
    rules::RuleId rule;
};

/// Primary and auditor kept disagreeing; the cycle has been reverted.
struct AvmHardFault : std::runtime_error {
    explicit AvmHardFault(AuditRecord r);
    AuditRecord record;
};

struct CheckpointPassed {};
using CheckpointResult = std::variant<CheckpointPassed, PspRetraction, AuditRecord>;

struct SignalOutcome {
    Phase phase = Phase::ProposalPending;
    std::optional<AuditRecord> audit;  // Error signals
    std::optional<std::string> checksum;  // set by the gate-C Ok
    json answer;  // Probe: current justification trace
};

struct SessionOptions {
    strategist::StrategyConfig strategy;
    bool legacy_no_avp = false;  // let illegal proposals through gate B
    int avm_attempts = 3;
    // Test hook applied to the primary evaluator's report on each attempt.
    std::function<void(rules::TurnReport&, int attempt)> primary_fault;
    std::function<std::chrono::system_clock::time_point()> clock = std::chrono::system_clock::now;
};

/// One game driven through the gated cycle. Not thread-safe; callers
/// serialize commands per session.
class Session {
public:
    Session(std::shared_ptr<const rules::Level> level, SessionOptions options = {}, std::ostream* log_sink = nullptr);

    /// Continues a session from its log. The result sits at ProposalPending on
    /// the last committed state.
    static Session restore(const std::vector<json>& records, SessionOptions options = {}, std::ostream* log_sink = nullptr);

    Phase phase() const { return phase_; }
    int cycle_no() const { return locked_.move_number + 1; }
    const GameState& locked_state() const { return locked_; }
    const std::string& locked_text() const { return locked_text_; }
    const std::string& last_checksum() const { return last_checksum_; }
    const std::optional<Proposal>& pending_proposal() const { return proposal_; }
    const std::optional<rules::TurnReport>& pending_report() const { return report_; }
    const std::optional<std::string>& pending_checksum() const { return checksum_; }
    const std::vector<json>& log() const { return log_; }
    std::vector<std::string> checksum_history() const;

    /// Records a proposal for gate B. Throws ProposalRejected on an AVP or
    /// phase violation unless legacy_no_avp is set.
    void submit_proposal(const Proposal& p);
    /// Strategist proposal for the locked state, submitted as above.
    const Proposal& propose();
    /// Supervisor-entered move; declared events come from a full simulation.
    const Proposal& propose(const rules::Move& move);

    SignalOutcome signal(const Signal& s);

    CheckpointResult internal_checkpoint();
    const rules::TurnReport& execute_calculation();

    /// Annuls the cycle and reloads the save point. Called by signal() on Error.
    AuditRecord fap_revert(Phase at_phase);

private:
    void append(json record);
    std::string now_text() const;
    void commit();
    AuditRecord classify(Phase at_phase);
    void reset_cycle();

    std::shared_ptr<const rules::Level> level_;
    SessionOptions options_;
    std::ostream* sink_;
    Phase phase_ = Phase::AwaitingStart;
    GameState locked_;
    std::string locked_text_;
    std::string last_checksum_;
    std::optional<Proposal> proposal_;
    std::optional<rules::TurnReport> report_;
    std::optional<std::string> checksum_;
    json cycle_signals_ = json::array();
    json cycle_times_ = json::object();
    int avm_tries_ = 0;
    std::optional<std::vector<std::string>> avm_failure_;  // diff that forced a hard fault
    std::vector<json> log_;
};

/// State after replaying the moves committed from the save point of cycle
/// `from_cycle` (0 = J0) to the end of the log.
GameState replay_from(const std::vector<json>& records, int from_cycle);

std::vector<json> read_log(std::istream& in);

/// "J0_State-INV2332": save point name before the first checksum.
std::string initial_checksum(const GameState& j0);

}  // namespace capsicaps::protocol
