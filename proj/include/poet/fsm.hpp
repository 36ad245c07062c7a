#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "poet/types.hpp"

namespace poet {

using Json = nlohmann::ordered_json;

struct Transition {
    std::string from;
    std::string event;
    std::string to;
    /// Observed in real traffic rather than documented behavior.
    bool empirical{false};
    bool operator==(const Transition&) const = default;
};

/// Applies from every state unless a specific edge for the same event exists there.
struct WildcardTransition {
    std::string event;
    std::string to;
    bool empirical{false};
    bool operator==(const WildcardTransition&) const = default;
};

class UnknownEvent : public std::invalid_argument {
public:
    UnknownEvent(const std::string& machine, const std::string& event)
        : std::invalid_argument("event '" + event + "' is not in the alphabet of " + machine), event_(event) {}
    const std::string& event() const { return event_; }

private:
    std::string event_;
};

/// Immutable transition table. Construction never fails; use validate_definition for checks.
class FsmDefinition {
public:
    FsmDefinition(std::string name, std::vector<std::string> states, std::string initial_state,
                  std::vector<Transition> transitions, std::vector<WildcardTransition> wildcards = {},
                  std::vector<std::string> extra_events = {});

    const std::string& name() const { return name_; }
    const std::vector<std::string>& states() const { return states_; }
    const std::string& initial_state() const { return initial_; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    const std::vector<WildcardTransition>& wildcards() const { return wildcards_; }
    /// Edge events in first-declared order, then the edge-less extras.
    const std::vector<std::string>& alphabet() const { return alphabet_; }

    bool has_state(const std::string& s) const { return state_set_.count(s) != 0; }
    bool has_event(const std::string& e) const { return event_set_.count(e) != 0; }

    /// Target state of (state, event), or nullptr when no edge applies.
    const std::string* target(const std::string& state, const std::string& event) const;
    bool is_empirical(const std::string& state, const std::string& event) const;

private:
    std::string name_;
    std::vector<std::string> states_;
    std::string initial_;
    std::vector<Transition> transitions_;
    std::vector<WildcardTransition> wildcards_;
    std::vector<std::string> alphabet_;
    std::set<std::string> state_set_;
    std::set<std::string> event_set_;
    std::map<std::pair<std::string, std::string>, std::size_t> edges_;
    std::map<std::string, std::size_t> wildcard_index_;
};

using FsmDefinitionPtr = std::shared_ptr<const FsmDefinition>;

enum class Verdict { Accepted, Rejected };
std::string_view to_string(Verdict v);

inline constexpr std::string_view kRejectedState = "REJECTED";

struct TransitionRecord {
    Timestamp timestamp;
    std::string event;
    std::string from_state;
    /// Next state, or kRejectedState.
    std::string to_state;
    Verdict verdict{Verdict::Accepted};
    FrameProvenance cause;
    bool operator==(const TransitionRecord&) const = default;
};

class FsmInstance {
public:
    FsmInstance(FsmDefinitionPtr definition, std::string key);

    const FsmDefinition& definition() const { return *definition_; }
    const FsmDefinitionPtr& definition_ptr() const { return definition_; }
    const std::string& key() const { return key_; }
    const std::string& state() const { return state_; }
    const std::vector<TransitionRecord>& log() const { return log_; }

    /// Throws UnknownEvent for events outside the alphabet; otherwise always appends a record.
    const TransitionRecord& fire(const std::string& event, const FrameProvenance& cause, Timestamp timestamp);
    /// Would `event` be accepted from the current state?
    bool accepts(const std::string& event) const;

private:
    FsmDefinitionPtr definition_;
    std::string key_;
    std::string state_;
    std::vector<TransitionRecord> log_;
};

/// Final state obtained by replaying the accepted records of `log` from the initial state.
std::string fold_log(const FsmDefinition& def, const std::vector<TransitionRecord>& log);

struct DefinitionDiagnostic {
    enum class Kind { Nondeterministic, Unreachable, DanglingEndpoint, BadInitial };
    Kind kind;
    std::string state;
    std::string event;
    std::string message;
    bool operator==(const DefinitionDiagnostic&) const = default;
};

std::string_view to_string(DefinitionDiagnostic::Kind k);
std::vector<DefinitionDiagnostic> validate_definition(const FsmDefinition& def);

/// States reachable from `start` (inclusive), wildcard edges counted from every state.
std::set<std::string> reachable_states(const FsmDefinition& def, const std::string& start);

Json provenance_to_json(const FrameProvenance& p);
FrameProvenance provenance_from_json(const Json& j);
Json to_json(const TransitionRecord& r);
TransitionRecord transition_from_json(const Json& j);
std::string to_json_lines(const std::vector<TransitionRecord>& log);
std::vector<TransitionRecord> parse_transition_lines(std::string_view text);

}  // namespace poet
