#include "poet/fsm.hpp"

#include <deque>
#include <sstream>

namespace poet {

FsmDefinition::FsmDefinition(std::string name, std::vector<std::string> states, std::string initial_state,
                             std::vector<Transition> transitions, std::vector<WildcardTransition> wildcards,
                             std::vector<std::string> extra_events)
    : name_(std::move(name)),
      states_(std::move(states)),
      initial_(std::move(initial_state)),
      transitions_(std::move(transitions)),
      wildcards_(std::move(wildcards)),
      state_set_(states_.begin(), states_.end()) {
    auto add_event = [&](const std::string& e) {
        if (event_set_.insert(e).second) alphabet_.push_back(e);
    };
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
        add_event(transitions_[i].event);
        edges_.emplace(std::pair{transitions_[i].from, transitions_[i].event}, i);
    }
    for (std::size_t i = 0; i < wildcards_.size(); ++i) {
        add_event(wildcards_[i].event);
        wildcard_index_.emplace(wildcards_[i].event, i);
    }
    for (const auto& e : extra_events) add_event(e);
}

const std::string* FsmDefinition::target(const std::string& state, const std::string& event) const {
    if (auto it = edges_.find({state, event}); it != edges_.end()) return &transitions_[it->second].to;
    if (auto it = wildcard_index_.find(event); it != wildcard_index_.end()) return &wildcards_[it->second].to;
    return nullptr;
}

bool FsmDefinition::is_empirical(const std::string& state, const std::string& event) const {
    if (auto it = edges_.find({state, event}); it != edges_.end()) return transitions_[it->second].empirical;
    if (auto it = wildcard_index_.find(event); it != wildcard_index_.end()) return wildcards_[it->second].empirical;
    return false;
}

std::string_view to_string(Verdict v) { return v == Verdict::Accepted ? "accepted" : "rejected"; }

FsmInstance::FsmInstance(FsmDefinitionPtr definition, std::string key)
    : definition_(std::move(definition)), key_(std::move(key)), state_(definition_->initial_state()) {}

bool FsmInstance::accepts(const std::string& event) const { return definition_->target(state_, event) != nullptr; }

const TransitionRecord& FsmInstance::fire(const std::string& event, const FrameProvenance& cause,
                                          Timestamp timestamp) {
    if (!definition_->has_event(event)) throw UnknownEvent(definition_->name(), event);
    TransitionRecord r;
    r.timestamp = timestamp;
    r.event = event;
    r.from_state = state_;
    r.cause = cause;
    if (const std::string* next = definition_->target(state_, event)) {
        r.to_state = *next;
        r.verdict = Verdict::Accepted;
        state_ = *next;
    } else {
        r.to_state = std::string(kRejectedState);
        r.verdict = Verdict::Rejected;
    }
    log_.push_back(std::move(r));
    return log_.back();
}

std::string fold_log(const FsmDefinition& def, const std::vector<TransitionRecord>& log) {
    std::string state = def.initial_state();
    for (const auto& r : log)
        if (r.verdict == Verdict::Accepted) state = r.to_state;
    return state;
}

std::string_view to_string(DefinitionDiagnostic::Kind k) {
    switch (k) {
        case DefinitionDiagnostic::Kind::Nondeterministic: return "nondeterministic";
        case DefinitionDiagnostic::Kind::Unreachable: return "unreachable";
        case DefinitionDiagnostic::Kind::DanglingEndpoint: return "dangling_endpoint";
        case DefinitionDiagnostic::Kind::BadInitial: return "bad_initial";
    }
    return "unknown";
}

std::set<std::string> reachable_states(const FsmDefinition& def, const std::string& start) {
    std::set<std::string> seen{start};
    std::deque<std::string> queue{start};
    while (!queue.empty()) {
        std::string s = queue.front();
        queue.pop_front();
        auto visit = [&](const std::string& to) {
            if (def.has_state(to) && seen.insert(to).second) queue.push_back(to);
        };
        for (const auto& t : def.transitions())
            if (t.from == s) visit(t.to);
        for (const auto& w : def.wildcards()) visit(w.to);
    }
    return seen;
}

std::vector<DefinitionDiagnostic> validate_definition(const FsmDefinition& def) {
    using Kind = DefinitionDiagnostic::Kind;
    std::vector<DefinitionDiagnostic> out;
    if (!def.has_state(def.initial_state()))
        out.push_back({Kind::BadInitial, def.initial_state(), "", "initial state is not declared"});

    std::map<std::pair<std::string, std::string>, std::set<std::string>> targets;
    for (const auto& t : def.transitions()) {
        if (!def.has_state(t.from))
            out.push_back({Kind::DanglingEndpoint, t.from, t.event, "edge source '" + t.from + "' is not a state"});
        if (!def.has_state(t.to))
            out.push_back({Kind::DanglingEndpoint, t.to, t.event, "edge target '" + t.to + "' is not a state"});
        targets[{t.from, t.event}].insert(t.to);
    }
    std::map<std::string, std::set<std::string>> wildcard_targets;
    for (const auto& w : def.wildcards()) {
        if (!def.has_state(w.to))
            out.push_back({Kind::DanglingEndpoint, w.to, w.event, "wildcard target '" + w.to + "' is not a state"});
        wildcard_targets[w.event].insert(w.to);
    }
    for (const auto& [key, tos] : targets)
        if (tos.size() > 1)
            out.push_back({Kind::Nondeterministic, key.first, key.second,
                           "state '" + key.first + "' has " + std::to_string(tos.size()) + " edges on '" +
                               key.second + "'"});
    for (const auto& [event, tos] : wildcard_targets)
        if (tos.size() > 1)
            out.push_back({Kind::Nondeterministic, "*", event,
                           "wildcard event '" + event + "' has " + std::to_string(tos.size()) + " targets"});

    if (def.has_state(def.initial_state())) {
        auto seen = reachable_states(def, def.initial_state());
        for (const auto& s : def.states())
            if (!seen.count(s)) out.push_back({Kind::Unreachable, s, "", "state '" + s + "' is unreachable"});
    }
    return out;
}

Json provenance_to_json(const FrameProvenance& p) {
    return Json{{"capture_index", p.capture_index}, {"protocol", p.protocol}, {"summary", p.summary}};
}

FrameProvenance provenance_from_json(const Json& j) {
    return {j.at("capture_index").get<std::uint64_t>(), j.at("protocol").get<std::string>(),
            j.at("summary").get<std::string>()};
}

Json to_json(const TransitionRecord& r) {
    return Json{{"timestamp", r.timestamp.to_string()}, {"event", r.event},
                {"from_state", r.from_state},          {"to_state", r.to_state},
                {"verdict", to_string(r.verdict)},     {"cause", provenance_to_json(r.cause)}};
}

TransitionRecord transition_from_json(const Json& j) {
    TransitionRecord r;
    auto ts = Timestamp::parse(j.at("timestamp").get<std::string>());
    if (!ts) throw std::invalid_argument("bad timestamp in transition record");
    r.timestamp = *ts;
    r.event = j.at("event").get<std::string>();
    r.from_state = j.at("from_state").get<std::string>();
    r.to_state = j.at("to_state").get<std::string>();
    auto verdict = j.at("verdict").get<std::string>();
    if (verdict == "accepted") r.verdict = Verdict::Accepted;
    else if (verdict == "rejected") r.verdict = Verdict::Rejected;
    else throw std::invalid_argument("bad verdict '" + verdict + "'");
    r.cause = provenance_from_json(j.at("cause"));
    return r;
}

std::string to_json_lines(const std::vector<TransitionRecord>& log) {
    std::string out;
    for (const auto& r : log) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

std::vector<TransitionRecord> parse_transition_lines(std::string_view text) {
    std::vector<TransitionRecord> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(transition_from_json(Json::parse(line)));
    }
    return out;
}

}  // namespace poet
