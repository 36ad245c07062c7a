#include "poet/tracker.hpp"

#include <spdlog/spdlog.h>

#include <stdexcept>

namespace poet {

namespace ss = system_state;

std::string_view to_string(Severity s) { return s == Severity::Anomaly ? "anomaly" : "diagnostic"; }

Json to_json(const AnomalyAlert& a) {
    return Json{{"timestamp", a.timestamp.to_string()},
                {"severity", to_string(a.severity)},
                {"instance_kind", to_string(a.instance_kind)},
                {"instance_key", a.instance_key},
                {"state_at_event", a.state_at_event},
                {"offending_event", a.offending_event},
                {"explanation", a.explanation},
                {"cause", provenance_to_json(a.cause)}};
}

AnomalyAlert alert_from_json(const Json& j) {
    AnomalyAlert a;
    auto ts = Timestamp::parse(j.at("timestamp").get<std::string>());
    if (!ts) throw std::invalid_argument("bad alert timestamp");
    a.timestamp = *ts;
    auto sev = j.at("severity").get<std::string>();
    if (sev == "anomaly") a.severity = Severity::Anomaly;
    else if (sev == "diagnostic") a.severity = Severity::Diagnostic;
    else throw std::invalid_argument("bad severity '" + sev + "'");
    auto kind = parse_fsm_kind(j.at("instance_kind").get<std::string>());
    if (!kind) throw std::invalid_argument("bad instance kind");
    a.instance_kind = *kind;
    a.instance_key = j.at("instance_key").get<std::string>();
    a.state_at_event = j.at("state_at_event").get<std::string>();
    a.offending_event = j.at("offending_event").get<std::string>();
    a.explanation = j.at("explanation").get<std::string>();
    a.cause = provenance_from_json(j.at("cause"));
    return a;
}

std::string explain_rejection(FsmKind kind, const std::string& state, const std::string& event) {
    return event + " not permitted during " + operation_for(kind, state) + " operation (" +
           std::string(to_string(kind)) + " state " + state + ")";
}

Tracker::Tracker(TrackerConfig config, AlertSink sink)
    : config_(std::move(config)), sink_(std::move(sink)), system_(system_fsm_table(), config_.system_name) {}

std::size_t Tracker::anomaly_count() const {
    std::size_t n = 0;
    for (const auto& a : alerts_) n += a.severity == Severity::Anomaly;
    return n;
}

std::size_t Tracker::diagnostic_count() const { return alerts_.size() - anomaly_count(); }

FsmInstance& Tracker::device_instance(const MacAddress& mac) {
    auto it = devices_.find(mac);
    if (it == devices_.end()) {
        it = devices_.emplace(mac, FsmInstance(device_fsm_table(), mac.to_string())).first;
        spdlog::debug("device instance created for {}", mac.to_string());
    }
    return it->second;
}

void Tracker::emit(AnomalyAlert a) {
    if (a.severity == Severity::Anomaly)
        spdlog::warn("anomaly: {} {} {}", to_string(a.instance_kind), a.instance_key, a.explanation);
    else
        spdlog::info("diagnostic: {} {}", a.offending_event, a.explanation);
    alerts_.push_back(std::move(a));
    if (sink_) sink_(alerts_.back());
}

void Tracker::diagnostic(FsmKind kind, const std::string& key, const std::string& state, const std::string& what,
                         const std::string& explanation, const FrameProvenance& cause, Timestamp ts) {
    emit({ts, kind, key, state, what, cause, explanation, Severity::Diagnostic});
}

void Tracker::diagnostic(const Diagnostic& d, Timestamp ts) {
    if (d.connection_key) {
        auto it = connections_.find(*d.connection_key);
        std::string state = it == connections_.end() ? "" : it->second.state();
        diagnostic(FsmKind::Connection, *d.connection_key, state, d.kind, d.message, d.cause, ts);
    } else if (d.subject && devices_.count(*d.subject)) {
        diagnostic(FsmKind::Device, d.subject->to_string(), devices_.at(*d.subject).state(), d.kind, d.message,
                   d.cause, ts);
    } else {
        diagnostic(FsmKind::System, system_.key(), system_.state(), d.kind, d.message, d.cause, ts);
    }
}

void Tracker::record(FsmInstance& inst, FsmKind kind, const TransitionRecord& r) {
    spdlog::trace("{} {}: {} --{}--> {}", to_string(kind), inst.key(), r.from_state, r.event, r.to_state);
    if (r.verdict == Verdict::Rejected)
        emit({r.timestamp, kind, inst.key(), r.from_state, r.event, r.cause,
              explain_rejection(kind, r.from_state, r.event), Severity::Anomaly});
}

void Tracker::fire(const ProtocolEvent& e, Timestamp ts, bool connection_is_new) {
    switch (e.target) {
        case FsmKind::Device: {
            FsmInstance& inst = device_instance(e.subject_mac);
            const TransitionRecord& r = inst.fire(e.event_name, e.cause, ts);
            TransitionRecord copy = r;
            record(inst, FsmKind::Device, copy);
            if (e.event_name == event::kConnectRequested && copy.verdict == Verdict::Rejected && connection_is_new &&
                e.peer_mac) {
                std::string key = make_connection_key(*e.peer_mac, e.subject_mac);
                auto it = connections_.find(key);
                if (it != connections_.end())
                    diagnostic(FsmKind::Connection, key, it->second.state(), diagnostic_kind::kRejectedConnect,
                               "connection " + key + " opened by a Connect the device rejected in state " +
                                   copy.from_state,
                               e.cause, ts);
            }
            break;
        }
        case FsmKind::Connection: {
            auto it = connections_.find(e.connection_key.value_or(""));
            if (it == connections_.end()) {
                diagnostic(FsmKind::System, system_.key(), system_.state(), diagnostic_kind::kOrphanFrame,
                           "event " + e.event_name + " for unknown connection", e.cause, ts);
                break;
            }
            TransitionRecord r = it->second.fire(e.event_name, e.cause, ts);
            record(it->second, FsmKind::Connection, r);
            evaluate_composite(e.cause, ts);
            break;
        }
        case FsmKind::System: {
            TransitionRecord r = system_.fire(e.event_name, e.cause, ts);
            record(system_, FsmKind::System, r);
            break;
        }
    }
}

void Tracker::evaluate_composite(const FrameProvenance& cause, Timestamp ts) {
    if (composite_fired_ || connections_.empty()) return;
    for (const auto& [key, inst] : connections_)
        if (!connection_is_established(inst.state())) return;
    composite_fired_ = true;
    TransitionRecord r = system_.fire(event::kAllConnectionsEstablished, cause, ts);
    record(system_, FsmKind::System, r);
}

void Tracker::report_capture_error(const CaptureError& error) {
    capture_error_ = error;
    FrameProvenance cause{frames_, "capture", error.describe()};
    diagnostic(FsmKind::System, system_.key(), system_.state(), diagnostic_kind::kCaptureError, error.describe(),
               cause, last_ts_.value_or(Timestamp{}));
}

void Tracker::process(const RawFrame& raw) {
    std::uint64_t ordinal = frames_++;
    bytes_ += raw.bytes.size();
    if (!first_ts_) first_ts_ = raw.timestamp;
    last_ts_ = raw.timestamp;
    Timestamp ts = raw.timestamp;

    DissectResult result = dissect(raw);
    if (const auto* bad = std::get_if<MalformedFrame>(&result)) {
        ++malformed_;
        ++by_protocol_["malformed"];
        FrameProvenance cause{raw.capture_index, bad->protocol, "malformed " + bad->protocol};
        Diagnostic d{diagnostic_kind::kMalformedFrame,
                     bad->protocol + " frame malformed at offset " + std::to_string(bad->offset) + ": " + bad->reason,
                     std::nullopt, std::nullopt, cause};
        if (bad->envelope) d.subject = inventory_.interface_for(bad->envelope->src_mac);
        diagnostic(d, ts);
        if (bad->envelope) {
            ParsedFrame shell{*bad->envelope, OtherFrame{bad->envelope->ethertype, "malformed"}, raw.capture_index};
            inventory_.update_from_frame(shell, ts);
        }
        return;
    }
    const ParsedFrame& frame = std::get<ParsedFrame>(result);
    ++by_protocol_[std::string(protocol_name(frame.body))];

    for (const auto& c : inventory_.update_from_frame(frame, ts)) {
        if (!c.conflict) continue;
        FrameProvenance cause{frame.capture_index, c.provenance.protocol, summarize(frame)};
        Diagnostic d{diagnostic_kind::kInventoryConflict,
                     c.field + " of " + c.mac.to_string() + " changed from '" + c.old_value.value_or("") + "' to '" +
                         c.new_value + "'",
                     c.mac, std::nullopt, cause};
        diagnostic(d, ts);
    }

    bool profinet_family = frame.as<LldpFrame>() || frame.as<DcpFrame>() || frame.as<CmFrame>() ||
                           frame.as<PnioCyclicFrame>();
    if (profinet_family) {
        MacAddress src = inventory_.interface_for(frame.envelope.src_mac).value_or(frame.envelope.src_mac);
        if (!src.is_multicast() && !src.is_zero()) device_instance(src);
    }

    StateView view;
    view.device_state = [this](const MacAddress& m) -> std::optional<std::string> {
        auto it = devices_.find(m);
        if (it == devices_.end()) return std::nullopt;
        return it->second.state();
    };
    view.connection_state = [this](const std::string& k) -> std::optional<std::string> {
        auto it = connections_.find(k);
        if (it == connections_.end()) return std::nullopt;
        return it->second.state();
    };
    view.system_state = system_.state();

    Derivation d = derive_events(frame, context_, inventory_, view);
    apply_derivation(context_, d, ordinal);
    for (const auto& diag : d.diagnostics) diagnostic(diag, ts);

    bool connection_is_new = false;
    if (d.open_connection) {
        const auto& info = *d.open_connection;
        device_instance(info.initiator);
        device_instance(info.responder);
        if (!connections_.count(info.key)) {
            connections_.emplace(info.key, FsmInstance(connection_fsm_table(), info.key));
            connection_is_new = true;
            spdlog::debug("connection instance created for {}", info.key);
        }
    }
    for (const auto& e : d.events) fire(e, ts, connection_is_new);

    for (const auto& expired : expire_deferred(context_, ordinal, config_.deferred_window)) {
        Diagnostic diag{diagnostic_kind::kDeferredExpired,
                        expired.event.event_name + " for name '" + expired.event.deferred_name.value_or("") +
                            "' never resolved to a device",
                        std::nullopt, std::nullopt, expired.event.cause};
        diagnostic(diag, ts);
    }
}

std::string Tracker::system_operation() const {
    const std::string& op = operation_for(FsmKind::System, system_.state());
    if (system_.state() != ss::kPoweredOn) return op;
    for (auto it = system_.log().rbegin(); it != system_.log().rend(); ++it) {
        if (it->verdict != Verdict::Accepted) continue;
        if (it->cause.protocol == "PN-DCP") return operation::kAddressResolution;
        break;
    }
    return op;
}

Json Tracker::snapshot_states() const {
    Json doc;
    doc["system"] = Json{{"key", system_.key()}, {"state", system_.state()}, {"operation", system_operation()}};
    Json devices = Json::array();
    for (const auto& [mac, inst] : devices_) {
        Json d{{"key", inst.key()}, {"state", inst.state()}, {"operation", operation_for(FsmKind::Device, inst.state())}};
        if (const auto* rec = inventory_.find(mac); rec && rec->name_of_station) d["name_of_station"] = *rec->name_of_station;
        devices.push_back(std::move(d));
    }
    doc["devices"] = std::move(devices);
    Json conns = Json::array();
    for (const auto& [key, inst] : connections_) {
        Json c{{"key", key}, {"state", inst.state()}, {"operation", operation_for(FsmKind::Connection, inst.state())}};
        if (auto it = context_.connections.find(key); it != context_.connections.end()) {
            c["initiator"] = it->second.initiator.to_string();
            c["responder"] = it->second.responder.to_string();
        }
        conns.push_back(std::move(c));
    }
    doc["connections"] = std::move(conns);
    return doc;
}

Json Tracker::report() const {
    auto log_json = [](const FsmInstance& inst) {
        Json arr = Json::array();
        for (const auto& r : inst.log()) arr.push_back(to_json(r));
        return arr;
    };
    Json summary;
    summary["system_name"] = config_.system_name;
    summary["frames"] = frames_;
    summary["bytes"] = bytes_;
    summary["malformed_frames"] = malformed_;
    summary["rejected_short_frames"] = short_frames_;
    summary["first_timestamp"] = first_ts_ ? Json(first_ts_->to_string()) : Json(nullptr);
    summary["last_timestamp"] = last_ts_ ? Json(last_ts_->to_string()) : Json(nullptr);
    summary["frames_by_protocol"] = by_protocol_;
    summary["anomalies"] = anomaly_count();
    summary["diagnostics"] = diagnostic_count();
    summary["devices"] = devices_.size();
    summary["connections"] = connections_.size();
    summary["assets"] = inventory_.size();
    summary["pending_deferred_events"] = context_.deferred.size();
    summary["capture_error"] = capture_error_ ? Json(capture_error_->describe()) : Json(nullptr);

    Json alerts = Json::array();
    for (const auto& a : alerts_) alerts.push_back(to_json(a));

    Json logs;
    logs["system"] = Json{{system_.key(), log_json(system_)}};
    Json dev = Json::object();
    for (const auto& [mac, inst] : devices_) dev[inst.key()] = log_json(inst);
    logs["devices"] = std::move(dev);
    Json con = Json::object();
    for (const auto& [key, inst] : connections_) con[key] = log_json(inst);
    logs["connections"] = std::move(con);

    return Json{{"summary", std::move(summary)},
                {"final_states", snapshot_states()},
                {"inventory", inventory_.export_document()},
                {"alerts", std::move(alerts)},
                {"logs", std::move(logs)}};
}

Tracker process_capture(FrameSource& source, const TrackerConfig& config, AlertSink sink) {
    Tracker tracker(config, std::move(sink));
    while (auto frame = source.next()) tracker.process(*frame);
    tracker.note_rejected_short_frames(source.rejected_short_frames());
    if (source.error()) tracker.report_capture_error(*source.error());
    return tracker;
}

Json normalize_timestamps(const Json& doc) {
    static const std::set<std::string> keys{"timestamp", "first_seen", "last_seen", "first_timestamp",
                                            "last_timestamp"};
    if (doc.is_object()) {
        Json out = Json::object();
        for (const auto& [k, v] : doc.items()) {
            if (keys.count(k) && v.is_string()) out[k] = "0.000000000";
            else out[k] = normalize_timestamps(v);
        }
        return out;
    }
    if (doc.is_array()) {
        Json out = Json::array();
        for (const auto& v : doc) out.push_back(normalize_timestamps(v));
        return out;
    }
    return doc;
}

}  // namespace poet
