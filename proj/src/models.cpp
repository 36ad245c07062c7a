#include "poet/models.hpp"

#include <map>
#include <stdexcept>

namespace poet {

namespace ds = device_state;
namespace cs = connection_state;
namespace ss = system_state;
namespace ev = event;

std::string_view to_string(FsmKind k) {
    switch (k) {
        case FsmKind::Device: return "device";
        case FsmKind::Connection: return "connection";
        case FsmKind::System: return "system";
    }
    return "device";
}

std::optional<FsmKind> parse_fsm_kind(std::string_view text) {
    if (text == "device") return FsmKind::Device;
    if (text == "connection") return FsmKind::Connection;
    if (text == "system") return FsmKind::System;
    return std::nullopt;
}

namespace {

FsmDefinitionPtr build_device() {
    std::vector<std::string> states{ds::kActive,
                                    ds::kNeighbourhoodDetection,
                                    ds::kNameResolution,
                                    ds::kNameResolved,
                                    ds::kIpAddressAssignment,
                                    ds::kIpAddressAssigned,
                                    ds::kIpDuplicationCheck,
                                    ds::kNewConnectionInitiated,
                                    ds::kParametrization,
                                    ds::kEndOfParametrization,
                                    ds::kApplicationReady,
                                    ds::kConnectionEstablished,
                                    ds::kDataExchange,
                                    ds::kAcyclicParametrization,
                                    ds::kAcyclicReadingData};
    std::vector<Transition> t{
        {ds::kActive, ev::kNameResolutionRequested, ds::kNameResolution},
        {ds::kNameResolution, ev::kNameResolved, ds::kNameResolved},
        {ds::kNameResolved, ev::kIpAssignmentRequested, ds::kIpAddressAssignment},
        {ds::kIpAddressAssignment, ev::kIpAssigned, ds::kIpAddressAssigned, true},
        {ds::kIpAddressAssigned, ev::kDuplicationCheck, ds::kIpDuplicationCheck, true},
        {ds::kIpDuplicationCheck, ev::kConnectRequested, ds::kNewConnectionInitiated},
        {ds::kNewConnectionInitiated, ev::kParametrizationWrite, ds::kParametrization},
        {ds::kParametrization, ev::kParametrizationWrite, ds::kParametrization},
        {ds::kParametrization, ev::kEndOfParametrization, ds::kEndOfParametrization},
        {ds::kEndOfParametrization, ev::kApplicationReady, ds::kApplicationReady},
        {ds::kApplicationReady, ev::kConnectionConfirmed, ds::kConnectionEstablished},
        {ds::kConnectionEstablished, ev::kCyclicDataGood, ds::kDataExchange},
        {ds::kDataExchange, ev::kCyclicDataGood, ds::kDataExchange},
        {ds::kDataExchange, ev::kAcyclicWrite, ds::kAcyclicParametrization},
        {ds::kAcyclicParametrization, ev::kAcyclicDone, ds::kDataExchange},
        {ds::kDataExchange, ev::kAcyclicRead, ds::kAcyclicReadingData},
        {ds::kAcyclicReadingData, ev::kAcyclicDone, ds::kDataExchange},
        // Cyclic traffic keeps flowing while a record is read or written.
        {ds::kAcyclicParametrization, ev::kCyclicDataGood, ds::kAcyclicParametrization},
        {ds::kAcyclicReadingData, ev::kCyclicDataGood, ds::kAcyclicReadingData},
    };
    const std::pair<const std::string&, const std::string&> fan_out[] = {
        {ev::kNameResolutionRequested, ds::kNameResolution},
        {ev::kNameResolved, ds::kNameResolved},
        {ev::kIpAssignmentRequested, ds::kIpAddressAssignment},
        {ev::kIpAssigned, ds::kIpAddressAssigned},
        {ev::kDuplicationCheck, ds::kIpDuplicationCheck},
        {ev::kConnectRequested, ds::kNewConnectionInitiated},
        {ev::kParametrizationWrite, ds::kParametrization},
        {ev::kEndOfParametrization, ds::kEndOfParametrization},
        {ev::kApplicationReady, ds::kApplicationReady},
        {ev::kConnectionConfirmed, ds::kConnectionEstablished},
        {ev::kCyclicDataGood, ds::kDataExchange},
        {ev::kAcyclicWrite, ds::kAcyclicParametrization},
        {ev::kAcyclicRead, ds::kAcyclicReadingData},
        {ev::kAcyclicDone, ds::kDataExchange},
    };
    for (const auto& [e, to] : fan_out) t.push_back({ds::kNeighbourhoodDetection, e, to});
    return std::make_shared<const FsmDefinition>(
        "device", std::move(states), ds::kActive, std::move(t),
        std::vector<WildcardTransition>{{ev::kDetectNeighbours, ds::kNeighbourhoodDetection}},
        std::vector<std::string>{ev::kNameSetRequested, ev::kIpSetOnEstablished});
}

FsmDefinitionPtr build_connection() {
    std::vector<std::string> states{cs::kConnectionCreation,  cs::kConnectionConfiguration, cs::kConnectionEstablished,
                                    cs::kInputDataExchange,   cs::kOutputDataExchange,      cs::kAcyclicParametrization,
                                    cs::kAcyclicReadingData};
    std::vector<Transition> t{
        {cs::kConnectionCreation, ev::kParametrizationWrite, cs::kConnectionConfiguration},
        {cs::kConnectionConfiguration, ev::kParametrizationWrite, cs::kConnectionConfiguration},
        {cs::kConnectionConfiguration, ev::kEndOfParametrization, cs::kConnectionConfiguration},
        {cs::kConnectionConfiguration, ev::kApplicationReady, cs::kConnectionEstablished},
        {cs::kConnectionEstablished, ev::kOutputProcessDataSent, cs::kOutputDataExchange},
        {cs::kConnectionEstablished, ev::kInputProcessDataSent, cs::kInputDataExchange},
        {cs::kInputDataExchange, ev::kInputProcessDataSent, cs::kInputDataExchange},
        {cs::kInputDataExchange, ev::kOutputProcessDataSent, cs::kOutputDataExchange},
        {cs::kOutputDataExchange, ev::kOutputProcessDataSent, cs::kOutputDataExchange},
        {cs::kOutputDataExchange, ev::kInputProcessDataSent, cs::kInputDataExchange},
        {cs::kInputDataExchange, ev::kAcyclicWrite, cs::kAcyclicParametrization},
        {cs::kOutputDataExchange, ev::kAcyclicWrite, cs::kAcyclicParametrization},
        {cs::kAcyclicParametrization, ev::kAcyclicDone, cs::kOutputDataExchange},
        {cs::kInputDataExchange, ev::kAcyclicRead, cs::kAcyclicReadingData},
        {cs::kOutputDataExchange, ev::kAcyclicRead, cs::kAcyclicReadingData},
        {cs::kAcyclicReadingData, ev::kAcyclicDone, cs::kInputDataExchange},
        {cs::kAcyclicParametrization, ev::kInputProcessDataSent, cs::kAcyclicParametrization},
        {cs::kAcyclicParametrization, ev::kOutputProcessDataSent, cs::kAcyclicParametrization},
        {cs::kAcyclicReadingData, ev::kInputProcessDataSent, cs::kAcyclicReadingData},
        {cs::kAcyclicReadingData, ev::kOutputProcessDataSent, cs::kAcyclicReadingData},
    };
    return std::make_shared<const FsmDefinition>("connection", std::move(states), cs::kConnectionCreation,
                                                 std::move(t));
}

FsmDefinitionPtr build_system() {
    std::vector<std::string> states{ss::kInactive, ss::kPoweredOn, ss::kAssetConfigurationAndSystemStartup,
                                    ss::kDataExchange};
    std::vector<Transition> t{
        {ss::kInactive, ev::kPnTrafficDetected, ss::kPoweredOn},
        {ss::kPoweredOn, ev::kPnTrafficDetected, ss::kPoweredOn},
        {ss::kPoweredOn, ev::kConnectRequested, ss::kAssetConfigurationAndSystemStartup},
        {ss::kAssetConfigurationAndSystemStartup, ev::kConnectRequested, ss::kAssetConfigurationAndSystemStartup},
        {ss::kAssetConfigurationAndSystemStartup, ev::kAllConnectionsEstablished, ss::kDataExchange},
        {ss::kDataExchange, ev::kCyclicDataGood, ss::kDataExchange},
        {ss::kDataExchange, ev::kAcyclicWrite, ss::kDataExchange},
        {ss::kDataExchange, ev::kAcyclicRead, ss::kDataExchange},
        {ss::kDataExchange, ev::kAcyclicDone, ss::kDataExchange},
    };
    return std::make_shared<const FsmDefinition>("system", std::move(states), ss::kInactive, std::move(t));
}

using OperationMap = std::map<std::string, const std::string*>;

const OperationMap& operations(FsmKind kind) {
    namespace op = operation;
    static const OperationMap device{
        {ds::kActive, &op::kPowerOn},
        {ds::kNeighbourhoodDetection, &op::kNeighbourhoodDetection},
        {ds::kNameResolution, &op::kAddressResolution},
        {ds::kNameResolved, &op::kAddressResolution},
        {ds::kIpAddressAssignment, &op::kAddressResolution},
        {ds::kIpAddressAssigned, &op::kAddressResolution},
        {ds::kIpDuplicationCheck, &op::kAddressResolution},
        {ds::kNewConnectionInitiated, &op::kConnectionEstablishment},
        {ds::kParametrization, &op::kConnectionEstablishment},
        {ds::kEndOfParametrization, &op::kConnectionEstablishment},
        {ds::kApplicationReady, &op::kConnectionEstablishment},
        {ds::kConnectionEstablished, &op::kConnectionEstablishment},
        {ds::kDataExchange, &op::kDataExchange},
        {ds::kAcyclicParametrization, &op::kDataExchange},
        {ds::kAcyclicReadingData, &op::kDataExchange},
    };
    static const OperationMap connection{
        {cs::kConnectionCreation, &op::kConnectionEstablishment},
        {cs::kConnectionConfiguration, &op::kConnectionEstablishment},
        {cs::kConnectionEstablished, &op::kConnectionEstablishment},
        {cs::kInputDataExchange, &op::kDataExchange},
        {cs::kOutputDataExchange, &op::kDataExchange},
        {cs::kAcyclicParametrization, &op::kDataExchange},
        {cs::kAcyclicReadingData, &op::kDataExchange},
    };
    static const OperationMap system{
        {ss::kInactive, &op::kInactive},
        {ss::kPoweredOn, &op::kNeighbourhoodDetection},
        {ss::kAssetConfigurationAndSystemStartup, &op::kConnectionEstablishment},
        {ss::kDataExchange, &op::kDataExchange},
    };
    switch (kind) {
        case FsmKind::Device: return device;
        case FsmKind::Connection: return connection;
        case FsmKind::System: return system;
    }
    return device;
}

}  // namespace

FsmDefinitionPtr device_fsm_table() {
    static const FsmDefinitionPtr def = build_device();
    return def;
}

FsmDefinitionPtr connection_fsm_table() {
    static const FsmDefinitionPtr def = build_connection();
    return def;
}

FsmDefinitionPtr system_fsm_table() {
    static const FsmDefinitionPtr def = build_system();
    return def;
}

FsmDefinitionPtr definition_for(FsmKind kind) {
    switch (kind) {
        case FsmKind::Device: return device_fsm_table();
        case FsmKind::Connection: return connection_fsm_table();
        case FsmKind::System: return system_fsm_table();
    }
    return device_fsm_table();
}

const std::string& operation_for(FsmKind kind, const std::string& state) {
    const auto& m = operations(kind);
    auto it = m.find(state);
    if (it == m.end()) throw std::out_of_range("no operation for state '" + state + "'");
    return *it->second;
}

bool connection_is_established(const std::string& state) {
    return state != cs::kConnectionCreation && state != cs::kConnectionConfiguration;
}

bool device_is_established(const std::string& state) {
    return state == ds::kConnectionEstablished || state == ds::kDataExchange ||
           state == ds::kAcyclicParametrization || state == ds::kAcyclicReadingData;
}

Json export_definition(FsmKind kind) {
    auto def = definition_for(kind);
    Json doc;
    doc["name"] = def->name();
    doc["kind"] = to_string(kind);
    doc["initial_state"] = def->initial_state();
    Json states = Json::array();
    Json groups = Json::object();
    for (const auto& s : def->states()) {
        const auto& op = operation_for(kind, s);
        states.push_back(Json{{"name", s}, {"operation", op}});
        groups[op].push_back(s);
    }
    doc["states"] = std::move(states);
    doc["operations"] = std::move(groups);
    Json edges = Json::array();
    for (const auto& t : def->transitions())
        edges.push_back(Json{{"from", t.from}, {"event", t.event}, {"to", t.to}, {"empirical", t.empirical}});
    doc["transitions"] = std::move(edges);
    Json wild = Json::array();
    for (const auto& w : def->wildcards())
        wild.push_back(Json{{"from", "*"}, {"event", w.event}, {"to", w.to}, {"empirical", w.empirical}});
    doc["wildcard_transitions"] = std::move(wild);
    doc["alphabet"] = def->alphabet();
    return doc;
}

}  // namespace poet
