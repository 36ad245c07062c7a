#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "poet/fsm.hpp"

namespace poet {

enum class FsmKind { Device, Connection, System };
std::string_view to_string(FsmKind k);
std::optional<FsmKind> parse_fsm_kind(std::string_view text);

namespace device_state {
inline const std::string kActive = "Active";
inline const std::string kNeighbourhoodDetection = "NeighbourhoodDetection";
inline const std::string kNameResolution = "NameResolution";
inline const std::string kNameResolved = "NameResolved";
inline const std::string kIpAddressAssignment = "IpAddressAssignment";
inline const std::string kIpAddressAssigned = "IpAddressAssigned";
inline const std::string kIpDuplicationCheck = "IpDuplicationCheck";
inline const std::string kNewConnectionInitiated = "NewConnectionInitiated";
inline const std::string kParametrization = "Parametrization";
inline const std::string kEndOfParametrization = "EndOfParametrization";
inline const std::string kApplicationReady = "ApplicationReady";
inline const std::string kConnectionEstablished = "ConnectionEstablished";
inline const std::string kDataExchange = "DataExchange";
inline const std::string kAcyclicParametrization = "AcyclicParametrization";
inline const std::string kAcyclicReadingData = "AcyclicReadingData";
}  // namespace device_state

namespace connection_state {
inline const std::string kConnectionCreation = "ConnectionCreation";
inline const std::string kConnectionConfiguration = "ConnectionConfiguration";
inline const std::string kConnectionEstablished = "ConnectionEstablished";
inline const std::string kInputDataExchange = "InputDataExchange";
inline const std::string kOutputDataExchange = "OutputDataExchange";
inline const std::string kAcyclicParametrization = "AcyclicParametrization";
inline const std::string kAcyclicReadingData = "AcyclicReadingData";
}  // namespace connection_state

namespace system_state {
inline const std::string kInactive = "Inactive";
inline const std::string kPoweredOn = "PoweredOn";
inline const std::string kAssetConfigurationAndSystemStartup = "AssetConfigurationAndSystemStartup";
inline const std::string kDataExchange = "DataExchange";
}  // namespace system_state

namespace event {
inline const std::string kDetectNeighbours = "detect_neighbours";
inline const std::string kNameResolutionRequested = "name_resolution_requested";
inline const std::string kNameResolved = "name_resolved";
inline const std::string kIpAssignmentRequested = "ip_assignment_requested";
inline const std::string kIpAssigned = "ip_assigned";
inline const std::string kDuplicationCheck = "duplication_check";
inline const std::string kConnectRequested = "connect_requested";
inline const std::string kParametrizationWrite = "parametrization_write";
inline const std::string kEndOfParametrization = "end_of_parametrization";
inline const std::string kApplicationReady = "application_ready";
inline const std::string kConnectionConfirmed = "connection_confirmed";
inline const std::string kCyclicDataGood = "cyclic_data_good";
inline const std::string kAcyclicWrite = "acyclic_write";
inline const std::string kAcyclicRead = "acyclic_read";
inline const std::string kAcyclicDone = "acyclic_done";
inline const std::string kNameSetRequested = "name_set_requested";
inline const std::string kIpSetOnEstablished = "ip_set_on_established";
inline const std::string kInputProcessDataSent = "input_process_data_sent";
inline const std::string kOutputProcessDataSent = "output_process_data_sent";
inline const std::string kPnTrafficDetected = "pn_traffic_detected";
inline const std::string kAllConnectionsEstablished = "all_connections_established";
}  // namespace event

namespace operation {
inline const std::string kPowerOn = "Power On";
inline const std::string kInactive = "Inactive";
inline const std::string kNeighbourhoodDetection = "Asset Discovery & Neighbourhood Detection";
inline const std::string kAddressResolution = "Address Resolution";
inline const std::string kConnectionEstablishment = "Connection Establishment";
inline const std::string kDataExchange = "Data Exchange";
}  // namespace operation

/// Shared immutable tables; every call returns the same instance.
FsmDefinitionPtr device_fsm_table();
FsmDefinitionPtr connection_fsm_table();
FsmDefinitionPtr system_fsm_table();
FsmDefinitionPtr definition_for(FsmKind kind);

/// PROFINET operation a state belongs to. Throws std::out_of_range for unknown states.
const std::string& operation_for(FsmKind kind, const std::string& state);

/// States that count as established for the system-level composite event.
bool connection_is_established(const std::string& state);
/// Device or connection has completed the startup handshake.
bool device_is_established(const std::string& state);

/// Document with states, operation groupings, edges, wildcards and empirical flags.
Json export_definition(FsmKind kind);

}  // namespace poet
