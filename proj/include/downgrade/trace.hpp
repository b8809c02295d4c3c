#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "downgrade/bytes.hpp"
#include "downgrade/messages.hpp"

namespace downgrade {

enum class Direction { ClientToServer, ServerToClient };
enum class ActionKind { Forward, Drop, Modify, Inject };
enum class EventKind { Message, Oracle, Timeout, NewConnection, AppSend, Abort, Complete };

std::string_view to_string(Direction d);
Direction direction_from_string(std::string_view s);
std::string_view to_string(ActionKind a);
ActionKind action_kind_from_string(std::string_view s);
std::string_view to_string(EventKind k);

struct TraceEvent {
  EventKind kind = EventKind::Message;
  std::uint64_t connection = 0;
  Direction direction = Direction::ClientToServer;
  ActionKind action = ActionKind::Forward;
  std::string summary;  // rendered message or event description
  Bytes original;       // serialized message as sent
  Bytes delivered;      // serialized message as delivered; empty when dropped
  std::string detail;
};

TraceEvent message_event(std::uint64_t connection, Direction dir, ActionKind action, const Message& original,
                         const Message* delivered, std::string detail = {});

/// Stable byte encoding of a trace, independent of platform.
Bytes canonical_trace_bytes(const std::vector<TraceEvent>& trace);
/// Hex SHA-256 of the canonical trace bytes.
std::string trace_digest(const std::vector<TraceEvent>& trace);

std::string render_trace(const std::vector<TraceEvent>& trace);

}  // namespace downgrade
