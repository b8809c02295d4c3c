#include "downgrade/trace.hpp"

#include <array>
#include <sstream>

#include "downgrade/crypto.hpp"

namespace downgrade {

namespace {
constexpr std::array<std::string_view, 4> kActionNames = {"Forward", "Drop", "Modify", "Inject"};
constexpr std::array<std::string_view, 7> kEventNames = {"message", "oracle", "timeout", "new-connection",
                                                         "app-send", "abort", "complete"};
}  // namespace

std::string_view to_string(Direction d) { return d == Direction::ClientToServer ? "C->S" : "S->C"; }

Direction direction_from_string(std::string_view s) {
  if (s == "C->S" || s == "to_server") return Direction::ClientToServer;
  if (s == "S->C" || s == "to_client") return Direction::ServerToClient;
  throw NotFound("unknown direction '" + std::string(s) + "'");
}

std::string_view to_string(ActionKind a) { return kActionNames.at(static_cast<std::size_t>(a)); }

ActionKind action_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == s) return static_cast<ActionKind>(i);
  }
  throw NotFound("unknown action '" + std::string(s) + "'");
}

std::string_view to_string(EventKind k) { return kEventNames.at(static_cast<std::size_t>(k)); }

TraceEvent message_event(std::uint64_t connection, Direction dir, ActionKind action, const Message& original,
                         const Message* delivered, std::string detail) {
  TraceEvent e;
  e.kind = EventKind::Message;
  e.connection = connection;
  e.direction = dir;
  e.action = action;
  e.summary = describe(original);
  if (delivered && action != ActionKind::Forward) e.summary += " => " + describe(*delivered);
  e.original = serialize(original);
  if (delivered) e.delivered = serialize(*delivered);
  e.detail = std::move(detail);
  return e;
}

Bytes canonical_trace_bytes(const std::vector<TraceEvent>& trace) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(trace.size()));
  for (const auto& e : trace) {
    w.u8(static_cast<std::uint8_t>(e.kind))
        .u64(e.connection)
        .u8(static_cast<std::uint8_t>(e.direction))
        .u8(static_cast<std::uint8_t>(e.action))
        .str(e.summary)
        .bytes(e.original)
        .bytes(e.delivered)
        .str(e.detail);
  }
  return w.take();
}

std::string trace_digest(const std::vector<TraceEvent>& trace) {
  return to_hex(crypto::sha256(canonical_trace_bytes(trace)));
}

std::string render_trace(const std::vector<TraceEvent>& trace) {
  std::ostringstream os;
  for (const auto& e : trace) {
    os << "[" << e.connection << "] ";
    if (e.kind == EventKind::Message) {
      os << to_string(e.direction) << " " << to_string(e.action) << " " << e.summary;
    } else {
      os << to_string(e.kind) << " " << e.summary;
    }
    if (!e.detail.empty()) os << "  (" << e.detail << ")";
    os << "\n";
  }
  return os.str();
}

}  // namespace downgrade
