#pragma once

// Shared plumbing for the client and server state machines.

#include <string>

#include "downgrade/handshake.hpp"

namespace downgrade::detail {

inline StepResult abort_with(EndpointState state, AbortReason reason, std::string detail) {
  state.phase = Phase::Aborted;
  state.aborted = Abort{reason, std::move(detail)};
  return StepResult{std::move(state), {}, false};
}

inline Bytes random_nonce(std::mt19937_64& rng) {
  Bytes n;
  n.reserve(32);
  for (int i = 0; i < 4; ++i) {
    auto chunk = encode_u64(rng());
    n.insert(n.end(), chunk.begin(), chunk.end());
  }
  return n;
}

inline void append(EndpointState& state, const Message& m) { state.transcript.push_back(serialize(m)); }

inline std::string unexpected(const Message& m, Phase phase) {
  return "unexpected " + std::string(to_string(type_of(m))) + " in " + std::string(to_string(phase));
}

}  // namespace downgrade::detail
