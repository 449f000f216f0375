#pragma once

#include <string_view>
#include <vector>

namespace lc {

enum class EntityKind { NormalEdge, RebelEdge, NormalCircle, RebelCircle };

enum class TrustEvent {
  Created,
  Lambda1,
  Lambda2,
  Lambda3,
  Lambda4,
  Lambda5,
  Coast,
  RebelMatch,
  Aligned,
  Deviated,
  Refresh,  // trust reset to Tr_s after emitting an ignore region
  Released,  // normal edge handed over to an ignore region or gone out of view
  Deleted,
};

std::string_view to_string(EntityKind kind);
std::string_view to_string(TrustEvent event);

// One line of the per-frame association log. `delta` is the change requested by
// the event before clamping; `trust_after` is the stored value after clamping.
struct TrustRecord {
  int frame_id = 0;
  EntityKind kind = EntityKind::NormalEdge;
  int entity_id = 0;
  TrustEvent event = TrustEvent::Created;
  double delta = 0.0;
  double trust_after = 0.0;
};

using TrustLog = std::vector<TrustRecord>;

}  // namespace lc
