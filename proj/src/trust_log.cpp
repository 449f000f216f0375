#include "lc/trust_log.hpp"

namespace lc {

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::NormalEdge: return "En";
    case EntityKind::RebelEdge: return "Er";
    case EntityKind::NormalCircle: return "Cn";
    case EntityKind::RebelCircle: return "Cr";
  }
  return "?";
}

std::string_view to_string(TrustEvent event) {
  switch (event) {
    case TrustEvent::Created: return "created";
    case TrustEvent::Lambda1: return "lambda1";
    case TrustEvent::Lambda2: return "lambda2";
    case TrustEvent::Lambda3: return "lambda3";
    case TrustEvent::Lambda4: return "lambda4";
    case TrustEvent::Lambda5: return "lambda5";
    case TrustEvent::Coast: return "coast";
    case TrustEvent::RebelMatch: return "rebel_match";
    case TrustEvent::Aligned: return "aligned";
    case TrustEvent::Deviated: return "deviated";
    case TrustEvent::Refresh: return "refresh";
    case TrustEvent::Released: return "released";
    case TrustEvent::Deleted: return "deleted";
  }
  return "?";
}

}  // namespace lc
