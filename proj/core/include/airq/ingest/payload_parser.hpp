#pragma once

#include <string_view>

#include "airq/sim/dht11.hpp"
#include "airq/sim/mq135.hpp"
#include "airq/sim/payload.hpp"

namespace airq::ingest {

// Value ranges a payload must respect.
struct PayloadLimits {
  int t_min = 0;
  int t_max = 50;
  int h_min = 20;
  int h_max = 90;
  int adc_max = 1023;

  static PayloadLimits from(const sim::Dht11Spec& dht, const sim::Mq135Spec& mq) {
    return {dht.t_min, dht.t_max, dht.h_min, dht.h_max, mq.adc_max()};
  }
};

// Strict parse of a WirePayload. Unknown fields are ignored.
//   malformed JSON            -> Error{kParse}
//   missing / mistyped fields -> Error{kSchema}, fields() lists every one
//   out-of-range values       -> Error{kRange}, fields() names them
sim::WirePayload parse_payload(std::string_view bytes, const PayloadLimits& limits = {});

}  // namespace airq::ingest
