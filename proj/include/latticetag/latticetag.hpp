#pragma once

// Umbrella header for the latticetag library: exact Z_q linear algebra,
// credential setup, the three-party authentication exchange, wire
// framing, the insecure-channel attack harness, and the cost model.

#include "latticetag/cost.hpp"
#include "latticetag/credentials.hpp"
#include "latticetag/dy.hpp"
#include "latticetag/errors.hpp"
#include "latticetag/hash.hpp"
#include "latticetag/params.hpp"
#include "latticetag/protocol.hpp"
#include "latticetag/rng.hpp"
#include "latticetag/wire.hpp"
#include "latticetag/zq.hpp"
