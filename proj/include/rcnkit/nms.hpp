#pragma once

#include "rcnkit/maps.hpp"

namespace rcnkit::bench {

// Directional non-maximum suppression. Edge orientation comes from the
// structure tensor of Gaussian-smoothed (sigma 1) finite-difference
// gradients; a pixel survives only while it is a strict interpolated
// maximum along the gradient normal within radius 1. The comparison is
// strict toward the normal's negative side and tie-tolerant toward its
// positive side, with the normal anchored so its dominant component
// points up the axis; an exact-value plateau therefore keeps exactly
// its lowest-coordinate edge (left column / top row). The suppression
// sweep repeats until nothing changes, so the operator is idempotent
// by construction. Survivors keep their original values; suppressed
// pixels become 0.
ContourPrediction nms_thin(const ContourPrediction& pred);

}  // namespace rcnkit::bench
