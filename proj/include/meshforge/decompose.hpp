#pragma once

#include "meshforge/mesh.hpp"

namespace meshforge {

/// Parameters for `rectangular(N)` reproducing `u` exactly (standard nodes).
/// Throws NonUnitaryError when ||U^dag U - I||_F exceeds 1e-8.
MeshParams decompose_rectangular(const TransferMatrix& u);

}  // namespace meshforge
