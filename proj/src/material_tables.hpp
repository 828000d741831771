#pragma once

#include <array>

#include "patchant/materials.hpp"

namespace patchant::detail {

extern const std::array<TablePoint, 49> kGoldJohnsonChristy;
extern const std::array<TablePoint, 11> kSiliconTable;

}  // namespace patchant::detail
