#pragma once

// Umbrella header for the decoy-state MDI-QKD analysis toolkit.

#include "mdiqkd/channel_model.hpp"
#include "mdiqkd/decoy_bounds.hpp"
#include "mdiqkd/finite_key.hpp"
#include "mdiqkd/io.hpp"
#include "mdiqkd/key_rate.hpp"
#include "mdiqkd/photon_number.hpp"
#include "mdiqkd/types.hpp"
