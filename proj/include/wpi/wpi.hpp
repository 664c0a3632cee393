#pragma once

#include "wpi/abc.hpp"
#include "wpi/bounds.hpp"
#include "wpi/chain_tools.hpp"
#include "wpi/clt.hpp"
#include "wpi/conductance.hpp"
#include "wpi/conjugate.hpp"
#include "wpi/error.hpp"
#include "wpi/finite_kernel.hpp"
#include "wpi/heavy_tail.hpp"
#include "wpi/imh.hpp"
#include "wpi/level_walk.hpp"
#include "wpi/monotone_rate.hpp"
#include "wpi/numeric.hpp"
#include "wpi/parallel.hpp"
#include "wpi/rate_calculus.hpp"
#include "wpi/rwm.hpp"
#include "wpi/serialization.hpp"
