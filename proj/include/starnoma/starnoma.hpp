// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "active_bf.hpp"
#include "ao.hpp"
#include "assignment.hpp"
#include "channel.hpp"
#include "checks.hpp"
#include "config.hpp"
#include "core.hpp"
#include "harness.hpp"
#include "oracle.hpp"
#include "pairing.hpp"
#include "passive_bf.hpp"
#include "random.hpp"
#include "rates.hpp"
#include "resource_alloc.hpp"
#include "sca.hpp"
#include "schemes.hpp"
#include "serialize.hpp"
#include "state.hpp"
#include "units.hpp"
