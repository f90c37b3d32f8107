// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

namespace starnoma {

// All internal computation is in linear units; dB/dBm only at the boundary.

inline double dbm_to_watts(double level_dbm) { return std::pow(10.0, (level_dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Power gain of a link with the given loss, i.e. 10^(-loss/10).
inline double loss_db_to_gain(double loss_db) { return std::pow(10.0, -0.1 * loss_db); }

} // namespace starnoma
