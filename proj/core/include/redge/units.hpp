#pragma once

#include <cmath>

namespace redge {

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
inline double watts_to_mw(double w) { return w * 1e3; }
inline double mw_to_watts(double mw) { return mw * 1e-3; }

}  // namespace redge
