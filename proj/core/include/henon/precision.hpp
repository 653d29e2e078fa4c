#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace henon {

/// About 100 significant digits; used wherever widths or scales fall far
/// below double resolution (Cantor slices, renormalized frames).
using HighReal = boost::multiprecision::cpp_bin_float_100;

}  // namespace henon
