#include "mobipred/geo.hpp"

#include <algorithm>
#include <cmath>

namespace mobipred {

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    constexpr double deg = 0.017453292519943295;  // pi / 180
    const double phi1 = lat1 * deg;
    const double phi2 = lat2 * deg;
    const double dphi = (lat2 - lat1) * deg;
    const double dlam = (lon2 - lon1) * deg;

    const double sp = std::sin(dphi / 2.0);
    const double sl = std::sin(dlam / 2.0);
    double a = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    a = std::clamp(a, 0.0, 1.0);
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(a));
}

}  // namespace mobipred
