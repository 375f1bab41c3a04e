#pragma once

namespace mobipred {

// Mean Earth radius, km.
constexpr double kEarthRadiusKm = 6371.0088;

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

// Great-circle distance in km between two points given in degrees.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

inline double haversine_km(const LatLon& a, const LatLon& b) {
    return haversine_km(a.lat, a.lon, b.lat, b.lon);
}

}  // namespace mobipred
