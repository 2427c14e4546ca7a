#include "storeloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace storeloc {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

GeoPoint::GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
    if (!std::isfinite(lat) || !std::isfinite(lon)) {
        throw std::invalid_argument("GeoPoint: non-finite coordinate");
    }
    if (lat < -90.0 || lat > 90.0) {
        throw std::invalid_argument("GeoPoint: latitude out of range: " + std::to_string(lat));
    }
    if (lon < -180.0 || lon > 180.0) {
        throw std::invalid_argument("GeoPoint: longitude out of range: " + std::to_string(lon));
    }
}

bool is_finite(const PlanarPoint& p) {
    return std::isfinite(p.x) && std::isfinite(p.y);
}

PlanarPoint project(const GeoPoint& g, const Region& region) {
    const GeoPoint& o = region.origin;
    const double x = kEarthRadiusM * (g.lon() - o.lon()) * kDegToRad * std::cos(o.lat() * kDegToRad);
    const double y = kEarthRadiusM * (g.lat() - o.lat()) * kDegToRad;
    return {x, y};
}

GeoPoint unproject(const PlanarPoint& p, const Region& region) {
    if (!is_finite(p)) {
        throw std::invalid_argument("unproject: non-finite planar point");
    }
    const GeoPoint& o = region.origin;
    const double lat = o.lat() + p.y / kEarthRadiusM / kDegToRad;
    const double lon = o.lon() + p.x / (kEarthRadiusM * std::cos(o.lat() * kDegToRad)) / kDegToRad;
    return GeoPoint(lat, lon);
}

double dist(const PlanarPoint& a, const PlanarPoint& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

double haversine(const GeoPoint& a, const GeoPoint& b) {
    const double dlat = (b.lat() - a.lat()) * kDegToRad;
    const double dlon = (b.lon() - a.lon()) * kDegToRad;
    const double s = std::sin(dlat / 2);
    const double t = std::sin(dlon / 2);
    const double h = s * s + std::cos(a.lat() * kDegToRad) * std::cos(b.lat() * kDegToRad) * t * t;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace storeloc
