#pragma once

#include <cmath>

namespace wavereg {

// Pixel-center convention used across the project: integer coordinates sit on
// pixel centers, origin at the top-left pixel, x grows rightward along a row,
// y grows downward across rows.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point a, Point b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace wavereg
