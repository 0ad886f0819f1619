#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sacf {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Axis-aligned box over half-open intervals [x_min, x_max) x [y_min, y_max).
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    Point center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }

    bool valid() const {
        return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
               std::isfinite(y_max) && x_min >= 0.0 && y_min >= 0.0 && x_min < x_max &&
               y_min < y_max;
    }

    void validate(const char* what = "BBox") const {
        if (!valid()) throw std::invalid_argument(std::string(what) + ": invalid box");
    }

    bool operator==(const BBox&) const = default;
};

inline bool point_in_box(const Point& p, const BBox& b) {
    return p.x >= b.x_min && p.x < b.x_max && p.y >= b.y_min && p.y < b.y_max;
}

inline bool boxes_overlap(const BBox& a, const BBox& b) {
    return a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max;
}

inline double iou(const BBox& a, const BBox& b) {
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

inline bool point_in_union(const Point& p, const std::vector<BBox>& boxes) {
    for (const auto& b : boxes)
        if (point_in_box(p, b)) return true;
    return false;
}

}  // namespace sacf
