#ifndef PCAST_GEOMETRY_HPP
#define PCAST_GEOMETRY_HPP

#include <cmath>

namespace pcast {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline Point lerp(const Point& a, const Point& b, double t) {
  return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
}

// Axis-aligned rectangle, [x0,x1] x [y0,y1].
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }

  bool valid() const { return x1 > x0 && y1 > y0; }

  bool contains(const Point& p, double eps = 1e-9) const {
    return p.x >= x0 - eps && p.x <= x1 + eps && p.y >= y0 - eps && p.y <= y1 + eps;
  }

  bool contains(const Rect& r, double eps = 1e-9) const {
    return r.x0 >= x0 - eps && r.x1 <= x1 + eps && r.y0 >= y0 - eps && r.y1 <= y1 + eps;
  }
};

}  // namespace pcast

#endif
