#include <cmath>

namespace geo {
struct Point { double x, y; };
double norm(const Point &p);
}

namespace {
int calls = 0;

double sq(double v)
{
    ++calls;
    return v * v;
}
}

double geo::norm(const geo::Point &p)
{
    return std::sqrt(sq(p.x) + sq(p.y));
}
