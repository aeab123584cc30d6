#include <ostream>

struct Vec2 {
    float x, y;
};

Vec2 operator+(const Vec2 &a, const Vec2 &b)
{
    return {a.x + b.x, a.y + b.y};
}

std::ostream &operator<<(std::ostream &os, const Vec2 &v)
{
    return os << '(' << v.x << ", " << v.y << ')';
}
