#include <algorithm>
#include <vector>

template <typename T>
T clamp_to(T v, T lo, T hi)
{
    return std::max(lo, std::min(v, hi));
}

template <typename T>
struct Box {
    T value;
};

int clamp_all(std::vector<int> &v)
{
    for (auto &x : v)
        x = clamp_to(x, 0, 100);
    return static_cast<int>(v.size());
}
