#include <functional>
#include <numeric>
#include <vector>

static std::function<int(int)> doubler = [](int v) { return v * 2; };

int total(const std::vector<int> &v)
{
    auto add = [](int acc, int x) { return acc + x; };
    return std::accumulate(v.begin(), v.end(), 0, add);
}

int twice_total(const std::vector<int> &v)
{
    return doubler(total(v));
}
