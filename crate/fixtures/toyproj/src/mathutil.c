#include "mathutil.h"

int sum_array(const int *v, int n)
{
    int total = 0;
    int i;
    for (i = 0; i < n; i++)
        total += v[i];
    return total;
}

int max_array(const int *v, int n)
{
    int best = v[0];
    int i;
    for (i = 1; i < n; i++) {
        if (v[i] > best)
            best = v[i];
    }
    return best;
}

int gcd(int a, int b)
{
    while (b != 0) {
        int t = a % b;
        a = b;
        b = t;
    }
    return a;
}
