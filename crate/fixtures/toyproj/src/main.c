#include <stdio.h>
#include "mathutil.h"

static int table[5] = {3, 1, 4, 1, 5};

void print_stats(const int *v, int n)
{
    printf("sum=%d\n", sum_array(v, n));
    printf("max=%d\n", max_array(v, n));
    printf("gcd=%d\n", gcd(12, 18));
}

int main(void)
{
    print_stats(table, 5);
    return 0;
}
