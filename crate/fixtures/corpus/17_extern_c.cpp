#include <cstdio>

extern "C" {
int c_entry(int x);

int c_entry(int x)
{
    return x * 2;
}
}

extern "C" int single_linkage(void)
{
    return c_entry(21);
}
