#include <stdio.h>

#define MIN(a, b) ((a) < (b) ? (a) : (b))
#define LOG(msg) \
    do { fprintf(stderr, "%s\n", msg); } while (0)

#pragma once

int smallest(int a, int b, int c)
{
    LOG("smallest");
    return MIN(a, MIN(b, c));
}
