#include <stdint.h>

static inline uint32_t rotl(uint32_t x, int k)
{
    return (x << k) | (x >> (32 - k));
}

static uint32_t state[2] = { 1u, 2u };

uint32_t next_rand(void)
{
    uint32_t s0 = state[0];
    uint32_t s1 = state[1];
    uint32_t result = s0 + s1;
    s1 ^= s0;
    state[0] = rotl(s0, 26) ^ s1 ^ (s1 << 9);
    state[1] = rotl(s1, 13);
    return result;
}
