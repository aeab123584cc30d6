#include <stdlib.h>
#include <string.h>

#define STACK_MAX 64

typedef struct {
    int items[STACK_MAX];
    size_t top;
} stack_t_;

static stack_t_ g_stack;

/* push one value; returns 0 when full */
int push(int v)
{
    if (g_stack.top >= STACK_MAX)
        return 0;
    g_stack.items[g_stack.top++] = v;
    return 1;
}

int pop(int *out)
{
    if (g_stack.top == 0) return 0;
    *out = g_stack.items[--g_stack.top];
    return 1;
}

void reset(void) { memset(&g_stack, 0, sizeof g_stack); }
