#include <stdio.h>

static int counter = 0;

int next_id(void)
{
    return ++counter;
}

int main(void)
{
    printf("%d\n", next_id());
    return 0;
}
