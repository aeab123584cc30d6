#include <stdlib.h>

struct node {
    int value;
    struct node *next;
};

struct node *cons(int value, struct node *next)
{
    struct node *n = malloc(sizeof *n);
    if (!n)
        return NULL;
    n->value = value;
    n->next = next;
    return n;
}

size_t length(const struct node *n)
{
    size_t len = 0;
    for (; n; n = n->next)
        len++;
    return len;
}

void free_list(struct node *n)
{
    while (n) {
        struct node *next = n->next;
        free(n);
        n = next;
    }
}
