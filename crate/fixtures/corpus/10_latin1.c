/* caf� au lait: latin-1 byte in a comment */
#include <stdio.h>

static const char *name = "na�ve";

int show(void)
{
    return puts(name);
}
