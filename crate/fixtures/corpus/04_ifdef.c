#include <stdio.h>
#ifdef _WIN32
#include <windows.h>
#define SEP '\\'
#else
#include <unistd.h>
#define SEP '/'
#endif

static const char sep = SEP;

#if defined(VERBOSE)
static void trace(const char *msg)
{
    fprintf(stderr, "%s\n", msg);
}
#else
static void trace(const char *msg)
{
    (void)msg;
}
#endif

char separator(void)
{
    trace("separator");
    return sep;
}
