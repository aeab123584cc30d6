/* old style definitions */
int add(a, b)
int a;
int b;
{
    return a + b;
}

long square(x)
long x;
{ return x * x; }
