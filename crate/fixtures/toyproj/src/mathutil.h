#ifndef MATHUTIL_H
#define MATHUTIL_H

int sum_array(const int *v, int n);
int max_array(const int *v, int n);
int gcd(int a, int b);

#endif
