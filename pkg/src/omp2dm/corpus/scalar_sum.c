/* x is set before the loop and only read inside; sum accumulates inside
   and is read after the loop. */
#include <stdio.h>
#define N 4

int x;
int sum;

int main() {
    int i;
    x = 2;
    sum = 0;
    #pragma omp parallel for reduction(+:sum)
    for (i = 0; i < N; i++)
        sum += x * i;
    printf("%d\n", sum);
    return 0;
}
