/* x is only read inside the loop; sum is written inside without a
   reduction clause and read afterwards. */
#include <stdio.h>
#define N 4

int x;
int sum;

int main() {
    int i;
    x = 2;
    sum = 0;
    #pragma omp parallel for
    for (i = 0; i < N; i++)
        sum = x * i;
    printf("%d\n", sum);
    return 0;
}
