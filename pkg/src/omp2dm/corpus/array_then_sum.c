/* Two annotated blocks: an array computation and a reduction. */
#include <stdio.h>
#define N 100

int var[N];
int sum;

int main() {
    int i;
    int x;
    x = 3;
    #pragma omp parallel for target device(mpi)
    for (i = 0; i < N; i++)
        var[i] = x * i + 1;

    sum = 0;
    #pragma omp parallel for reduction(+:sum) target device(mpi)
    for (i = 0; i < N; i++)
        sum += var[i];

    printf("sum=%d\n", sum);
    return 0;
}
