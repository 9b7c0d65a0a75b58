/* Triangular workload: iteration i costs about i inner steps. */
#include <stdio.h>
#define N 560

long out[N];

int main() {
    int i, k;
    #pragma omp parallel for private(k)
    for (i = 0; i < N; i++) {
        out[i] = 0;
        for (k = 0; k < i; k++)
            out[i] += (k * i) % 7;
    }
    printf("skewed out[%d]=%ld\n", N - 1, out[N - 1]);
    return 0;
}
