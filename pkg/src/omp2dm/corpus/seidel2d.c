/* seidel-2d: in-place nine-point sweep.  The annotated loop reads rows
   that neighbouring iterations write, so it stays sequential; the
   checksum loop after it is distributed. */
#include <stdio.h>
#define TSTEPS 2
#define N 20

double A[N][N];

int main() {
    int t, i, j;
    double total;
    for (i = 0; i < N; i++)
        for (j = 0; j < N; j++)
            A[i][j] = (i * (j + 2) + 2) / (1.0 * N);

    for (t = 0; t <= TSTEPS - 1; t++) {
        #pragma omp parallel for private(j)
        for (i = 1; i <= N - 2; i++)
            for (j = 1; j <= N - 2; j++)
                A[i][j] = (A[i - 1][j - 1] + A[i - 1][j] + A[i - 1][j + 1]
                         + A[i][j - 1] + A[i][j] + A[i][j + 1]
                         + A[i + 1][j - 1] + A[i + 1][j] + A[i + 1][j + 1]) / 9.0;
    }

    total = 0.0;
    #pragma omp parallel for private(j) reduction(+:total)
    for (i = 0; i < N; i++)
        for (j = 0; j < N; j++)
            total += A[i][j];

    printf("seidel2d total=%f\n", total);
    return 0;
}
