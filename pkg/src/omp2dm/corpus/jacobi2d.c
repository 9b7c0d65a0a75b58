/* jacobi-2d: five-point stencil iterated over time steps; both sweeps are
   parallel loops inside the sequential time loop. */
#include <stdio.h>
#define TSTEPS 4
#define N 24

double A[N][N];
double B[N][N];

int main() {
    int t, i, j;
    for (i = 0; i < N; i++)
        for (j = 0; j < N; j++) {
            A[i][j] = (i * (j + 2) + 2) / (1.0 * N);
            B[i][j] = (i * (j + 3) + 3) / (1.0 * N);
        }

    for (t = 0; t < TSTEPS; t++) {
        #pragma omp parallel for private(j)
        for (i = 1; i < N - 1; i++)
            for (j = 1; j < N - 1; j++)
                B[i][j] = 0.2 * (A[i][j] + A[i][j - 1] + A[i][1 + j] + A[1 + i][j] + A[i - 1][j]);

        #pragma omp parallel for private(j) schedule(static)
        for (i = 1; i < N - 1; i++)
            for (j = 1; j < N - 1; j++)
                A[i][j] = B[i][j];
    }

    printf("jacobi2d A[1][1]=%f A[%d][%d]=%f\n", A[1][1], N / 2, N / 2, A[N / 2][N / 2]);
    return 0;
}
