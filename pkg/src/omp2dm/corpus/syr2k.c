/* syr2k: C = alpha * (A * B^T + B * A^T) + beta * C on the lower triangle. */
#include <stdio.h>
#define N 16
#define M 12

double A[N][M];
double B[N][M];
double C[N][N];

int main() {
    int i, j, k;
    double alpha, beta;
    alpha = 1.5;
    beta = 1.2;
    for (i = 0; i < N; i++)
        for (j = 0; j < M; j++) {
            A[i][j] = ((i * j + 1) % N) / (1.0 * N);
            B[i][j] = ((i * j + 2) % M) / (1.0 * M);
        }
    for (i = 0; i < N; i++)
        for (j = 0; j < N; j++)
            C[i][j] = ((i * j + 3) % N) / (1.0 * M);

    #pragma omp parallel for private(j, k) schedule(static)
    for (i = 0; i < N; i++)
        for (j = 0; j <= i; j++) {
            C[i][j] *= beta;
            for (k = 0; k < M; k++)
                C[i][j] += A[j][k] * alpha * B[i][k] + B[j][k] * alpha * A[i][k];
        }

    printf("syr2k C[%d][0]=%f\n", N - 1, C[N - 1][0]);
    return 0;
}
