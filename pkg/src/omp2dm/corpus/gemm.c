/* gemm: C = alpha * A * B + beta * C, then two checksums. */
#include <stdio.h>
#define NI 16
#define NJ 16
#define NK 16

double A[NI][NK];
double B[NK][NJ];
double C[NI][NJ];
double alpha;
double beta;

int main() {
    int i, j, k;
    double checksum;
    long big;
    alpha = 1.5;
    beta = 1.2;
    for (i = 0; i < NI; i++)
        for (k = 0; k < NK; k++)
            A[i][k] = ((i * k + 1) % NI) / (1.0 * NI);
    for (k = 0; k < NK; k++)
        for (j = 0; j < NJ; j++)
            B[k][j] = ((k * (j + 1)) % NJ) / (1.0 * NJ);
    for (i = 0; i < NI; i++)
        for (j = 0; j < NJ; j++)
            C[i][j] = ((i * (j + 2)) % NK) / (1.0 * NK);

    #pragma omp parallel for private(j, k)
    for (i = 0; i < NI; i++) {
        for (j = 0; j < NJ; j++) {
            C[i][j] = C[i][j] * beta;
            for (k = 0; k < NK; k++)
                C[i][j] += alpha * A[i][k] * B[k][j];
        }
    }

    checksum = 1.0;
    #pragma omp parallel for private(j) reduction(+:checksum) schedule(static)
    for (i = 0; i < NI; i++)
        for (j = 0; j < NJ; j++)
            checksum += C[i][j];

    big = 7;
    #pragma omp parallel for private(j) reduction(+:big)
    for (i = 0; i < NI; i++)
        for (j = 0; j < NJ; j++)
            if (C[i][j] > 2.0)
                big++;

    printf("gemm checksum %f big %ld\n", checksum, big);
    return 0;
}
