/* 2mm: D = alpha * A * B * C + beta * D in two parallel products. */
#include <stdio.h>
#define NI 16
#define NJ 16
#define NK 16
#define NL 16

double A[NI][NK];
double B[NK][NJ];
double C[NJ][NL];
double D[NI][NL];
double tmp[NI][NJ];

int main() {
    int i, j, k;
    double alpha, beta;
    alpha = 1.5;
    beta = 1.2;
    for (i = 0; i < NI; i++)
        for (k = 0; k < NK; k++)
            A[i][k] = ((i * k + 1) % NI) / (1.0 * NI);
    for (k = 0; k < NK; k++)
        for (j = 0; j < NJ; j++)
            B[k][j] = ((k * (j + 1)) % NJ) / (1.0 * NJ);
    for (j = 0; j < NJ; j++)
        for (k = 0; k < NL; k++)
            C[j][k] = ((j * (k + 3) + 1) % NL) / (1.0 * NL);
    for (i = 0; i < NI; i++)
        for (k = 0; k < NL; k++)
            D[i][k] = ((i * (k + 2)) % NK) / (1.0 * NK);

    #pragma omp parallel for private(j, k)
    for (i = 0; i < NI; i++)
        for (j = 0; j < NJ; j++) {
            tmp[i][j] = 0.0;
            for (k = 0; k < NK; k++)
                tmp[i][j] += alpha * A[i][k] * B[k][j];
        }

    #pragma omp parallel for private(j, k) schedule(static)
    for (i = 0; i < NI; i++)
        for (j = 0; j < NL; j++) {
            D[i][j] *= beta;
            for (k = 0; k < NJ; k++)
                D[i][j] += tmp[i][k] * C[k][j];
        }

    printf("2mm D[0][0]=%f D[%d][%d]=%f\n", D[0][0], NI - 1, NL - 1, D[NI - 1][NL - 1]);
    return 0;
}
