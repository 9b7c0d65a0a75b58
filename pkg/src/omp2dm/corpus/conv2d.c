/* 2-D convolution with a 3x3 stencil; also keeps the last computed row
   and counts large outputs. */
#include <stdio.h>
#define NI 24
#define NJ 24

double A[NI][NJ];
double B[NI][NJ];
double edge[NJ];

int main() {
    int i, j;
    long large;
    double c11, c12, c13, c21, c22, c23, c31, c32, c33;
    c11 = 0.2; c21 = 0.5; c31 = -0.8;
    c12 = -0.3; c22 = 0.6; c32 = -0.9;
    c13 = 0.4; c23 = 0.7; c33 = 0.10;
    for (i = 0; i < NI; i++)
        for (j = 0; j < NJ; j++)
            A[i][j] = ((i + 1) * (j + 2) % 13) / 13.0;

    large = 3;
    #pragma omp parallel for private(j) reduction(+:large) schedule(guided)
    for (i = 1; i < NI - 1; i++) {
        for (j = 1; j < NJ - 1; j++) {
            B[i][j] = c11 * A[i - 1][j - 1] + c12 * A[i][j - 1] + c13 * A[i + 1][j - 1]
                    + c21 * A[i - 1][j] + c22 * A[i][j] + c23 * A[i + 1][j]
                    + c31 * A[i - 1][j + 1] + c32 * A[i][j + 1] + c33 * A[i + 1][j + 1];
            edge[j] = B[i][j];
            if (B[i][j] > 0.0)
                large += 1;
        }
    }

    printf("conv2d B[1][1]=%f edge[1]=%f large=%ld\n", B[1][1], edge[1], large);
    return 0;
}
