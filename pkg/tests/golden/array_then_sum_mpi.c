#include <mpi.h>
#include <stdio.h>
#include <math.h>

#ifndef min
#define min(a, b) ((a) < (b) ? (a) : (b))
#endif
#ifndef max
#define max(a, b) ((a) > (b) ? (a) : (b))
#endif

#define N 100

#define OMP2DM_TAG_TERMINATE_ALL 0
#define OMP2DM_TAG_WORK_B0 1
#define OMP2DM_TAG_DATA_IN_var 2
#define OMP2DM_TAG_RESULT_var 3
#define OMP2DM_TAG_TERMINATE_B0 5
#define OMP2DM_TAG_WORK_B1 7
#define OMP2DM_TAG_REDUCE_sum 10
#define OMP2DM_TAG_TERMINATE_B1 11
#define OMP2DM_TAG_DATA_IN_x 20

int var[N];
int sum;

int main(void) {
    int _omp2dm_rank, _omp2dm_size, _omp2dm_w, _omp2dm_src, _omp2dm_tag, _omp2dm_running, _omp2dm_released, _omp2dm_open;
    long _omp2dm_hdr[2], _omp2dm_trip, _omp2dm_chunk, _omp2dm_nw, _omp2dm_next, _omp2dm_active, _omp2dm_sent, _omp2dm_off, _omp2dm_cnt, _omp2dm_k, _omp2dm_init, _omp2dm_bound, _omp2dm_lo, _omp2dm_hi, _omp2dm_v0, _omp2dm_v1;
    MPI_Status _omp2dm_status;
    MPI_Init(NULL, NULL);
    MPI_Comm_rank(MPI_COMM_WORLD, &_omp2dm_rank);
    MPI_Comm_size(MPI_COMM_WORLD, &_omp2dm_size);
    _omp2dm_released = 0;
    if (_omp2dm_size < 2) {
        printf("omp2dm: at least 2 processes are required\n");
        MPI_Finalize();
        return 1;
    }
    if (_omp2dm_rank != 0) {
        _omp2dm_running = 1;
        _omp2dm_open = 0;
        while (_omp2dm_running) {
            MPI_Recv(&_omp2dm_hdr[0], 2, MPI_LONG, 0, MPI_ANY_TAG, MPI_COMM_WORLD, &_omp2dm_status);
            _omp2dm_tag = _omp2dm_status.MPI_TAG;
            if (_omp2dm_tag == OMP2DM_TAG_TERMINATE_ALL) {
                if (_omp2dm_open != 0) {
                    printf("omp2dm: unexpected tag %d\n", (int)(_omp2dm_tag));
                    MPI_Finalize();
                    return 1;
                }
                _omp2dm_running = 0;
            } else if (_omp2dm_tag == OMP2DM_TAG_WORK_B0) {
                if (_omp2dm_open != 0 && _omp2dm_open != 1) {
                    printf("omp2dm: unexpected tag %d\n", (int)(_omp2dm_tag));
                    MPI_Finalize();
                    return 1;
                }
                _omp2dm_open = 1;
                {
                    /* omp2dm: block 0: compute one chunk of i */
                    int i;
                    int x;
                    _omp2dm_off = _omp2dm_hdr[0];
                    _omp2dm_cnt = _omp2dm_hdr[1];
                    MPI_Recv(&x, 1, MPI_INT, 0, OMP2DM_TAG_DATA_IN_x, MPI_COMM_WORLD, &_omp2dm_status);
                    _omp2dm_init = 0;
                    _omp2dm_v0 = _omp2dm_init + _omp2dm_off * 1;
                    _omp2dm_v1 = _omp2dm_init + (_omp2dm_off + _omp2dm_cnt - 1) * 1;
                    _omp2dm_lo = min(_omp2dm_v0, _omp2dm_v1);
                    _omp2dm_hi = max(_omp2dm_v0, _omp2dm_v1);
                    _omp2dm_lo = max(_omp2dm_lo, 0);
                    _omp2dm_hi = min(_omp2dm_hi, N - 1);
                    if (_omp2dm_hi >= _omp2dm_lo)
                        MPI_Recv(&var[_omp2dm_lo], _omp2dm_hi - _omp2dm_lo + 1, MPI_INT, 0, OMP2DM_TAG_DATA_IN_var, MPI_COMM_WORLD, &_omp2dm_status);
                    for (_omp2dm_k = 0; _omp2dm_k < _omp2dm_cnt; _omp2dm_k = _omp2dm_k + 1) {
                        i = _omp2dm_init + (_omp2dm_off + _omp2dm_k) * 1;
                        var[i] = x * i + 1;
                    }
                    _omp2dm_hdr[0] = _omp2dm_off;
                    _omp2dm_hdr[1] = _omp2dm_cnt;
                    MPI_Send(&_omp2dm_hdr[0], 2, MPI_LONG, 0, OMP2DM_TAG_WORK_B0, MPI_COMM_WORLD);
                    _omp2dm_v0 = _omp2dm_init + _omp2dm_off * 1;
                    _omp2dm_v1 = _omp2dm_init + (_omp2dm_off + _omp2dm_cnt - 1) * 1;
                    _omp2dm_lo = min(_omp2dm_v0, _omp2dm_v1);
                    _omp2dm_hi = max(_omp2dm_v0, _omp2dm_v1);
                    _omp2dm_lo = max(_omp2dm_lo, 0);
                    _omp2dm_hi = min(_omp2dm_hi, N - 1);
                    if (_omp2dm_hi >= _omp2dm_lo)
                        MPI_Send(&var[_omp2dm_lo], _omp2dm_hi - _omp2dm_lo + 1, MPI_INT, 0, OMP2DM_TAG_RESULT_var, MPI_COMM_WORLD);
                }
            } else if (_omp2dm_tag == OMP2DM_TAG_TERMINATE_B0) {
                if (_omp2dm_open != 0 && _omp2dm_open != 1) {
                    printf("omp2dm: unexpected tag %d\n", (int)(_omp2dm_tag));
                    MPI_Finalize();
                    return 1;
                }
                _omp2dm_open = 0;
            } else if (_omp2dm_tag == OMP2DM_TAG_WORK_B1) {
                if (_omp2dm_open != 0 && _omp2dm_open != 2) {
                    printf("omp2dm: unexpected tag %d\n", (int)(_omp2dm_tag));
                    MPI_Finalize();
                    return 1;
                }
                _omp2dm_open = 2;
                {
                    /* omp2dm: block 1: compute one chunk of i */
                    int i;
                    int _omp2dm_part_sum = 0;
                    _omp2dm_off = _omp2dm_hdr[0];
                    _omp2dm_cnt = _omp2dm_hdr[1];
                    _omp2dm_init = 0;
                    _omp2dm_v0 = _omp2dm_init + _omp2dm_off * 1;
                    _omp2dm_v1 = _omp2dm_init + (_omp2dm_off + _omp2dm_cnt - 1) * 1;
                    _omp2dm_lo = min(_omp2dm_v0, _omp2dm_v1);
                    _omp2dm_hi = max(_omp2dm_v0, _omp2dm_v1);
                    _omp2dm_lo = max(_omp2dm_lo, 0);
                    _omp2dm_hi = min(_omp2dm_hi, N - 1);
                    if (_omp2dm_hi >= _omp2dm_lo)
                        MPI_Recv(&var[_omp2dm_lo], _omp2dm_hi - _omp2dm_lo + 1, MPI_INT, 0, OMP2DM_TAG_DATA_IN_var, MPI_COMM_WORLD, &_omp2dm_status);
                    for (_omp2dm_k = 0; _omp2dm_k < _omp2dm_cnt; _omp2dm_k = _omp2dm_k + 1) {
                        i = _omp2dm_init + (_omp2dm_off + _omp2dm_k) * 1;
                        _omp2dm_part_sum += var[i];
                    }
                    _omp2dm_hdr[0] = _omp2dm_off;
                    _omp2dm_hdr[1] = _omp2dm_cnt;
                    MPI_Send(&_omp2dm_hdr[0], 2, MPI_LONG, 0, OMP2DM_TAG_WORK_B1, MPI_COMM_WORLD);
                    MPI_Send(&_omp2dm_part_sum, 1, MPI_INT, 0, OMP2DM_TAG_REDUCE_sum, MPI_COMM_WORLD);
                }
            } else if (_omp2dm_tag == OMP2DM_TAG_TERMINATE_B1) {
                if (_omp2dm_open != 0 && _omp2dm_open != 2) {
                    printf("omp2dm: unexpected tag %d\n", (int)(_omp2dm_tag));
                    MPI_Finalize();
                    return 1;
                }
                _omp2dm_open = 0;
            } else {
                printf("omp2dm: unexpected tag %d\n", (int)(_omp2dm_tag));
                MPI_Finalize();
                return 1;
            }
        }
        MPI_Finalize();
        return 0;
    }
    int i;
    int x;
    x = 3;
    {
        /* omp2dm: block 0: dynamic schedule over i */
        _omp2dm_init = 0;
        _omp2dm_bound = N;
        _omp2dm_trip = 0;
        if (_omp2dm_bound > _omp2dm_init)
            _omp2dm_trip = _omp2dm_bound - _omp2dm_init;
        if (_omp2dm_trip > 0) {
            _omp2dm_nw = _omp2dm_size - 1;
            _omp2dm_chunk = max(1, (_omp2dm_trip + _omp2dm_nw * 10 - 1) / (_omp2dm_nw * 10));
            _omp2dm_next = 0;
            _omp2dm_active = 0;
            for (_omp2dm_w = 1; _omp2dm_w < _omp2dm_size; _omp2dm_w = _omp2dm_w + 1) {
                if (_omp2dm_next < _omp2dm_trip) {
                    _omp2dm_off = _omp2dm_next;
                    _omp2dm_cnt = min(_omp2dm_chunk, _omp2dm_trip - _omp2dm_next);
                    _omp2dm_hdr[0] = _omp2dm_off;
                    _omp2dm_hdr[1] = _omp2dm_cnt;
                    MPI_Send(&_omp2dm_hdr[0], 2, MPI_LONG, _omp2dm_w, OMP2DM_TAG_WORK_B0, MPI_COMM_WORLD);
                    MPI_Send(&x, 1, MPI_INT, _omp2dm_w, OMP2DM_TAG_DATA_IN_x, MPI_COMM_WORLD);
                    _omp2dm_v0 = _omp2dm_init + _omp2dm_off * 1;
                    _omp2dm_v1 = _omp2dm_init + (_omp2dm_off + _omp2dm_cnt - 1) * 1;
                    _omp2dm_lo = min(_omp2dm_v0, _omp2dm_v1);
                    _omp2dm_hi = max(_omp2dm_v0, _omp2dm_v1);
                    _omp2dm_lo = max(_omp2dm_lo, 0);
                    _omp2dm_hi = min(_omp2dm_hi, N - 1);
                    if (_omp2dm_hi >= _omp2dm_lo)
                        MPI_Send(&var[_omp2dm_lo], _omp2dm_hi - _omp2dm_lo + 1, MPI_INT, _omp2dm_w, OMP2DM_TAG_DATA_IN_var, MPI_COMM_WORLD);
                    _omp2dm_next = _omp2dm_next + _omp2dm_cnt;
                    _omp2dm_active = _omp2dm_active + 1;
                } else
                    MPI_Send(&_omp2dm_hdr[0], 0, MPI_LONG, _omp2dm_w, OMP2DM_TAG_TERMINATE_B0, MPI_COMM_WORLD);
            }
            while (_omp2dm_active > 0) {
                MPI_Recv(&_omp2dm_hdr[0], 2, MPI_LONG, MPI_ANY_SOURCE, OMP2DM_TAG_WORK_B0, MPI_COMM_WORLD, &_omp2dm_status);
                _omp2dm_src = _omp2dm_status.MPI_SOURCE;
                _omp2dm_off = _omp2dm_hdr[0];
                _omp2dm_cnt = _omp2dm_hdr[1];
                _omp2dm_v0 = _omp2dm_init + _omp2dm_off * 1;
                _omp2dm_v1 = _omp2dm_init + (_omp2dm_off + _omp2dm_cnt - 1) * 1;
                _omp2dm_lo = min(_omp2dm_v0, _omp2dm_v1);
                _omp2dm_hi = max(_omp2dm_v0, _omp2dm_v1);
                _omp2dm_lo = max(_omp2dm_lo, 0);
                _omp2dm_hi = min(_omp2dm_hi, N - 1);
                if (_omp2dm_hi >= _omp2dm_lo)
                    MPI_Recv(&var[_omp2dm_lo], _omp2dm_hi - _omp2dm_lo + 1, MPI_INT, _omp2dm_src, OMP2DM_TAG_RESULT_var, MPI_COMM_WORLD, &_omp2dm_status);
                _omp2dm_active = _omp2dm_active - 1;
                if (_omp2dm_next < _omp2dm_trip) {
                    _omp2dm_off = _omp2dm_next;
                    _omp2dm_cnt = min(_omp2dm_chunk, _omp2dm_trip - _omp2dm_next);
                    _omp2dm_hdr[0] = _omp2dm_off;
                    _omp2dm_hdr[1] = _omp2dm_cnt;
                    MPI_Send(&_omp2dm_hdr[0], 2, MPI_LONG, _omp2dm_src, OMP2DM_TAG_WORK_B0, MPI_COMM_WORLD);
                    MPI_Send(&x, 1, MPI_INT, _omp2dm_src, OMP2DM_TAG_DATA_IN_x, MPI_COMM_WORLD);
                    _omp2dm_v0 = _omp2dm_init + _omp2dm_off * 1;
                    _omp2dm_v1 = _omp2dm_init + (_omp2dm_off + _omp2dm_cnt - 1) * 1;
                    _omp2dm_lo = min(_omp2dm_v0, _omp2dm_v1);
                    _omp2dm_hi = max(_omp2dm_v0, _omp2dm_v1);
                    _omp2dm_lo = max(_omp2dm_lo, 0);
                    _omp2dm_hi = min(_omp2dm_hi, N - 1);
                    if (_omp2dm_hi >= _omp2dm_lo)
                        MPI_Send(&var[_omp2dm_lo], _omp2dm_hi - _omp2dm_lo + 1, MPI_INT, _omp2dm_src, OMP2DM_TAG_DATA_IN_var, MPI_COMM_WORLD);
                    _omp2dm_next = _omp2dm_next + _omp2dm_cnt;
                    _omp2dm_active = _omp2dm_active + 1;
                } else
                    MPI_Send(&_omp2dm_hdr[0], 0, MPI_LONG, _omp2dm_src, OMP2DM_TAG_TERMINATE_B0, MPI_COMM_WORLD);
            }
        }
    }
    sum = 0;
    {
        /* omp2dm: block 1: dynamic schedule over i */
        int _omp2dm_acc_sum, _omp2dm_part_sum;
        _omp2dm_init = 0;
        _omp2dm_bound = N;
        _omp2dm_trip = 0;
        if (_omp2dm_bound > _omp2dm_init)
            _omp2dm_trip = _omp2dm_bound - _omp2dm_init;
        if (_omp2dm_trip > 0) {
            _omp2dm_nw = _omp2dm_size - 1;
            _omp2dm_chunk = max(1, (_omp2dm_trip + _omp2dm_nw * 10 - 1) / (_omp2dm_nw * 10));
            _omp2dm_acc_sum = 0;
            _omp2dm_next = 0;
            _omp2dm_active = 0;
            for (_omp2dm_w = 1; _omp2dm_w < _omp2dm_size; _omp2dm_w = _omp2dm_w + 1) {
                if (_omp2dm_next < _omp2dm_trip) {
                    _omp2dm_off = _omp2dm_next;
                    _omp2dm_cnt = min(_omp2dm_chunk, _omp2dm_trip - _omp2dm_next);
                    _omp2dm_hdr[0] = _omp2dm_off;
                    _omp2dm_hdr[1] = _omp2dm_cnt;
                    MPI_Send(&_omp2dm_hdr[0], 2, MPI_LONG, _omp2dm_w, OMP2DM_TAG_WORK_B1, MPI_COMM_WORLD);
                    _omp2dm_v0 = _omp2dm_init + _omp2dm_off * 1;
                    _omp2dm_v1 = _omp2dm_init + (_omp2dm_off + _omp2dm_cnt - 1) * 1;
                    _omp2dm_lo = min(_omp2dm_v0, _omp2dm_v1);
                    _omp2dm_hi = max(_omp2dm_v0, _omp2dm_v1);
                    _omp2dm_lo = max(_omp2dm_lo, 0);
                    _omp2dm_hi = min(_omp2dm_hi, N - 1);
                    if (_omp2dm_hi >= _omp2dm_lo)
                        MPI_Send(&var[_omp2dm_lo], _omp2dm_hi - _omp2dm_lo + 1, MPI_INT, _omp2dm_w, OMP2DM_TAG_DATA_IN_var, MPI_COMM_WORLD);
                    _omp2dm_next = _omp2dm_next + _omp2dm_cnt;
                    _omp2dm_active = _omp2dm_active + 1;
                } else
                    MPI_Send(&_omp2dm_hdr[0], 0, MPI_LONG, _omp2dm_w, OMP2DM_TAG_TERMINATE_B1, MPI_COMM_WORLD);
            }
            while (_omp2dm_active > 0) {
                MPI_Recv(&_omp2dm_hdr[0], 2, MPI_LONG, MPI_ANY_SOURCE, OMP2DM_TAG_WORK_B1, MPI_COMM_WORLD, &_omp2dm_status);
                _omp2dm_src = _omp2dm_status.MPI_SOURCE;
                _omp2dm_off = _omp2dm_hdr[0];
                _omp2dm_cnt = _omp2dm_hdr[1];
                MPI_Recv(&_omp2dm_part_sum, 1, MPI_INT, _omp2dm_src, OMP2DM_TAG_REDUCE_sum, MPI_COMM_WORLD, &_omp2dm_status);
                _omp2dm_acc_sum = _omp2dm_acc_sum + _omp2dm_part_sum;
                _omp2dm_active = _omp2dm_active - 1;
                if (_omp2dm_next < _omp2dm_trip) {
                    _omp2dm_off = _omp2dm_next;
                    _omp2dm_cnt = min(_omp2dm_chunk, _omp2dm_trip - _omp2dm_next);
                    _omp2dm_hdr[0] = _omp2dm_off;
                    _omp2dm_hdr[1] = _omp2dm_cnt;
                    MPI_Send(&_omp2dm_hdr[0], 2, MPI_LONG, _omp2dm_src, OMP2DM_TAG_WORK_B1, MPI_COMM_WORLD);
                    _omp2dm_v0 = _omp2dm_init + _omp2dm_off * 1;
                    _omp2dm_v1 = _omp2dm_init + (_omp2dm_off + _omp2dm_cnt - 1) * 1;
                    _omp2dm_lo = min(_omp2dm_v0, _omp2dm_v1);
                    _omp2dm_hi = max(_omp2dm_v0, _omp2dm_v1);
                    _omp2dm_lo = max(_omp2dm_lo, 0);
                    _omp2dm_hi = min(_omp2dm_hi, N - 1);
                    if (_omp2dm_hi >= _omp2dm_lo)
                        MPI_Send(&var[_omp2dm_lo], _omp2dm_hi - _omp2dm_lo + 1, MPI_INT, _omp2dm_src, OMP2DM_TAG_DATA_IN_var, MPI_COMM_WORLD);
                    _omp2dm_next = _omp2dm_next + _omp2dm_cnt;
                    _omp2dm_active = _omp2dm_active + 1;
                } else
                    MPI_Send(&_omp2dm_hdr[0], 0, MPI_LONG, _omp2dm_src, OMP2DM_TAG_TERMINATE_B1, MPI_COMM_WORLD);
            }
            sum = sum + _omp2dm_acc_sum;
        }
    }
    if (!_omp2dm_released) {
        for (_omp2dm_w = 1; _omp2dm_w < _omp2dm_size; _omp2dm_w = _omp2dm_w + 1)
            MPI_Send(&_omp2dm_hdr[0], 0, MPI_LONG, _omp2dm_w, OMP2DM_TAG_TERMINATE_ALL, MPI_COMM_WORLD);
        _omp2dm_released = 1;
    }
    printf("sum=%d\n", sum);
    {
        if (!_omp2dm_released) {
            for (_omp2dm_w = 1; _omp2dm_w < _omp2dm_size; _omp2dm_w = _omp2dm_w + 1)
                MPI_Send(&_omp2dm_hdr[0], 0, MPI_LONG, _omp2dm_w, OMP2DM_TAG_TERMINATE_ALL, MPI_COMM_WORLD);
            _omp2dm_released = 1;
        }
        MPI_Finalize();
        return 0;
    }
}
