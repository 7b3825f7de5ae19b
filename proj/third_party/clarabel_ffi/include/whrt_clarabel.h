#pragma once

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct {
  uint32_t max_iter;
  double time_limit;
  double tol_gap_abs;
  double tol_gap_rel;
  double tol_feas;
  int32_t verbose;
} WhrtClarabelSettings;

/* status: 0 solved, 1 almost solved, 2 primal infeasible, 3 dual infeasible,
   4 iteration or time limit, 5 numerical failure, 6 bad input. */
typedef struct {
  int32_t status;
  uint32_t iterations;
  double objective;
  double solve_seconds;
} WhrtClarabelResult;

/* min c'x  s.t.  A x + s = b,  s in PSD_1 x ... x PSD_k (scaled upper-triangle
   vectorization). A is m x n CSC with sorted row indices. */
void whrt_clarabel_solve(size_t m, size_t n, const size_t* colptr, const size_t* rowval, const double* nzval,
                         const double* b, const double* c, size_t num_cones, const size_t* cone_dims,
                         const WhrtClarabelSettings* settings, double* x_out, WhrtClarabelResult* result);

#ifdef __cplusplus
}
#endif
