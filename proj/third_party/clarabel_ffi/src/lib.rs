//! C entry point for the Clarabel interior-point solver, restricted to
//! linear objectives over products of PSD triangle cones.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use std::slice;

#[repr(C)]
pub struct WhrtClarabelSettings {
    pub max_iter: u32,
    pub time_limit: f64,
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
    pub tol_feas: f64,
    pub verbose: i32,
}

#[repr(C)]
pub struct WhrtClarabelResult {
    /// 0 solved, 1 almost solved, 2 primal infeasible, 3 dual infeasible,
    /// 4 iteration or time limit, 5 numerical failure, 6 bad input.
    pub status: i32,
    pub iterations: u32,
    pub objective: f64,
    pub solve_seconds: f64,
}

/// Solves  min c'x  s.t.  A x + s = b,  s in PSD_1 x ... x PSD_k,  where each
/// cone is the scaled upper-triangle vectorization of a dim_i x dim_i block.
/// A is m x n in CSC form with sorted row indices. x receives n values.
///
/// # Safety
/// All pointers must reference arrays of the documented lengths.
#[no_mangle]
pub unsafe extern "C" fn whrt_clarabel_solve(
    m: usize,
    n: usize,
    colptr: *const usize,
    rowval: *const usize,
    nzval: *const f64,
    b: *const f64,
    c: *const f64,
    num_cones: usize,
    cone_dims: *const usize,
    settings: *const WhrtClarabelSettings,
    x_out: *mut f64,
    result: *mut WhrtClarabelResult,
) {
    let res = &mut *result;
    let colptr = slice::from_raw_parts(colptr, n + 1).to_vec();
    let nnz = colptr[n];
    let rowval = slice::from_raw_parts(rowval, nnz).to_vec();
    let nzval = slice::from_raw_parts(nzval, nnz).to_vec();
    let b = slice::from_raw_parts(b, m);
    let c = slice::from_raw_parts(c, n);
    let cones: Vec<SupportedConeT<f64>> = slice::from_raw_parts(cone_dims, num_cones)
        .iter()
        .map(|&d| SupportedConeT::PSDTriangleConeT(d))
        .collect();
    let s = &*settings;

    let mut opts = DefaultSettings::<f64>::default();
    opts.max_iter = s.max_iter;
    opts.time_limit = s.time_limit;
    opts.tol_gap_abs = s.tol_gap_abs;
    opts.tol_gap_rel = s.tol_gap_rel;
    opts.tol_feas = s.tol_feas;
    opts.verbose = s.verbose != 0;

    let p = CscMatrix::<f64>::zeros((n, n));
    let a = CscMatrix::new(m, n, colptr, rowval, nzval);
    let mut solver = match DefaultSolver::new(&p, c, &a, b, &cones, opts) {
        Ok(solver) => solver,
        Err(_) => {
            res.status = 6;
            return;
        }
    };
    solver.solve();
    let sol = &solver.solution;
    res.status = match sol.status {
        SolverStatus::Solved => 0,
        SolverStatus::AlmostSolved => 1,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => 2,
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => 3,
        SolverStatus::MaxIterations | SolverStatus::MaxTime => 4,
        _ => 5,
    };
    res.iterations = sol.iterations;
    res.objective = sol.obj_val;
    res.solve_seconds = sol.solve_time;
    slice::from_raw_parts_mut(x_out, n).copy_from_slice(&sol.x);
}
