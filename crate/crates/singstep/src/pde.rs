//! Finite-difference solvers for `u_t = u_xx + kappa u + f` on `(0, L)` with
//! homogeneous Dirichlet data.
//!
//! Space uses the 3-point Laplacian on `M - 1` interior nodes; each time step
//! is one tridiagonal solve against a matrix factored once per run.

use crate::error::{Error, Result};
use crate::model::{Benchmark, ManufacturedProblem, SchemeId, TimeGrid};
use crate::tridiag::Tridiagonal;

/// Uniform spatial grid with `M` cells on `(0, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceGrid {
    cells: usize,
    length: f64,
    h: f64,
}

impl SpaceGrid {
    pub fn new(cells: usize, length: f64) -> Result<Self> {
        crate::error::check_positive("L", length)?;
        if cells < 4 {
            return Err(Error::InvalidParameter {
                name: "M",
                value: cells as f64,
                reason: "need at least 4 cells",
            });
        }
        Ok(Self {
            cells,
            length,
            h: length / cells as f64,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of unknowns, `M - 1`.
    pub fn interior(&self) -> usize {
        self.cells - 1
    }

    /// Interior node `x_i = i h`, `1 <= i <= M - 1`.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..self.cells).map(|i| self.x(i)).collect()
    }

    /// `sqrt(h * sum v_i^2)`.
    pub fn l2_norm(&self, v: &[f64]) -> f64 {
        (self.h * v.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }
}

/// Discrete operator `Delta_h + kappa I` on the interior nodes.
pub fn assemble_operator(space: &SpaceGrid, kappa: f64) -> Tridiagonal {
    let ih2 = 1.0 / (space.h() * space.h());
    Tridiagonal::constant(space.interior(), ih2, -2.0 * ih2 + kappa, ih2)
}

/// All time levels of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTrace {
    pub space: SpaceGrid,
    pub time: TimeGrid,
    /// `frames[n][i-1] = U^n_i`
    pub frames: Vec<Vec<f64>>,
    pub scheme: SchemeId,
}

/// Marches `U' = A U + f` with a classical scheme.
///
/// `forcing(t, out)` fills the interior forcing at time `t`; `observe(n, U^n)`
/// sees every level including `n = 0`.
pub fn march_linear<F, O>(
    scheme: SchemeId,
    op: &Tridiagonal,
    time: &TimeGrid,
    u0: &[f64],
    mut forcing: F,
    mut observe: O,
) -> Result<()>
where
    F: FnMut(f64, &mut [f64]),
    O: FnMut(usize, &[f64]),
{
    let tau = time.tau();
    let m = u0.len();
    assert_eq!(m, op.dim());
    let steps = time.steps();
    let mut cur = u0.to_vec();
    let mut f = vec![0.0; m];
    observe(0, &cur);
    match scheme {
        SchemeId::IE => {
            let lhs = op.affine(1.0, -tau).factor()?;
            for n in 1..=steps {
                forcing(time.t(n), &mut f);
                for (u, fi) in cur.iter_mut().zip(&f) {
                    *u += tau * fi;
                }
                lhs.solve_in_place(&mut cur);
                observe(n, &cur);
            }
        }
        SchemeId::CN => {
            let lhs = op.affine(1.0, -0.5 * tau).factor()?;
            let mut au = vec![0.0; m];
            for n in 1..=steps {
                op.apply(&cur, &mut au);
                forcing(time.t_half(n), &mut f);
                for i in 0..m {
                    cur[i] += 0.5 * tau * au[i] + tau * f[i];
                }
                lhs.solve_in_place(&mut cur);
                observe(n, &cur);
            }
        }
        SchemeId::BDF2 => {
            let start = op.affine(1.0, -tau).factor()?;
            let lhs = op.affine(1.5, -tau).factor()?;
            let mut prev = cur.clone();
            forcing(time.t(1), &mut f);
            for (u, fi) in cur.iter_mut().zip(&f) {
                *u += tau * fi;
            }
            start.solve_in_place(&mut cur);
            observe(1, &cur);
            for n in 2..=steps {
                forcing(time.t(n), &mut f);
                // prev <- 2 U^{n-1} - U^{n-2}/2 + tau f^n, then solve in place
                for i in 0..m {
                    prev[i] = 2.0 * cur[i] - 0.5 * prev[i] + tau * f[i];
                }
                lhs.solve_in_place(&mut prev);
                std::mem::swap(&mut prev, &mut cur);
                observe(n, &cur);
            }
        }
        SchemeId::L1 => {
            return Err(Error::SchemeMismatch {
                scheme,
                reason: "use the L1 solver for the Caputo problem",
            })
        }
    }
    Ok(())
}

fn check_problem(problem: &ManufacturedProblem, space: &SpaceGrid, scheme: SchemeId) -> Result<()> {
    if problem.kind != Benchmark::Diffusion {
        return Err(Error::SchemeMismatch {
            scheme,
            reason: "classical solver needs the diffusion benchmark",
        });
    }
    if problem.params.domain.length() != Some(space.length()) {
        return Err(Error::DomainError(format!(
            "space grid length {} does not match the problem domain",
            space.length()
        )));
    }
    Ok(())
}

/// Step-size guard of the scalar schemes applied to the slowest mode, i.e.
/// with kappa replaced by `kappa - lambda1`.
pub fn check_step_size(scheme: SchemeId, kappa_eff: f64, tau: f64) -> Result<()> {
    let limit = match scheme {
        SchemeId::IE | SchemeId::BDF2 => 1.0,
        SchemeId::CN => 2.0,
        SchemeId::L1 => return Ok(()),
    };
    let kappa_tau = kappa_eff * tau;
    if kappa_tau < limit {
        Ok(())
    } else {
        Err(Error::StepSizeViolation {
            scheme,
            kappa_tau,
            limit,
        })
    }
}

/// Marches the diffusion benchmark and reports every level to `observe`.
pub fn march_pde(
    problem: &ManufacturedProblem,
    space: &SpaceGrid,
    time: &TimeGrid,
    scheme: SchemeId,
    observe: impl FnMut(usize, &[f64]),
) -> Result<()> {
    check_problem(problem, space, scheme)?;
    check_step_size(scheme, problem.kappa() - problem.lambda1(), time.tau())?;
    let op = assemble_operator(space, problem.kappa());
    let profile: Vec<f64> = space.interior_nodes().iter().map(|&x| problem.profile(x)).collect();
    let u0: Vec<f64> = space.interior_nodes().iter().map(|&x| problem.u0(x)).collect();
    march_linear(
        scheme,
        &op,
        time,
        &u0,
        |t, out| {
            let ft = problem.forcing_time(t);
            for (o, p) in out.iter_mut().zip(&profile) {
                *o = ft * p;
            }
        },
        observe,
    )
}

/// Full trace of the diffusion benchmark.
pub fn solve_pde(
    problem: &ManufacturedProblem,
    space: &SpaceGrid,
    time: &TimeGrid,
    scheme: SchemeId,
) -> Result<FieldTrace> {
    let mut frames = Vec::with_capacity(time.steps() + 1);
    march_pde(problem, space, time, scheme, |_, u| frames.push(u.to_vec()))?;
    Ok(FieldTrace {
        space: *space,
        time: *time,
        frames,
        scheme,
    })
}

/// `||U - u(t)||_h` for one frame.
pub fn frame_error(problem: &ManufacturedProblem, space: &SpaceGrid, t: f64, frame: &[f64]) -> f64 {
    let s: f64 = frame
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let d = u - problem.exact(t, space.x(i + 1));
            d * d
        })
        .sum();
    (space.h() * s).sqrt()
}

/// Discrete L2 error at every level of a trace.
pub fn discrete_l2_error(trace: &FieldTrace, problem: &ManufacturedProblem) -> Vec<f64> {
    trace
        .frames
        .iter()
        .enumerate()
        .map(|(n, u)| frame_error(problem, &trace.space, trace.time.t(n), u))
        .collect()
}

/// Error sequence without keeping the frames.
pub fn pde_errors(
    problem: &ManufacturedProblem,
    space: &SpaceGrid,
    time: &TimeGrid,
    scheme: SchemeId,
) -> Result<Vec<f64>> {
    let mut errs = Vec::with_capacity(time.steps() + 1);
    march_pde(problem, space, time, scheme, |n, u| {
        errs.push(frame_error(problem, space, time.t(n), u))
    })?;
    Ok(errs)
}
