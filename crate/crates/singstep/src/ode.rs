//! Scalar integrators for `u' = kappa u + f(t)`.
//!
//! The `*_trace` functions take an arbitrary forcing closure; `step_*` wrap
//! them for the manufactured ODE benchmark.

use crate::error::{Error, Result};
use crate::model::{Benchmark, ManufacturedProblem, SchemeId, TimeGrid};

/// Values `U^0..U^N` produced by one integration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrace {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub scheme: SchemeId,
}

impl SolutionTrace {
    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("trace is never empty")
    }

    /// Pointwise errors `|U^n - u(t_n)|`.
    pub fn errors(&self, exact: impl Fn(f64) -> f64) -> Vec<f64> {
        self.values
            .iter()
            .enumerate()
            .map(|(n, u)| (u - exact(self.grid.t(n))).abs())
            .collect()
    }
}

fn guard(scheme: SchemeId, kappa_tau: f64, limit: f64) -> Result<()> {
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

/// Implicit Euler: `U^n = (U^{n-1} + tau f(t_n)) / (1 - kappa tau)`.
pub fn ie_trace(
    kappa: f64,
    u0: f64,
    grid: &TimeGrid,
    f: impl Fn(f64) -> f64,
) -> Result<SolutionTrace> {
    let tau = grid.tau();
    guard(SchemeId::IE, kappa * tau, 1.0)?;
    let denom = 1.0 - kappa * tau;
    let mut values = Vec::with_capacity(grid.steps() + 1);
    values.push(u0);
    let mut u = u0;
    for n in 1..=grid.steps() {
        u = (u + tau * f(grid.t(n))) / denom;
        values.push(u);
    }
    Ok(SolutionTrace {
        grid: *grid,
        values,
        scheme: SchemeId::IE,
    })
}

/// Crank–Nicolson with the forcing sampled at the half node `t_{n-1/2}`.
pub fn cn_trace(
    kappa: f64,
    u0: f64,
    grid: &TimeGrid,
    f: impl Fn(f64) -> f64,
) -> Result<SolutionTrace> {
    let tau = grid.tau();
    guard(SchemeId::CN, kappa * tau, 2.0)?;
    let num = 1.0 + 0.5 * kappa * tau;
    let denom = 1.0 - 0.5 * kappa * tau;
    let mut values = Vec::with_capacity(grid.steps() + 1);
    values.push(u0);
    let mut u = u0;
    for n in 1..=grid.steps() {
        u = (num * u + tau * f(grid.t_half(n))) / denom;
        values.push(u);
    }
    Ok(SolutionTrace {
        grid: *grid,
        values,
        scheme: SchemeId::CN,
    })
}

/// BDF2 started by one implicit Euler step.
pub fn bdf2_trace(
    kappa: f64,
    u0: f64,
    grid: &TimeGrid,
    f: impl Fn(f64) -> f64,
) -> Result<SolutionTrace> {
    let tau = grid.tau();
    // the starting IE step has the tighter limit
    guard(SchemeId::BDF2, kappa * tau, 1.0)?;
    let u1 = (u0 + tau * f(grid.t(1))) / (1.0 - kappa * tau);
    bdf2_trace_with_start(kappa, u0, u1, grid, f)
}

/// BDF2 with a caller-supplied `U^1`.
pub fn bdf2_trace_with_start(
    kappa: f64,
    u0: f64,
    u1: f64,
    grid: &TimeGrid,
    f: impl Fn(f64) -> f64,
) -> Result<SolutionTrace> {
    let tau = grid.tau();
    guard(SchemeId::BDF2, kappa * tau, 1.5)?;
    let denom = 1.5 - kappa * tau;
    let mut values = Vec::with_capacity(grid.steps() + 1);
    values.push(u0);
    values.push(u1);
    let (mut prev, mut cur) = (u0, u1);
    for n in 2..=grid.steps() {
        let next = (2.0 * cur - 0.5 * prev + tau * f(grid.t(n))) / denom;
        prev = cur;
        cur = next;
        values.push(cur);
    }
    Ok(SolutionTrace {
        grid: *grid,
        values,
        scheme: SchemeId::BDF2,
    })
}

/// Dispatch on the scheme; L1 is not an ODE scheme here.
pub fn integrate(
    scheme: SchemeId,
    kappa: f64,
    u0: f64,
    grid: &TimeGrid,
    f: impl Fn(f64) -> f64,
) -> Result<SolutionTrace> {
    match scheme {
        SchemeId::IE => ie_trace(kappa, u0, grid, f),
        SchemeId::CN => cn_trace(kappa, u0, grid, f),
        SchemeId::BDF2 => bdf2_trace(kappa, u0, grid, f),
        SchemeId::L1 => Err(Error::SchemeMismatch {
            scheme,
            reason: "the ODE integrators are classical schemes only",
        }),
    }
}

fn ode_problem(problem: &ManufacturedProblem, scheme: SchemeId) -> Result<()> {
    if problem.kind == Benchmark::Ode {
        Ok(())
    } else {
        Err(Error::SchemeMismatch {
            scheme,
            reason: "problem is not the scalar ODE benchmark",
        })
    }
}

pub fn step_ie(problem: &ManufacturedProblem, grid: &TimeGrid) -> Result<SolutionTrace> {
    ode_problem(problem, SchemeId::IE)?;
    ie_trace(problem.kappa(), problem.u0(0.0), grid, |t| problem.forcing_time(t))
}

pub fn step_cn(problem: &ManufacturedProblem, grid: &TimeGrid) -> Result<SolutionTrace> {
    ode_problem(problem, SchemeId::CN)?;
    cn_trace(problem.kappa(), problem.u0(0.0), grid, |t| problem.forcing_time(t))
}

pub fn step_bdf2(problem: &ManufacturedProblem, grid: &TimeGrid) -> Result<SolutionTrace> {
    ode_problem(problem, SchemeId::BDF2)?;
    bdf2_trace(problem.kappa(), problem.u0(0.0), grid, |t| problem.forcing_time(t))
}

/// Runs `scheme` on the ODE benchmark.
pub fn solve_ode(
    problem: &ManufacturedProblem,
    grid: &TimeGrid,
    scheme: SchemeId,
) -> Result<SolutionTrace> {
    ode_problem(problem, scheme)?;
    integrate(scheme, problem.kappa(), problem.u0(0.0), grid, |t| {
        problem.forcing_time(t)
    })
}
