//! L1 discretisation of the Caputo derivative and the resulting solver for
//! `D_t^alpha u = u_xx + kappa u + f` on `(0, L)`.
//!
//! The full history of increments is kept, so a run costs `O(N^2 M)`.

use crate::error::{check_alpha, Error, Result};
use crate::model::{Benchmark, ManufacturedProblem, SchemeId, TimeGrid};
use crate::pde::{assemble_operator, frame_error, FieldTrace, SpaceGrid};
use crate::special::gamma;
use crate::tridiag::Tridiagonal;

/// `A_i = (i+1)^{1-alpha} - i^{1-alpha}` together with the prefactor
/// `tau^{-alpha} / Gamma(2 - alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Weights {
    pub alpha: f64,
    pub tau: f64,
    pub prefactor: f64,
    a: Vec<f64>,
}

impl L1Weights {
    /// Weights `A_0 .. A_{len-1}`.
    pub fn new(alpha: f64, tau: f64, len: usize) -> Result<Self> {
        check_alpha(alpha)?;
        crate::error::check_positive("tau", tau)?;
        let b = 1.0 - alpha;
        let a = (0..len)
            .map(|i| {
                if i == 0 {
                    1.0
                } else {
                    // i^b ((1 + 1/i)^b - 1) without the cancellation
                    let i = i as f64;
                    i.powf(b) * (b * (1.0 / i).ln_1p()).exp_m1()
                }
            })
            .collect();
        Ok(Self {
            alpha,
            tau,
            prefactor: tau.powf(-alpha) / gamma(2.0 - alpha),
            a,
        })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self, i: usize) -> f64 {
        self.a[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }
}

/// L1 approximation of the Caputo derivative at the last level of
/// `history = [U^0, ..., U^n]`.
pub fn l1_caputo_apply(history: &[f64], weights: &L1Weights) -> f64 {
    let n = history.len() - 1;
    assert!(n >= 1, "need at least two levels");
    assert!(weights.len() >= n, "not enough weights");
    let s: f64 = (1..=n)
        .map(|j| weights.a(n - j) * (history[j] - history[j - 1]))
        .sum();
    weights.prefactor * s
}

/// Marches `D^alpha U = A U + f` with the L1 scheme.
///
/// Each step solves
/// `(I - c A) U^n = U^{n-1} - sum_{j<n} A_{n-j} (U^j - U^{j-1}) + c f^n`
/// with `c = tau^alpha Gamma(2 - alpha)`. `forcing` and `observe` behave as
/// in [`crate::pde::march_linear`].
pub fn march_l1_linear<F, O>(
    alpha: f64,
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
    let steps = time.steps();
    let w = L1Weights::new(alpha, time.tau(), steps)?;
    let c = 1.0 / w.prefactor;
    let m = u0.len();
    assert_eq!(m, op.dim());
    let lhs = op.affine(1.0, -c).factor()?;

    // diffs[j-1] = U^j - U^{j-1}
    let mut diffs: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut cur = u0.to_vec();
    let mut rhs = vec![0.0; m];
    let mut f = vec![0.0; m];
    observe(0, &cur);
    for n in 1..=steps {
        forcing(time.t(n), &mut f);
        for i in 0..m {
            rhs[i] = cur[i] + c * f[i];
        }
        for (j, d) in diffs.iter().enumerate() {
            // d = U^{j+1} - U^j carries weight A_{n-j-1}
            let a = w.a(n - j - 1);
            for (r, di) in rhs.iter_mut().zip(d) {
                *r -= a * di;
            }
        }
        lhs.solve_in_place(&mut rhs);
        let d: Vec<f64> = rhs.iter().zip(&cur).map(|(u, v)| u - v).collect();
        cur.copy_from_slice(&rhs);
        diffs.push(d);
        observe(n, &cur);
    }
    Ok(())
}

fn check_problem(problem: &ManufacturedProblem, space: &SpaceGrid) -> Result<()> {
    if problem.kind != Benchmark::Subdiffusion {
        return Err(Error::SchemeMismatch {
            scheme: SchemeId::L1,
            reason: "the L1 solver needs the subdiffusion benchmark",
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

/// Marches the subdiffusion benchmark and reports every level to `observe`.
pub fn march_l1(
    problem: &ManufacturedProblem,
    space: &SpaceGrid,
    time: &TimeGrid,
    observe: impl FnMut(usize, &[f64]),
) -> Result<()> {
    check_problem(problem, space)?;
    let alpha = problem.alpha();
    // I - c (Delta_h + kappa) is positive definite while c (kappa - lambda1) < 1
    let c = time.tau().powf(alpha) * gamma(2.0 - alpha);
    let kappa_tau = c * (problem.kappa() - problem.lambda1());
    if kappa_tau >= 1.0 {
        return Err(Error::StepSizeViolation {
            scheme: SchemeId::L1,
            kappa_tau,
            limit: 1.0,
        });
    }
    let op = assemble_operator(space, problem.kappa());
    let nodes = space.interior_nodes();
    let profile: Vec<f64> = nodes.iter().map(|&x| problem.profile(x)).collect();
    let u0: Vec<f64> = nodes.iter().map(|&x| problem.u0(x)).collect();
    march_l1_linear(
        alpha,
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

/// Full trace of the subdiffusion benchmark.
pub fn solve_l1(problem: &ManufacturedProblem, space: &SpaceGrid, time: &TimeGrid) -> Result<FieldTrace> {
    let mut frames = Vec::with_capacity(time.steps() + 1);
    march_l1(problem, space, time, |_, u| frames.push(u.to_vec()))?;
    Ok(FieldTrace {
        space: *space,
        time: *time,
        frames,
        scheme: SchemeId::L1,
    })
}

/// Discrete L2 error at every level without keeping the frames.
pub fn l1_errors(problem: &ManufacturedProblem, space: &SpaceGrid, time: &TimeGrid) -> Result<Vec<f64>> {
    let mut errs = Vec::with_capacity(time.steps() + 1);
    march_l1(problem, space, time, |n, u| {
        errs.push(frame_error(problem, space, time.t(n), u))
    })?;
    Ok(errs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_pde_benchmark;
    use crate::quadrature::integrate_with_breaks;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_basic() {
        let w = L1Weights::new(0.5, 0.25, 6).unwrap();
        assert_eq!(w.a(0), 1.0);
        assert!((w.a(1) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((w.prefactor - 2.0 / gamma(1.5)).abs() < 1e-14);
        for i in 1..6 {
            assert!(w.a(i) > 0.0 && w.a(i) < w.a(i - 1));
        }
        assert!(L1Weights::new(1.0, 0.1, 3).is_err());
        assert!(L1Weights::new(0.5, 0.0, 3).is_err());
    }

    #[test]
    fn weights_telescope() {
        for alpha in [0.1, 0.5, 0.9] {
            let w = L1Weights::new(alpha, 1.0, 4096).unwrap();
            let mut s = 0.0;
            for n in 1..=4096usize {
                s += w.a(n - 1);
                let want = (n as f64).powf(1.0 - alpha);
                assert!((s - want).abs() <= 1e-12 * want, "alpha={alpha} n={n}");
            }
        }
    }

    #[test]
    fn constant_and_linear_history() {
        let w = L1Weights::new(0.5, 0.125, 16).unwrap();
        assert_eq!(l1_caputo_apply(&[3.0; 9], &w), 0.0);
        for n in 1..=16 {
            let hist: Vec<f64> = (0..=n).map(|j| j as f64 * 0.125).collect();
            let tn = n as f64 * 0.125;
            let want = tn.sqrt() / gamma(1.5);
            assert!((l1_caputo_apply(&hist, &w) - want).abs() <= 1e-13 * want);
        }
    }

    /// Caputo derivative of `t^alpha` at `t` by quadrature of
    /// `int_0^t (t-s)^{-alpha} u'(s) ds / Gamma(1 - alpha)`.
    fn caputo_power_oracle(alpha: f64, t: f64) -> f64 {
        // split at t/2 and integrate the upper half in r = t - s, so that
        // both singularities sit at 0 where floating point can resolve them
        let lower = |s: f64| (t - s).powf(-alpha) * alpha * s.powf(alpha - 1.0);
        let upper = |r: f64| r.powf(-alpha) * alpha * (t - r).powf(alpha - 1.0);
        let mut breaks = vec![0.0];
        breaks.extend((0..200).rev().map(|k| 0.5 * t * 0.5f64.powi(k)));
        let guard = |g: &dyn Fn(f64) -> f64, x: f64| if x > 0.0 { g(x) } else { 0.0 };
        let q1 = integrate_with_breaks(|x| guard(&lower, x), &breaks, 1e-16, 1e-14, 5000);
        let q2 = integrate_with_breaks(|x| guard(&upper, x), &breaks, 1e-16, 1e-14, 5000);
        (q1.value + q2.value) / gamma(1.0 - alpha)
    }

    #[test]
    fn power_history_against_quadrature() {
        let oracle = caputo_power_oracle(0.5, 1.0);
        assert!((oracle - gamma(1.5)).abs() < 1e-12, "{oracle}");
        // error at t = 1 shrinks as the history is refined
        let mut prev = f64::INFINITY;
        for n in [8usize, 16, 32, 64] {
            let tau = 1.0 / n as f64;
            let w = L1Weights::new(0.5, tau, n).unwrap();
            let hist: Vec<f64> = (0..=n).map(|j| (j as f64 * tau).sqrt()).collect();
            let err = (l1_caputo_apply(&hist, &w) - oracle).abs();
            assert!(err < prev, "n={n}");
            if n == 8 {
                assert!(err < 0.05 * oracle, "n=8 error {err}");
            }
            prev = err;
        }
    }

    #[test]
    fn linear_solution_reproduced() {
        // D^alpha (1 + t) = t^{1-alpha}/Gamma(2-alpha); scalar problem with kappa = -3
        let (alpha, kappa) = (0.4, -3.0);
        let op = Tridiagonal::new(vec![], vec![kappa], vec![]);
        let time = TimeGrid::new(40, 2.0).unwrap();
        march_l1_linear(
            alpha,
            &op,
            &time,
            &[1.0],
            |t, f| f[0] = t.powf(1.0 - alpha) / gamma(2.0 - alpha) - kappa * (1.0 + t),
            |n, u| {
                let want = 1.0 + time.t(n);
                assert!((u[0] - want).abs() <= 1e-11 * want, "n={n}");
            },
        )
        .unwrap();
    }

    #[test]
    fn zero_data_stays_zero() {
        let space = SpaceGrid::new(16, 1.0).unwrap();
        let time = TimeGrid::new(12, 1.0).unwrap();
        let op = assemble_operator(&space, 2.0);
        march_l1_linear(0.5, &op, &time, &[0.0; 15], |_, f| f.fill(0.0), |_, u| {
            assert!(u.iter().all(|&v| v == 0.0))
        })
        .unwrap();
    }

    #[test]
    fn rejects_wrong_benchmark_and_large_steps() {
        let space = SpaceGrid::new(20, 1.0).unwrap();
        let time = TimeGrid::new(4, 1.0).unwrap();
        let p = make_pde_benchmark(0.5, 0.0, 1.0, 1.0, false).unwrap();
        assert!(matches!(solve_l1(&p, &space, &time), Err(Error::SchemeMismatch { .. })));
        // c (kappa - lambda1) = 0.5 Gamma(1.5) (30 - 9.87) > 1
        let p = make_pde_benchmark(0.5, 30.0, 1.0, 1.0, true).unwrap();
        assert!(matches!(solve_l1(&p, &space, &time), Err(Error::StepSizeViolation { .. })));
    }

    fn final_error(p: &ManufacturedProblem, n: usize) -> f64 {
        let space = SpaceGrid::new(2000, p.params.domain.length().unwrap()).unwrap();
        let time = TimeGrid::new(n, p.params.t_final).unwrap();
        *l1_errors(p, &space, &time).unwrap().last().unwrap()
    }

    #[test]
    fn benchmark_orders() {
        let p = make_pde_benchmark(0.5, 1.0, PI, 1.0, true).unwrap();
        let errs: Vec<f64> = [32, 64, 128, 256, 512].iter().map(|&n| final_error(&p, n)).collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 1.0).abs() <= 0.03, "order {order}");
        }
        let p = make_pde_benchmark(0.5, -8.0, 1.0, 10.0, true).unwrap();
        let order = (final_error(&p, 32) / final_error(&p, 64)).log2();
        assert!((order - 1.45).abs() <= 0.05, "order {order}");
    }

    proptest! {
        #[test]
        fn weights_positive_and_decreasing(alpha in 0.01f64..0.99, len in 2usize..3000) {
            let w = L1Weights::new(alpha, 1.0, len).unwrap();
            for i in 1..len {
                prop_assert!(w.a(i) > 0.0 && w.a(i) < w.a(i - 1));
            }
        }

        #[test]
        fn linear_history_exact(alpha in 0.05f64..0.95, tau in 0.001f64..1.0, n in 1usize..200) {
            let w = L1Weights::new(alpha, tau, n).unwrap();
            let hist: Vec<f64> = (0..=n).map(|j| 2.0 + 5.0 * j as f64 * tau).collect();
            let tn = n as f64 * tau;
            let want = 5.0 * tn.powf(1.0 - alpha) / gamma(2.0 - alpha);
            prop_assert!((l1_caputo_apply(&hist, &w) - want).abs() <= 1e-11 * want);
        }
    }
}
