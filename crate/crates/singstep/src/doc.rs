//! BDF2 convolution kernels and their discrete orthogonal convolution (DOC)
//! inverses.
//!
//! With `A^{(l)}_j` the BDF2 kernels, the DOC kernels `theta^{(n)}_{n-k}`
//! satisfy `sum_{j=k}^{n} theta^{(n)}_{n-j} A^{(j)}_{j-k} = delta_{nk}`.

use crate::error::{Error, Result};

/// BDF2 kernel `A^{(l)}_j` at `kappa*tau = x`. Level 1 is the implicit
/// Euler start.
pub fn bdf2_kernel(level: usize, j: usize, kappa_tau: f64) -> f64 {
    match (level, j) {
        (0, _) => 0.0,
        (1, 0) => 1.0 - kappa_tau,
        (1, _) => 0.0,
        (_, 0) => 1.5 - kappa_tau,
        (_, 1) => -2.0,
        (_, 2) => 0.5,
        _ => 0.0,
    }
}

/// DOC kernels of one level `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DocKernelSet {
    pub n: usize,
    pub kappa_tau: f64,
    /// `theta[j] = theta^{(n)}_j`, j = 0..n-1.
    pub theta: Vec<f64>,
}

impl DocKernelSet {
    /// `theta^{(n)}_{n-k}` for `1 <= k <= n`.
    pub fn theta_k(&self, k: usize) -> f64 {
        self.theta[self.n - k]
    }

    /// `max_k |sum_j theta^{(n)}_{n-j} A^{(j)}_{j-k} - delta_{nk}|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for k in 1..=n {
            let mut s = 0.0;
            for j in k..=n.min(k + 2) {
                s += self.theta[n - j] * bdf2_kernel(j, j - k, self.kappa_tau);
            }
            let target = if k == n { 1.0 } else { 0.0 };
            worst = worst.max((s - target).abs());
        }
        worst
    }
}

/// Closed form, valid for `0 < -kappa*tau < 1/2`.
pub fn doc_closed_form(n: usize, kappa_tau: f64) -> Result<DocKernelSet> {
    if n == 0 {
        return Err(Error::DomainError("level n must be at least 1".into()));
    }
    if !(kappa_tau < 0.0 && kappa_tau > -0.5) {
        return Err(Error::DomainError(format!(
            "closed form needs 0 < -kappa*tau < 1/2, got kappa*tau = {kappa_tau}"
        )));
    }
    let s = (1.0 + 2.0 * kappa_tau).sqrt();
    let (lo, hi) = (1.0 / (2.0 - s), 1.0 / (2.0 + s));
    // theta_j for j = 0..n-1 (k = n - j); the k = 1 entry gets the start factor
    let mut theta = Vec::with_capacity(n);
    let (mut pl, mut ph) = (lo, hi);
    for _ in 0..n {
        theta.push((pl - ph) / s);
        pl *= lo;
        ph *= hi;
    }
    theta[n - 1] *= (3.0 - 2.0 * kappa_tau) / (2.0 - 2.0 * kappa_tau);
    Ok(DocKernelSet { n, kappa_tau, theta })
}

/// Back-substitution straight from the orthogonality identity.
pub fn doc_recursive_oracle(n: usize, kappa_tau: f64) -> Result<DocKernelSet> {
    if n == 0 {
        return Err(Error::DomainError("level n must be at least 1".into()));
    }
    for level in 1..=n.min(2) {
        if bdf2_kernel(level, 0, kappa_tau) == 0.0 {
            return Err(Error::SingularKernel { level });
        }
    }
    let mut theta = vec![0.0; n];
    theta[0] = 1.0 / bdf2_kernel(n, 0, kappa_tau);
    for k in (1..n).rev() {
        // theta_{n-k} A^{(k)}_0 = -(theta_{n-k-1} A^{(k+1)}_1 + theta_{n-k-2} A^{(k+2)}_2)
        let mut rhs = -theta[n - k - 1] * bdf2_kernel(k + 1, 1, kappa_tau);
        if k + 2 <= n {
            rhs -= theta[n - k - 2] * bdf2_kernel(k + 2, 2, kappa_tau);
        }
        theta[n - k] = rhs / bdf2_kernel(k, 0, kappa_tau);
    }
    Ok(DocKernelSet { n, kappa_tau, theta })
}

/// Outcome of the decay bound `0 < theta^{(n)}_{n-k} <= 2 (1 - kappa tau)^{-(n-k+1)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocBoundReport {
    /// `max_k theta^{(n)}_{n-k} (1 - kappa tau)^{n-k+1}`
    pub max_ratio: f64,
    pub all_positive: bool,
    pub passed: bool,
}

/// Checks the decay bound; only meaningful for `0 < -kappa*tau < 1/4`.
pub fn doc_bound_check(set: &DocKernelSet) -> Result<DocBoundReport> {
    let x = set.kappa_tau;
    if !(x < 0.0 && x > -0.25) {
        return Err(Error::HypothesisViolation(format!(
            "decay bound needs 0 < -kappa*tau < 1/4, got kappa*tau = {x}"
        )));
    }
    let q = 1.0 - x;
    let mut max_ratio = 0.0f64;
    let mut all_positive = true;
    let mut w = q;
    for &th in &set.theta {
        // th = theta_j pairs with (1 - kappa tau)^{j+1}
        all_positive &= th > 0.0;
        max_ratio = max_ratio.max(th * w);
        w *= q;
    }
    Ok(DocBoundReport {
        max_ratio,
        all_positive,
        passed: all_positive && max_ratio <= 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn max_diff(a: &DocKernelSet, b: &DocKernelSet) -> f64 {
        a.theta
            .iter()
            .zip(&b.theta)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn single_level() {
        let c = doc_closed_form(1, -0.1).unwrap();
        assert!((c.theta[0] - 1.0 / 1.1).abs() < 1e-15);
        let o = doc_recursive_oracle(1, 0.3).unwrap();
        assert!((o.theta[0] - 1.0 / 0.7).abs() < 1e-15);
    }

    #[test]
    fn hand_back_substitution() {
        let o = doc_recursive_oracle(2, -0.5).unwrap();
        assert!((o.theta_k(2) - 0.5).abs() < 1e-15);
        assert!((o.theta_k(1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn near_zero_limit() {
        let c = doc_closed_form(3, -1e-12).unwrap();
        assert!((c.theta_k(3) - 2.0 / 3.0).abs() < 1e-9);
        let o = doc_recursive_oracle(3, -1e-12).unwrap();
        assert!(max_diff(&c, &o) < 1e-9);
    }

    #[test]
    fn closed_form_matches_oracle() {
        let c = doc_closed_form(50, -0.2).unwrap();
        let o = doc_recursive_oracle(50, -0.2).unwrap();
        assert!(max_diff(&c, &o) <= 1e-12);
        for x in [-0.05, -0.1, -0.2, -0.4] {
            for n in 1..=200 {
                let c = doc_closed_form(n, x).unwrap();
                let o = doc_recursive_oracle(n, x).unwrap();
                assert!(max_diff(&c, &o) <= 1e-12, "n={n} x={x}");
                assert!(o.orthogonality_residual() <= 1e-13);
                assert!(c.orthogonality_residual() <= 1e-11);
            }
        }
    }

    #[test]
    fn closed_form_domain() {
        assert!(doc_closed_form(5, 0.1).is_err());
        assert!(doc_closed_form(5, -0.5).is_err());
        assert!(doc_closed_form(0, -0.1).is_err());
        assert!(matches!(doc_recursive_oracle(3, 1.0), Err(Error::SingularKernel { level: 1 })));
        assert!(matches!(doc_recursive_oracle(3, 1.5), Err(Error::SingularKernel { level: 2 })));
    }

    #[test]
    fn decay_bound_examples() {
        let r = doc_bound_check(&doc_closed_form(100, -0.2).unwrap()).unwrap();
        assert!(r.passed && r.max_ratio <= 2.0);
        let r = doc_bound_check(&doc_closed_form(10, -0.01).unwrap()).unwrap();
        assert!(r.all_positive);
        let r = doc_bound_check(&doc_closed_form(1, -0.2).unwrap()).unwrap();
        assert!((r.max_ratio - 1.0).abs() < 1e-15);
        assert!(doc_bound_check(&doc_closed_form(10, -0.3).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn closed_form_equals_oracle(x in -0.4f64..-0.01, n in 1usize..=200) {
            let c = doc_closed_form(n, x).unwrap();
            let o = doc_recursive_oracle(n, x).unwrap();
            prop_assert!(max_diff(&c, &o) <= 1e-12);
        }

        #[test]
        fn kernels_are_unimodal_in_lag(x in -0.4f64..-0.01, n in 3usize..=200) {
            // theta_j = ((2-s)^{-(j+1)} - (2+s)^{-(j+1)})/s rises then falls
            // in the lag j; the k = 1 entry (j = n-1) carries the start factor
            // and is left out
            let c = doc_closed_form(n, x).unwrap();
            let body = &c.theta[..n - 1];
            let peak = body
                .iter()
                .enumerate()
                .fold(0, |best, (j, v)| if *v > body[best] { j } else { best });
            for w in body[..=peak].windows(2) {
                prop_assert!(w[1] >= w[0]);
            }
            for w in body[peak..].windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
        }

        #[test]
        fn decay_bound_holds(x in -0.2499f64..-1e-6, n in 1usize..=300) {
            let r = doc_bound_check(&doc_closed_form(n, x).unwrap()).unwrap();
            prop_assert!(r.passed, "ratio {}", r.max_ratio);
        }
    }
}
