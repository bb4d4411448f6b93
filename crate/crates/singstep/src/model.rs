//! Grids, model parameters and the two manufactured benchmarks.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{check_alpha, check_positive, Error, Result};
use crate::special::gamma;

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    IE,
    CN,
    BDF2,
    L1,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [SchemeId::IE, SchemeId::CN, SchemeId::BDF2, SchemeId::L1];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::IE => "IE",
            SchemeId::CN => "CN",
            SchemeId::BDF2 => "BDF2",
            SchemeId::L1 => "L1",
        }
    }

    pub fn is_fractional(self) -> bool {
        self == SchemeId::L1
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "IE" => Ok(SchemeId::IE),
            "CN" | "C-N" => Ok(SchemeId::CN),
            "BDF2" => Ok(SchemeId::BDF2),
            "L1" => Ok(SchemeId::L1),
            other => Err(format!("unknown scheme '{other}' (expected IE, CN, BDF2 or L1)")),
        }
    }
}

/// Uniform mesh `t_n = n * tau` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    steps: usize,
    t_final: f64,
    tau: f64,
}

impl TimeGrid {
    pub fn new(steps: usize, t_final: f64) -> Result<Self> {
        check_positive("T", t_final)?;
        if steps < 2 {
            return Err(Error::InvalidParameter {
                name: "N",
                value: steps as f64,
                reason: "need at least two time steps",
            });
        }
        Ok(Self {
            steps,
            t_final,
            tau: t_final / steps as f64,
        })
    }

    /// Number of steps N.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Node `t_n`; the last node is pinned to `T`.
    pub fn t(&self, n: usize) -> f64 {
        if n == self.steps {
            self.t_final
        } else {
            n as f64 * self.tau
        }
    }

    /// Half node `t_{n-1/2}`, for `n >= 1`.
    pub fn t_half(&self, n: usize) -> f64 {
        (n as f64 - 0.5) * self.tau
    }
}

/// Spatial setting of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Scalar ODE, no space.
    Ode,
    /// Interval `(0, L)` with homogeneous Dirichlet data.
    Interval { length: f64 },
}

impl Domain {
    pub fn length(&self) -> Option<f64> {
        match *self {
            Domain::Ode => None,
            Domain::Interval { length } => Some(length),
        }
    }
}

/// Smallest Dirichlet eigenvalue of `-d^2/dx^2` on `(0, L)`.
pub fn min_eigenvalue(length: f64) -> f64 {
    let k = PI / length;
    k * k
}

/// Parameters of one experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub kappa: f64,
    pub domain: Domain,
    pub t_final: f64,
}

impl ModelParams {
    pub fn ode(alpha: f64, kappa: f64, t_final: f64) -> Self {
        Self {
            alpha,
            kappa,
            domain: Domain::Ode,
            t_final,
        }
    }

    pub fn interval(alpha: f64, kappa: f64, length: f64, t_final: f64) -> Self {
        Self {
            alpha,
            kappa,
            domain: Domain::Interval { length },
            t_final,
        }
    }

    pub fn lambda1(&self) -> f64 {
        match self.domain {
            Domain::Ode => 0.0,
            Domain::Interval { length } => min_eigenvalue(length),
        }
    }

    /// Effective decay rate `lambda1 - kappa` (just `-kappa` for the ODE).
    pub fn decay_rate(&self) -> f64 {
        self.lambda1() - self.kappa
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        check_positive("T", self.t_final)?;
        if !self.kappa.is_finite() {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: self.kappa,
                reason: "must be finite",
            });
        }
        if let Domain::Interval { length } = self.domain {
            check_positive("L", length)?;
        }
        Ok(())
    }
}

/// Regularity constant `C_{u,alpha}` of `t^alpha`: the largest of
/// `t^{k-alpha} |d^k/dt^k t^alpha|` over k = 1, 2, 3.
pub fn regularity_constant(alpha: f64) -> f64 {
    let a1 = alpha;
    let a2 = alpha * (1.0 - alpha);
    let a3 = a2 * (2.0 - alpha);
    a1.max(a2).max(a3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Benchmark {
    /// `u = 10 + t^alpha`
    Ode,
    /// `u = t^alpha sin(pi x / L)` with a classical time derivative.
    Diffusion,
    /// Same solution, Caputo derivative of order alpha.
    Subdiffusion,
}

/// Exact solution, forcing and initial data of a benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedProblem {
    pub params: ModelParams,
    pub kind: Benchmark,
    c_u_alpha: f64,
    gamma_alpha1: f64,
}

/// `u = 10 + t^alpha`, `u' = kappa u + f`.
pub fn make_ode_benchmark(alpha: f64, kappa: f64, t_final: f64) -> Result<ManufacturedProblem> {
    let params = ModelParams::ode(alpha, kappa, t_final);
    params.validate()?;
    Ok(ManufacturedProblem {
        params,
        kind: Benchmark::Ode,
        c_u_alpha: regularity_constant(alpha),
        gamma_alpha1: gamma(alpha + 1.0),
    })
}

/// `u = t^alpha sin(pi x / L)` on `(0, L)`; `fractional` selects the Caputo
/// time derivative.
pub fn make_pde_benchmark(
    alpha: f64,
    kappa: f64,
    length: f64,
    t_final: f64,
    fractional: bool,
) -> Result<ManufacturedProblem> {
    let params = ModelParams::interval(alpha, kappa, length, t_final);
    params.validate()?;
    Ok(ManufacturedProblem {
        params,
        kind: if fractional {
            Benchmark::Subdiffusion
        } else {
            Benchmark::Diffusion
        },
        c_u_alpha: regularity_constant(alpha),
        gamma_alpha1: gamma(alpha + 1.0),
    })
}

impl ManufacturedProblem {
    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    pub fn kappa(&self) -> f64 {
        self.params.kappa
    }

    pub fn lambda1(&self) -> f64 {
        self.params.lambda1()
    }

    pub fn c_u_alpha(&self) -> f64 {
        self.c_u_alpha
    }

    pub fn is_fractional(&self) -> bool {
        self.kind == Benchmark::Subdiffusion
    }

    /// Spatial factor `sin(pi x / L)`; 1 for the ODE.
    pub fn profile(&self, x: f64) -> f64 {
        match self.params.domain {
            Domain::Ode => 1.0,
            Domain::Interval { length } => (PI * x / length).sin(),
        }
    }

    pub fn exact(&self, t: f64, x: f64) -> f64 {
        let ta = t.powf(self.alpha());
        match self.kind {
            Benchmark::Ode => 10.0 + ta,
            _ => ta * self.profile(x),
        }
    }

    pub fn u0(&self, x: f64) -> f64 {
        self.exact(0.0, x)
    }

    /// Time-only factor of the forcing, `f(t, x) = forcing_time(t) * profile(x)`
    /// for the interval benchmarks. For the ODE this is the forcing itself.
    pub fn forcing_time(&self, t: f64) -> f64 {
        let a = self.alpha();
        let k = self.kappa();
        match self.kind {
            Benchmark::Ode => a * t.powf(a - 1.0) - k * (10.0 + t.powf(a)),
            Benchmark::Diffusion => {
                a * t.powf(a - 1.0) + (self.lambda1() - k) * t.powf(a)
            }
            Benchmark::Subdiffusion => self.gamma_alpha1 + (self.lambda1() - k) * t.powf(a),
        }
    }

    pub fn forcing(&self, t: f64, x: f64) -> f64 {
        self.forcing_time(t) * self.profile(x)
    }

    /// `d^k u / dt^k` for k = 1, 2, 3 (k = 0 gives the solution).
    pub fn time_derivative(&self, order: u32, t: f64, x: f64) -> f64 {
        let a = self.alpha();
        let mut coeff = 1.0;
        for j in 0..order {
            coeff *= a - j as f64;
        }
        if order == 0 {
            return self.exact(t, x);
        }
        coeff * t.powf(a - order as f64) * self.profile(x)
    }
}
