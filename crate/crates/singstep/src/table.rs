//! Convergence tables: drives the solvers over an experiment grid and attaches
//! empirical orders, bound terms and predicted orders.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::bounds::{
    bound_rhs, bound_sequence, conjecture_rhs, empirical_order, fit_multiplier, l1_predicted_order,
    predicted_order, BoundTerms, Theorem,
};
use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::Result;
use crate::l1::l1_errors;
use crate::model::{make_ode_benchmark, make_pde_benchmark, Domain, ModelParams, SchemeId, TimeGrid};
use crate::ode::solve_ode;
use crate::pde::{pde_errors, SpaceGrid};

/// One (scheme, parameters, N) cell of a table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub scheme: SchemeId,
    pub params: ModelParams,
    /// Spatial cells, `None` for the ODE.
    pub cells: Option<usize>,
    pub steps: usize,
    pub final_error: Option<f64>,
    /// Final error of the companion run with `N/2` steps.
    pub coarse_error: Option<f64>,
    pub order: Option<f64>,
    pub exp_term: Option<f64>,
    pub alg_term: Option<f64>,
    pub predicted_order: Option<f64>,
    /// Solver or order failures; a row with any is a failed cell.
    pub failures: Vec<String>,
    /// Non-fatal notes, e.g. reduced Mittag-Leffler accuracy.
    pub warnings: Vec<String>,
}

/// Bound evaluation for one classical cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRow {
    pub theorem: Theorem,
    pub params: ModelParams,
    pub steps: usize,
    /// Smallest multiplier making the bound hold at every level.
    pub lambda_star: Option<f64>,
    /// Terms at the final level.
    pub terms: Option<BoundTerms>,
    /// Why the bound was not evaluated.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub alpha: f64,
    pub cells: Option<usize>,
    pub conjecture_c: f64,
    pub rows: Vec<TableRow>,
    pub bounds: Vec<BoundsRow>,
}

impl ConvergenceTable {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.failures.is_empty()).count()
    }

    pub fn row(&self, scheme: SchemeId, kappa: f64, length: Option<f64>, t_final: f64, steps: usize) -> Option<&TableRow> {
        self.rows.iter().find(|r| {
            r.scheme == scheme
                && r.params.kappa == kappa
                && r.params.domain.length() == length
                && r.params.t_final == t_final
                && r.steps == steps
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct RunKey {
    scheme: SchemeId,
    param: usize,
    steps: usize,
}

/// Error at every level of one run.
fn run_errors(scheme: SchemeId, params: &ModelParams, cells: usize, steps: usize) -> Result<Vec<f64>> {
    let time = TimeGrid::new(steps, params.t_final)?;
    match params.domain {
        Domain::Ode => {
            let problem = make_ode_benchmark(params.alpha, params.kappa, params.t_final)?;
            let trace = solve_ode(&problem, &time, scheme)?;
            Ok(trace.errors(|t| problem.exact(t, 0.0)))
        }
        Domain::Interval { length } => {
            let problem = make_pde_benchmark(params.alpha, params.kappa, length, params.t_final, scheme.is_fractional())?;
            let space = SpaceGrid::new(cells, length)?;
            if scheme.is_fractional() {
                l1_errors(&problem, &space, &time)
            } else {
                pde_errors(&problem, &space, &time, scheme)
            }
        }
    }
}

fn sort_key(a: &ModelParams) -> [f64; 3] {
    [a.kappa, a.domain.length().unwrap_or(0.0), a.t_final]
}

fn cmp_params(a: &ModelParams, b: &ModelParams) -> std::cmp::Ordering {
    let (ka, kb) = (sort_key(a), sort_key(b));
    ka.iter().zip(&kb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

/// Runs every cell of `config` on a pool of `jobs` threads (`None`: one per
/// core) and merges the results. The output does not depend on `jobs`.
///
/// Every listed `N` is paired with an `N/2` run so each row carries an order.
pub fn build_table(config: &ExperimentConfig, jobs: Option<usize>) -> ConvergenceTable {
    let params = config.param_sets();
    let cells = match config.domain {
        crate::config::DomainSpec::Ode => None,
        crate::config::DomainSpec::Interval { .. } => Some(config.cells),
    };
    let mut keys = std::collections::BTreeSet::new();
    for &scheme in &config.schemes {
        for p in 0..params.len() {
            for &n in &config.steps {
                keys.insert(RunKey { scheme, param: p, steps: n });
                keys.insert(RunKey { scheme, param: p, steps: n / 2 });
            }
        }
    }
    let keys: Vec<RunKey> = keys.into_iter().collect();
    let listed = |k: &RunKey| config.steps.contains(&k.steps);

    let work = || -> Vec<std::result::Result<Vec<f64>, String>> {
        keys.par_iter()
            .map(|k| {
                let errs = run_errors(k.scheme, &params[k.param], config.cells, k.steps).map_err(|e| e.to_string())?;
                // keep whole sequences only where the bounds need them
                if config.bounds && listed(k) {
                    Ok(errs)
                } else {
                    Ok(vec![*errs.last().unwrap()])
                }
            })
            .collect()
    };
    let results = match rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    };
    let runs: BTreeMap<RunKey, std::result::Result<Vec<f64>, String>> = keys.iter().copied().zip(results).collect();

    let mut rows = Vec::new();
    let mut bounds = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for &scheme in &config.schemes {
        for (p, prm) in params.iter().enumerate() {
            for &n in &config.steps {
                if !seen.insert((scheme, p, n)) {
                    continue;
                }
                let fine = &runs[&RunKey { scheme, param: p, steps: n }];
                let coarse = &runs[&RunKey { scheme, param: p, steps: n / 2 }];
                let mut row = TableRow {
                    scheme,
                    params: *prm,
                    cells,
                    steps: n,
                    final_error: None,
                    coarse_error: None,
                    order: None,
                    exp_term: None,
                    alg_term: None,
                    predicted_order: None,
                    failures: Vec::new(),
                    warnings: Vec::new(),
                };
                match fine {
                    Ok(e) => row.final_error = e.last().copied(),
                    Err(msg) => row.failures.push(format!("N = {n}: {msg}")),
                }
                match coarse {
                    Ok(e) => row.coarse_error = e.last().copied(),
                    Err(msg) => row.failures.push(format!("N/2 = {}: {msg}", n / 2)),
                }
                if let (Some(c), Some(f)) = (row.coarse_error, row.final_error) {
                    match empirical_order(c, f) {
                        Ok(o) => row.order = Some(o),
                        Err(e) => row.failures.push(e.to_string()),
                    }
                }
                attach_estimates(&mut row, config.conjecture_c);
                if config.bounds {
                    if let Some(b) = bounds_row(scheme, prm, n, fine) {
                        bounds.push(b);
                    }
                }
                rows.push(row);
            }
        }
    }
    rows.sort_by(|a, b| {
        a.scheme
            .cmp(&b.scheme)
            .then_with(|| cmp_params(&a.params, &b.params))
            .then(a.steps.cmp(&b.steps))
    });
    bounds.sort_by(|a, b| {
        a.theorem
            .cmp(&b.theorem)
            .then_with(|| cmp_params(&a.params, &b.params))
            .then(a.steps.cmp(&b.steps))
    });
    ConvergenceTable {
        alpha: config.alpha,
        cells,
        conjecture_c: config.conjecture_c,
        rows,
        bounds,
    }
}

/// Two-term estimate at the final level and the order it predicts. Left
/// empty where the estimate's hypotheses fail.
fn attach_estimates(row: &mut TableRow, c: f64) {
    let p = &row.params;
    let Ok(grid) = TimeGrid::new(row.steps, p.t_final) else { return };
    if row.scheme.is_fractional() {
        match conjecture_rhs(p, &grid, row.steps, c) {
            Ok(t) => {
                row.exp_term = Some(t.first_order);
                row.alg_term = Some(t.fractional);
                if t.accuracy_warning {
                    row.warnings.push("Mittag-Leffler derivative evaluated with reduced accuracy".into());
                }
            }
            Err(crate::Error::HypothesisViolation(_)) => {}
            Err(e) => row.warnings.push(format!("estimate: {e}")),
        }
        match l1_predicted_order(p.alpha, p.lambda1(), p.kappa, p.t_final, row.steps, c) {
            Ok(o) => row.predicted_order = Some(o),
            Err(e) => row.warnings.push(format!("predicted order: {e}")),
        }
    } else if let Some(th) = Theorem::for_scheme(row.scheme, &p.domain) {
        if let Ok(t) = bound_rhs(th, p, &grid, row.steps, 0.0) {
            row.exp_term = Some(t.exp_term);
            row.alg_term = Some(t.alg_term);
        }
        row.predicted_order = Some(predicted_order(p.alpha, p.lambda1(), p.kappa, p.t_final, row.steps, th.k(), c));
    }
}

fn bounds_row(
    scheme: SchemeId,
    params: &ModelParams,
    steps: usize,
    run: &std::result::Result<Vec<f64>, String>,
) -> Option<BoundsRow> {
    let theorem = Theorem::for_scheme(scheme, &params.domain)?;
    let mut row = BoundsRow {
        theorem,
        params: *params,
        steps,
        lambda_star: None,
        terms: None,
        note: None,
    };
    let seq = TimeGrid::new(steps, params.t_final).and_then(|g| bound_sequence(theorem, params, &g));
    match (seq, run) {
        (Err(e), _) => row.note = Some(e.to_string()),
        (_, Err(msg)) => row.note = Some(format!("run failed: {msg}")),
        (Ok(seq), Ok(errs)) => {
            row.lambda_star = Some(fit_multiplier(errs, &seq));
            row.terms = seq.last().copied();
        }
    }
    Some(row)
}

fn sig6(x: f64) -> String {
    format!("{x:.5e}")
}

fn opt(x: Option<f64>, f: impl Fn(f64) -> String) -> String {
    x.map(f).unwrap_or_default()
}

fn order2(x: f64) -> String {
    format!("{x:.2}")
}

fn full(x: f64) -> String {
    format!("{x:e}")
}

pub const TABLE_HEADER: &str =
    "scheme,alpha,kappa,L,lambda1,T,M,N,final_error,order,exp_term,alg_term,predicted_order";

fn table_csv_with(table: &ConvergenceTable, real: impl Fn(f64) -> String, ord: impl Fn(f64) -> String) -> String {
    let mut s = String::from(TABLE_HEADER);
    s.push('\n');
    for r in &table.rows {
        let p = &r.params;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scheme,
            p.alpha,
            p.kappa,
            opt(p.domain.length(), |l| l.to_string()),
            real(p.lambda1()),
            p.t_final,
            r.cells.map(|m| m.to_string()).unwrap_or_default(),
            r.steps,
            opt(r.final_error, &real),
            opt(r.order, &ord),
            opt(r.exp_term, &real),
            opt(r.alg_term, &real),
            opt(r.predicted_order, &ord),
        );
    }
    s
}

/// `table.csv`: errors to 6 significant digits, orders to 2 decimals.
pub fn table_csv(table: &ConvergenceTable) -> String {
    table_csv_with(table, sig6, order2)
}

/// `table_raw.csv`: same schema at full precision.
pub fn table_raw_csv(table: &ConvergenceTable) -> String {
    table_csv_with(table, full, full)
}

pub const BOUNDS_HEADER: &str =
    "scheme,theorem,alpha,kappa,L,lambda1,T,N,lambda_star,init_term,exp_term,alg_term,bound,note";

pub fn bounds_csv(table: &ConvergenceTable) -> String {
    let mut s = String::from(BOUNDS_HEADER);
    s.push('\n');
    for b in &table.bounds {
        let p = &b.params;
        let t = b.terms.as_ref();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            b.theorem.scheme(),
            b.theorem,
            p.alpha,
            p.kappa,
            opt(p.domain.length(), |l| l.to_string()),
            sig6(p.lambda1()),
            p.t_final,
            b.steps,
            opt(b.lambda_star, sig6),
            opt(t.map(|t| t.init_term), sig6),
            opt(t.map(|t| t.exp_term), sig6),
            opt(t.map(|t| t.alg_term), sig6),
            opt(t.map(|t| t.total()), sig6),
            b.note.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        );
    }
    s
}

pub const KINKSCAN_HEADER: &str = "scheme,alpha,kappa,L,T,M,N,final_error,order";

/// Error against N at full precision, one series per scheme and parameter set.
pub fn kinkscan_csv(table: &ConvergenceTable) -> String {
    let mut s = String::from(KINKSCAN_HEADER);
    s.push('\n');
    for r in &table.rows {
        let p = &r.params;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.scheme,
            p.alpha,
            p.kappa,
            opt(p.domain.length(), |l| l.to_string()),
            p.t_final,
            r.cells.map(|m| m.to_string()).unwrap_or_default(),
            r.steps,
            opt(r.final_error, full),
            opt(r.order, full),
        );
    }
    s
}

fn fmt_param(x: f64) -> String {
    if (x - std::f64::consts::PI).abs() < 1e-12 {
        "π".into()
    } else {
        x.to_string()
    }
}

/// Orders pivoted into one block per scheme: N down
/// the side, one column per parameter set. Only varying parameters label the
/// columns.
pub fn table_markdown(table: &ConvergenceTable) -> String {
    let mut s = String::new();
    let mut schemes: Vec<SchemeId> = table.rows.iter().map(|r| r.scheme).collect();
    schemes.dedup();
    for scheme in schemes {
        let rows: Vec<&TableRow> = table.rows.iter().filter(|r| r.scheme == scheme).collect();
        let mut sets: Vec<ModelParams> = Vec::new();
        for r in &rows {
            if !sets.contains(&r.params) {
                sets.push(r.params);
            }
        }
        let varies = |f: &dyn Fn(&ModelParams) -> Option<f64>| sets.iter().any(|p| f(p) != f(&sets[0]));
        let vary_k = varies(&|p| Some(p.kappa));
        let vary_l = varies(&|p| p.domain.length());
        let vary_t = varies(&|p| Some(p.t_final));
        let label = |p: &ModelParams| {
            let mut parts = Vec::new();
            if vary_k || !(vary_l || vary_t) {
                parts.push(format!("κ = {}", fmt_param(p.kappa)));
            }
            if vary_l {
                parts.push(format!("L = {}", fmt_param(p.domain.length().unwrap_or(0.0))));
            }
            if vary_t {
                parts.push(format!("T = {}", fmt_param(p.t_final)));
            }
            parts.join(", ")
        };
        let _ = writeln!(s, "### {scheme}\n");
        let _ = write!(s, "| N |");
        for p in &sets {
            let _ = write!(s, " {} |", label(p));
        }
        let _ = write!(s, "\n|---:|");
        for _ in &sets {
            let _ = write!(s, "---:|");
        }
        s.push('\n');
        let mut steps: Vec<usize> = rows.iter().map(|r| r.steps).collect();
        steps.sort_unstable();
        steps.dedup();
        for n in steps {
            let _ = write!(s, "| {n} |");
            for p in &sets {
                let cell = rows
                    .iter()
                    .find(|r| r.steps == n && r.params == *p)
                    .and_then(|r| r.order)
                    .map(order2)
                    .unwrap_or_else(|| "—".into());
                let _ = write!(s, " {cell} |");
            }
            s.push('\n');
        }
        s.push('\n');
    }
    s
}

/// One line per failed or warned cell.
pub fn failures_text(table: &ConvergenceTable) -> String {
    let mut s = String::new();
    for r in &table.rows {
        let p = &r.params;
        let id = format!(
            "{} kappa={} L={} T={} N={}",
            r.scheme,
            p.kappa,
            p.domain.length().map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
            p.t_final,
            r.steps
        );
        for f in &r.failures {
            let _ = writeln!(s, "FAIL {id}: {f}");
        }
        for w in &r.warnings {
            let _ = writeln!(s, "WARN {id}: {w}");
        }
    }
    s
}

/// Files written by [`write_reports`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportFiles {
    pub written: Vec<std::path::PathBuf>,
}

/// Writes `table.csv`, `table_raw.csv`, `metadata.txt`, `config.txt`,
/// `failures.txt`, and, as configured, `table.md`, `bounds.csv` and
/// `kinkscan.csv` into `dir`.
pub fn write_reports(table: &ConvergenceTable, config: &ExperimentConfig, dir: &std::path::Path) -> std::io::Result<ReportFiles> {
    std::fs::create_dir_all(dir)?;
    let mut files = ReportFiles::default();
    let mut put = |name: &str, body: String| -> std::io::Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        files.written.push(path);
        Ok(())
    };
    put("table.csv", table_csv(table))?;
    put("table_raw.csv", table_raw_csv(table))?;
    if config.format == OutputFormat::Markdown {
        put("table.md", table_markdown(table))?;
    }
    if config.bounds {
        put("bounds.csv", bounds_csv(table))?;
    }
    if config.scan {
        put("kinkscan.csv", kinkscan_csv(table))?;
    }
    put("failures.txt", failures_text(table))?;
    put("config.txt", config.to_text())?;
    put("metadata.txt", metadata_text(table, config))?;
    Ok(files)
}

fn metadata_text(table: &ConvergenceTable, config: &ExperimentConfig) -> String {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut s = String::new();
    let _ = writeln!(s, "preset = {}", config.preset.as_deref().unwrap_or("-"));
    let _ = writeln!(s, "alpha = {}", table.alpha);
    let _ = writeln!(s, "M = {}", table.cells.map(|m| m.to_string()).unwrap_or_else(|| "-".into()));
    let _ = writeln!(s, "conjecture_C = {}", table.conjecture_c);
    let _ = writeln!(s, "rows = {}", table.rows.len());
    let _ = writeln!(s, "failed_rows = {}", table.failed_rows());
    let _ = writeln!(s, "timestamp_unix = {stamp}");
    if config.preset.is_some() && table.cells.is_some_and(|m| m < 20_000) {
        let _ = writeln!(s, "note = desk-scale M = {} spatial cells; the tables this preset reproduces used M = 20000", config.cells);
    }
    s
}
