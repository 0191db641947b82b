//! Approximation procedures and rate experiments.

mod lip;
mod pattern;
mod sobolev;

pub use lip::{lip_alpha_approximant, lip_alpha_bound, pattern_resolution};
pub use pattern::{quantize_pattern, Pattern};
pub use sobolev::{sobolev_split, SobolevSplit, QUADRATURE_PANELS};

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::cpwl::Cpwl;
use crate::error::{Error, Result};
use crate::network::{param_count, Network};

/// A black-box target on `[0, 1]`, optionally with a declared Lip-α bound
/// `|f|_{Lip α} ≤ bound` and an exact CPwL form.
#[derive(Clone)]
pub struct TargetFunction {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lip: Option<(f64, f64)>,
    cpwl: Option<Cpwl>,
}

impl TargetFunction {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        TargetFunction {
            eval: Arc::new(f),
            lip: None,
            cpwl: None,
        }
    }

    pub fn from_cpwl(c: Cpwl) -> Self {
        let inner = c.clone();
        TargetFunction {
            eval: Arc::new(move |x| inner.eval_clamped(x)),
            lip: None,
            cpwl: Some(c),
        }
    }

    /// Declares `|f|_{Lip α} ≤ bound`.
    pub fn with_lip(mut self, alpha: f64, bound: f64) -> Self {
        self.lip = Some((alpha, bound));
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    /// The declared `(α, bound)`.
    pub fn lip(&self) -> Option<(f64, f64)> {
        self.lip
    }

    pub fn cpwl(&self) -> Option<&Cpwl> {
        self.cpwl.as_ref()
    }
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFunction")
            .field("lip", &self.lip)
            .field("cpwl", &self.cpwl.as_ref().map(|c| c.len()))
            .finish_non_exhaustive()
    }
}

/// One row of a rate experiment. `error` holds the message of a builder
/// failure; the numeric fields are then zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub m: usize,
    pub params: usize,
    pub sup_error: f64,
    pub wall_ms: f64,
    pub error: Option<String>,
}

pub const CSV_HEADER: &str = "m,params,sup_error,wall_ms";

impl ExperimentRecord {
    /// A CSV row. Without `timing` the wall time is written as 0 so that
    /// repeated runs produce identical files.
    pub fn csv_row(&self, timing: bool) -> String {
        if let Some(e) = &self.error {
            return format!("{},,,# {}", self.m, e.replace(['\n', ','], " "));
        }
        let wall = if timing { self.wall_ms } else { 0.0 };
        format!(
            "{},{},{:e},{:.3}",
            self.m, self.params, self.sup_error, wall
        )
    }
}

pub fn write_csv(
    out: &mut impl Write,
    records: &[ExperimentRecord],
    timing: bool,
) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row(timing))?;
    }
    Ok(())
}

/// `max |f(x) - net(x)|` over a uniform grid of `grid_n` points, the
/// breakpoints of the network and, for CPwL targets, those of the target.
/// For CPwL targets the result is the exact sup-norm error.
pub fn measure_sigma<N: Network + Sync>(f: &TargetFunction, net: &N, grid_n: usize) -> Result<f64> {
    if grid_n < 2 {
        return Err(Error::Argument(format!(
            "grid needs ≥ 2 points, got {grid_n}"
        )));
    }
    let mut xs: Vec<f64> = (0..grid_n)
        .map(|i| i as f64 / (grid_n - 1) as f64)
        .collect();
    xs.extend_from_slice(net.extract_cpwl()?.breakpoints());
    if let Some(c) = f.cpwl() {
        xs.extend_from_slice(c.breakpoints());
    }
    Ok(xs
        .par_iter()
        .map(|&x| (f.eval(x) - net.forward(x)).abs())
        .reduce(|| 0.0, f64::max))
}

/// Builds and measures one network per `m`; rows stay in the order of `ms`.
pub fn rate_experiment<N, B>(
    f: &TargetFunction,
    builder: B,
    ms: &[usize],
    grid_n: usize,
) -> Result<Vec<ExperimentRecord>>
where
    N: Network + Sync,
    B: Fn(usize) -> Result<N> + Sync,
{
    if ms.is_empty() {
        return Err(Error::Argument("need at least one m".into()));
    }
    if ms.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument(
            "m values must be strictly ascending".into(),
        ));
    }
    Ok(ms
        .par_iter()
        .map(|&m| {
            let start = Instant::now();
            let run = builder(m).and_then(|net| {
                let err = measure_sigma(f, &net, grid_n)?;
                Ok((param_count(net.width(), net.depth()), err))
            });
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            match run {
                Ok((params, sup_error)) => ExperimentRecord {
                    m,
                    params,
                    sup_error,
                    wall_ms,
                    error: None,
                },
                Err(e) => ExperimentRecord {
                    m,
                    params: 0,
                    sup_error: 0.0,
                    wall_ms,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Empirical `A^r` seminorm `max_m (m + 1)^r · error` over the successful rows.
pub fn empirical_seminorm(records: &[ExperimentRecord], r: f64) -> f64 {
    records
        .iter()
        .filter(|rec| rec.error.is_none())
        .map(|rec| (rec.m as f64 + 1.0).powf(r) * rec.sup_error)
        .fold(0.0, f64::max)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        let dx = x.ln() - mx;
        (a + dx * (y.ln() - my), b + dx * dx)
    });
    num / den
}
