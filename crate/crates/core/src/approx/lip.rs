use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::compiler::{compile_self_similar, compile_spline};
use crate::cpwl::Cpwl;
use crate::error::{Error, Result};
use crate::network::{concat_sum, param_count, Network, SpecialNetwork};

use super::{measure_sigma, quantize_pattern, ExperimentRecord, Pattern, TargetFunction};

/// Grid size used by `lip_alpha_approximant` to measure its own error.
const MEASURE_GRID: usize = 4097;

/// The largest `k` with `3^k k ≤ m` (0 if there is none).
pub fn pattern_resolution(m: usize) -> usize {
    let mut k = 0;
    while 3usize.pow(k as u32 + 1) * (k + 1) <= m {
        k += 1;
    }
    k
}

/// `4 K (k m)^{-α}`.
pub fn lip_alpha_bound(k: usize, m: usize, alpha: f64, seminorm: f64) -> f64 {
    4.0 * seminorm * ((k * m) as f64).powf(-alpha)
}

/// Network approximating a Lip-α function with `m` interpolation intervals.
///
/// `T` interpolates `f` at `i/m`. On each interval the residual is rescaled
/// into the unit Lip-α ball, `ḡ_i(x) = ½ m^α (f - T)((x + i)/m) / K`, and
/// quantised at resolution `k = max{k : 3^k k ≤ m}`. Intervals sharing a
/// pattern form one self-similar function with amplitude `2 K m^{-α}`; these
/// are appended to the compiled `T`. The sup error is at most `4 K (k m)^{-α}`.
/// When `k < 2` only `T` is compiled.
pub fn lip_alpha_approximant(
    f: &TargetFunction,
    alpha: f64,
    m: usize,
    width: usize,
) -> Result<(SpecialNetwork, ExperimentRecord)> {
    if width < 8 {
        return Err(Error::Unsupported(format!(
            "the Lip-α approximant needs width ≥ 8, got {width}"
        )));
    }
    if m < 2 {
        return Err(Error::Argument(format!("m must be ≥ 2, got {m}")));
    }
    let seminorm = match f.lip() {
        Some((a, _)) if (a - alpha).abs() > 1e-12 => {
            return Err(Error::Contract(format!(
                "target declares a Lip-{a} bound, not Lip-{alpha}"
            )))
        }
        Some((_, b)) => b,
        None => 1.0,
    };
    let start = Instant::now();
    let mf = m as f64;
    let xs: Vec<f64> = (0..=m).map(|i| i as f64 / mf).collect();
    let t = Cpwl::interpolate(xs, |x| f.eval(x))?;
    let mut net = compile_spline(&t, width)?.0;
    let k = pattern_resolution(m);
    if k >= 2 && seminorm > 0.0 {
        let scale = 0.5 * mf.powf(alpha) / seminorm;
        let patterns = (0..m)
            .into_par_iter()
            .map(|i| {
                let g = |x: f64| {
                    let y = (x + i as f64) / mf;
                    scale * (f.eval(y) - t.eval_clamped(y))
                };
                quantize_pattern(&g, k, alpha)
            })
            .collect::<Result<Vec<Pattern>>>()?;
        let mut groups: BTreeMap<&Pattern, Vec<(f64, f64)>> = BTreeMap::new();
        for (i, p) in patterns.iter().enumerate() {
            if !p.is_zero() {
                groups
                    .entry(p)
                    .or_default()
                    .push((i as f64 / mf, (i + 1) as f64 / mf));
            }
        }
        let amplitude = 2.0 * seminorm * mf.powf(-alpha);
        let groups: Vec<(&Pattern, Vec<(f64, f64)>)> = groups.into_iter().collect();
        let parts = groups
            .par_iter()
            .map(|(p, iv)| {
                Ok(compile_self_similar(&p.to_cpwl(alpha).scale(amplitude), iv, width)?.0)
            })
            .collect::<Result<Vec<SpecialNetwork>>>()?;
        for part in &parts {
            net = concat_sum(&net, part)?;
        }
    }
    let sup_error = measure_sigma(f, &net, MEASURE_GRID)?;
    let record = ExperimentRecord {
        m,
        params: param_count(net.width(), net.depth()),
        sup_error,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        error: None,
    };
    Ok((net, record))
}
