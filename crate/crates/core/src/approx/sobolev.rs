use std::sync::Arc;

use crate::cpwl::Cpwl;
use crate::error::{Error, Result};

use super::TargetFunction;

/// Panels of the composite midpoint rule.
pub const QUADRATURE_PANELS: usize = 1024;

/// `f = f0 + f1` with `f0' = clamp(f', -λ, λ)` and `λ = t^{-1/p} ‖f'‖_p`.
#[derive(Clone, Debug)]
pub struct SobolevSplit {
    pub f0: TargetFunction,
    pub f1: TargetFunction,
    pub lambda: f64,
    /// `‖f'‖_p` by quadrature.
    pub norm_p: f64,
    /// `‖f1'‖_1` by quadrature.
    pub f1_l1: f64,
    /// `‖f0'‖_∞` over the quadrature nodes.
    pub f0_linf: f64,
    /// `(‖f1'‖_1 + t ‖f0'‖_∞) / (‖f'‖_p t^{1 - 1/p})`; at most 2 in exact
    /// arithmetic.
    pub ratio: f64,
}

/// Splits `f` by truncating its derivative at the level `λ`.
///
/// `f0(x) = f(0) + ∫₀ˣ clamp(f', -λ, λ)` is the piecewise-linear antiderivative
/// given by the midpoint rule, and `f1 = f - f0`, so `f1(0) = 0` and
/// `f0 + f1 = f` holds up to rounding.
pub fn sobolev_split(
    f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    fprime: impl Fn(f64) -> f64,
    p: f64,
    t: f64,
) -> Result<SobolevSplit> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Unsupported(format!(
            "the split needs 1 < p < ∞, got p = {p}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::Argument(format!("t must be positive, got {t}")));
    }
    let n = QUADRATURE_PANELS;
    let h = 1.0 / n as f64;
    let d: Vec<f64> = (0..n).map(|i| fprime((i as f64 + 0.5) * h)).collect();
    let norm_p = (d.iter().map(|v| v.abs().powf(p)).sum::<f64>() * h).powf(1.0 / p);
    let lambda = t.powf(-1.0 / p) * norm_p;
    let clamped: Vec<f64> = d.iter().map(|v| v.clamp(-lambda, lambda)).collect();
    let f1_l1 = d
        .iter()
        .zip(&clamped)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        * h;
    let f0_linf = clamped.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let mut vs = Vec::with_capacity(n + 1);
    let mut acc = f(0.0);
    vs.push(acc);
    for c in &clamped {
        acc += c * h;
        vs.push(acc);
    }
    let f0 = Cpwl::new((0..=n).map(|i| i as f64 * h).collect(), vs)?;
    let ratio = if norm_p == 0.0 {
        0.0
    } else {
        (f1_l1 + t * f0_linf) / (norm_p * t.powf(1.0 - 1.0 / p))
    };
    let f = Arc::new(f);
    let f0_inner = f0.clone();
    let f1 = TargetFunction::new(move |x| f(x) - f0_inner.eval_clamped(x));
    Ok(SobolevSplit {
        f0: TargetFunction::from_cpwl(f0),
        f1,
        lambda,
        norm_p,
        f1_l1,
        f0_linf,
        ratio,
    })
}
