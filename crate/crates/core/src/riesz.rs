//! The CPwL trigonometric-like system `C_k, S_k`: exact inner products,
//! truncated Gram matrices, frame bounds and operator-norm estimates.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::cpwl::{merged_breakpoints, sample_sorted, Cpwl};
use crate::error::{Error, Result};

/// Cap on the odd multipliers `2m + 1` in the truncated series.
pub const ODD_CAP: usize = 500;

/// `μ² = 96 / π⁴`.
pub fn mu_squared() -> f64 {
    96.0 / PI.powi(4)
}

/// `π⁴ / 192`.
pub fn lemsum_constant() -> f64 {
    PI.powi(4) / 192.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Cosine,
    Sine,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Cosine => "cosine",
            Kind::Sine => "sine",
        })
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" | "cos" | "c" => Ok(Kind::Cosine),
            "sine" | "sin" | "s" => Ok(Kind::Sine),
            _ => Err(Error::Argument(format!(
                "unknown kind {s:?}; use cosine or sine"
            ))),
        }
    }
}

/// `C_k(x) = C(kx - ⌊kx⌋)` or `S_k(x) = S(kx - ⌊kx⌋)`, where `C` runs
/// `1, -1, 1` over `0, 1/2, 1` and `S` runs `0, 1, -1, 0` over
/// `0, 1/4, 3/4, 1`.
pub fn basis_fn(kind: Kind, k: usize) -> Result<Cpwl> {
    if k == 0 {
        return Err(Error::Argument("frequency index must be ≥ 1".into()));
    }
    let kf = k as f64;
    let (xs, vs): (Vec<f64>, Vec<f64>) = match kind {
        Kind::Cosine => (0..=2 * k)
            .map(|i| (i as f64 / (2.0 * kf), if i % 2 == 0 { 1.0 } else { -1.0 }))
            .unzip(),
        Kind::Sine => {
            let mut nodes = vec![(0.0, 0.0)];
            for i in 0..k {
                let base = i as f64;
                nodes.push(((base + 0.25) / kf, 1.0));
                nodes.push(((base + 0.75) / kf, -1.0));
            }
            nodes.push((1.0, 0.0));
            nodes.into_iter().unzip()
        }
    };
    Cpwl::new(xs, vs)
}

/// `∫₀¹ f g`, exact: on each piece of the merged partition the product of two
/// linear functions integrates to `h/6 (2 f₀g₀ + f₀g₁ + f₁g₀ + 2 f₁g₁)`.
pub fn inner_product(f: &Cpwl, g: &Cpwl) -> f64 {
    let xs = merged_breakpoints(&[f, g]);
    let fv = sample_sorted(f, &xs);
    let gv = sample_sorted(g, &xs);
    let mut s = 0.0;
    for i in 0..xs.len() - 1 {
        let h = xs[i + 1] - xs[i];
        let (f0, f1, g0, g1) = (fv[i], fv[i + 1], gv[i], gv[i + 1]);
        s += h / 6.0 * (2.0 * f0 * g0 + f0 * g1 + f1 * g0 + 2.0 * f1 * g1);
    }
    s
}

/// The system `C_1..C_K, S_1..S_K` in that order.
pub fn system(k: usize) -> Result<Vec<Cpwl>> {
    let mut out = Vec::with_capacity(2 * k);
    for kind in [Kind::Cosine, Kind::Sine] {
        for j in 1..=k {
            out.push(basis_fn(kind, j)?);
        }
    }
    Ok(out)
}

fn gram_of(fs: &[Cpwl]) -> DMatrix<f64> {
    let n = fs.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j < i {
                        0.0
                    } else {
                        inner_product(&fs[i], &fs[j])
                    }
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| if j >= i { rows[i][j] } else { rows[j][i] })
}

/// Gram matrix of the normalised system `√3 C_k, √3 S_k`, `k ≤ K`.
#[derive(Clone, Debug)]
pub struct GramTruncation {
    pub k: usize,
    pub entries: DMatrix<f64>,
}

impl GramTruncation {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Argument("truncation K must be ≥ 1".into()));
        }
        let entries = gram_of(&system(k)?) * 3.0;
        Ok(GramTruncation { k, entries })
    }

    /// `vᵀ G v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(v);
        v.dot(&(&self.entries * &v))
    }
}

/// Unnormalised Gram matrix `⟨·,·⟩` of `C_1..C_K, S_1..S_K`.
pub fn gram(k: usize) -> Result<DMatrix<f64>> {
    if k == 0 {
        return Err(Error::Argument("truncation K must be ≥ 1".into()));
    }
    Ok(gram_of(&system(k)?))
}

fn extreme_eigenvalues(m: DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(m);
    let lo = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Extreme eigenvalues of the unnormalised `2K × 2K` Gram matrix.
pub fn frame_bounds(k: usize) -> Result<(f64, f64)> {
    Ok(extreme_eigenvalues(gram(k)?))
}

/// `Σ_{k≠l} u_k u_l Σ_{m,n ≤ M} (2m+1)⁻² (2n+1)⁻² [(2m+1)k = (2n+1)l]`, with
/// `u[0]` the entry of index 1.
pub fn lemsum_lhs(u: &[f64], cap: usize) -> Result<f64> {
    if let Some(i) = u.iter().position(|&x| !(x >= 0.0)) {
        return Err(Error::Contract(format!("u[{i}] = {} is negative", u[i])));
    }
    let n = u.len();
    let mut total = 0.0;
    for k in 1..=n {
        if u[k - 1] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for m in 0..=cap {
            let a = 2 * m + 1;
            let j = a * k;
            // every odd b ≤ 2·cap + 1 dividing j gives l = j / b
            for l in 1..=n {
                if l == k || u[l - 1] == 0.0 || j % l != 0 {
                    continue;
                }
                let b = j / l;
                if b % 2 == 1 && b <= 2 * cap + 1 {
                    row += u[l - 1] / ((a * a) as f64 * (b * b) as f64);
                }
            }
        }
        total += u[k - 1] * row;
    }
    Ok(total)
}

/// The truncated matrix `T` with `T_{j,k} = μ s_m (2m+1)⁻²` when `j = (2m+1)k`,
/// `m ≤ cap`; `s_m = 1` for cosines and `(-1)^m` for sines. Rows run over every
/// reachable `j`, columns over `k ≤ K`.
fn t_matrix(kind: Kind, k: usize, cap: usize) -> DMatrix<f64> {
    let rows = (2 * cap + 1) * k;
    let mu = mu_squared().sqrt();
    let mut t = DMatrix::zeros(rows, k);
    for col in 1..=k {
        for m in 0..=cap {
            let a = (2 * m + 1) as f64;
            let s = match kind {
                Kind::Sine if m % 2 == 1 => -1.0,
                _ => 1.0,
            };
            t[((2 * m + 1) * col - 1, col - 1)] = mu * s / (a * a);
        }
    }
    t
}

/// `‖T*T - I‖` and `‖TT* - I‖` on the first `K` indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorGaps {
    pub k: usize,
    pub tstar_t: f64,
    pub t_tstar: f64,
}

fn spectral_gap(m: DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let (lo, hi) = extreme_eigenvalues(m - DMatrix::identity(n, n));
    lo.abs().max(hi.abs())
}

pub fn operator_gaps(kind: Kind, k: usize) -> Result<OperatorGaps> {
    if k == 0 {
        return Err(Error::Argument("truncation K must be ≥ 1".into()));
    }
    let t = t_matrix(kind, k, ODD_CAP);
    let tstar_t = spectral_gap(t.transpose() * &t);
    // rows j ≤ K only reach columns k ≤ j, so this block of TT* is exact
    let top = t.rows(0, k).into_owned();
    let t_tstar = spectral_gap(&top * top.transpose());
    Ok(OperatorGaps {
        k,
        tstar_t,
        t_tstar,
    })
}

/// `‖T*T - I‖₂` truncated to `K` columns.
pub fn operator_gap(kind: Kind, k: usize) -> Result<f64> {
    Ok(operator_gaps(kind, k)?.tstar_t)
}

/// `Σ_{m > cap} (2m+1)⁻²`, the neglected tail.
pub fn odd_tail(cap: usize) -> f64 {
    let head: f64 = (0..=cap).map(|m| 1.0 / ((2 * m + 1) as f64).powi(2)).sum();
    PI * PI / 8.0 - head
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpwl::hat;
    use proptest::prelude::*;

    #[test]
    fn atoms() {
        let c = basis_fn(Kind::Cosine, 1).unwrap();
        assert_eq!(c.eval(0.0).unwrap(), 1.0);
        assert_eq!(c.eval(0.5).unwrap(), -1.0);
        let s = basis_fn(Kind::Sine, 1).unwrap();
        assert_eq!(s.eval(0.25).unwrap(), 1.0);
        assert_eq!(s.eval(0.5).unwrap(), 0.0);
        let c3 = basis_fn(Kind::Cosine, 3).unwrap();
        for i in 0..50 {
            let x = i as f64 / 150.0;
            assert!((c3.eval(x).unwrap() - c3.eval(x + 1.0 / 3.0).unwrap()).abs() < 1e-12);
        }
        for k in 1..10 {
            assert_eq!(
                basis_fn(Kind::Cosine, k)
                    .unwrap()
                    .canonicalize()
                    .interior_breakpoints(),
                2 * k - 1
            );
            assert_eq!(
                basis_fn(Kind::Sine, k)
                    .unwrap()
                    .canonicalize()
                    .interior_breakpoints(),
                2 * k
            );
        }
        assert!(basis_fn(Kind::Sine, 0).is_err());
    }

    #[test]
    fn inner_products() {
        let c = basis_fn(Kind::Cosine, 1).unwrap();
        let s = basis_fn(Kind::Sine, 1).unwrap();
        assert!((inner_product(&c, &c) - 1.0 / 3.0).abs() < 1e-15);
        assert!(inner_product(&c, &s).abs() < 1e-15);
        assert!((inner_product(&Cpwl::constant(1.0), &hat()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gram_basics() {
        let g = GramTruncation::new(6).unwrap();
        for i in 0..12 {
            assert!((g.entries[(i, i)] - 1.0).abs() < 1e-12);
            for j in 0..12 {
                assert_eq!(g.entries[(i, j)], g.entries[(j, i)]);
            }
        }
        let (lo, hi) = frame_bounds(1).unwrap();
        assert!((lo - 1.0 / 3.0).abs() < 1e-12 && (hi - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn frame_bounds_are_monotone() {
        let mut prev = (f64::INFINITY, 0.0);
        for k in [1, 2, 4, 8, 16] {
            let (lo, hi) = frame_bounds(k).unwrap();
            assert!(lo <= prev.0 + 1e-12 && hi >= prev.1 - 1e-12);
            assert!(lo >= 1.0 / 6.0 - 1e-6 && hi <= 0.5 + 1e-6);
            prev = (lo, hi);
        }
    }

    #[test]
    fn lemsum() {
        assert_eq!(lemsum_lhs(&[0.0, 2.0], 100).unwrap(), 0.0);
        let u = [1.0, 0.0, 1.0];
        let want: f64 = 2.0
            * (0..=100usize)
                .filter(|m| 3 * (2 * m + 1) <= 201)
                .map(|m| {
                    let a = (2 * m + 1) as f64;
                    1.0 / (a * a * (3.0 * a).powi(2))
                })
                .sum::<f64>();
        assert!((lemsum_lhs(&u, 100).unwrap() - want).abs() < 1e-15);
        assert!(lemsum_lhs(&[1.0, -1.0], 10).is_err());
    }

    #[test]
    fn gaps() {
        let g = operator_gaps(Kind::Cosine, 1).unwrap();
        assert!((g.t_tstar - (1.0 - mu_squared()).abs()).abs() < 1e-12);
        for kind in [Kind::Cosine, Kind::Sine] {
            let g = operator_gaps(kind, 16).unwrap();
            assert!(g.tstar_t <= 0.5 + 1e-6, "{g:?}");
            assert!(g.t_tstar <= 1.0 - mu_squared() + 0.5 + 1e-6, "{g:?}");
        }
        assert!(odd_tail(ODD_CAP) < 1e-3);
    }

    proptest! {
        #[test]
        fn quadratic_form(coef in proptest::collection::vec(-1.0f64..1.0, 8)) {
            let fs = system(4).unwrap();
            let terms: Vec<(f64, &Cpwl)> = coef.iter().copied().zip(fs.iter()).collect();
            let f = crate::cpwl::linear_combination(&terms, 0.0);
            let g = gram(4).unwrap();
            let v = nalgebra::DVector::from_column_slice(&coef);
            prop_assert!((inner_product(&f, &f) - v.dot(&(&g * &v))).abs() < 1e-10);
        }
    }
}
