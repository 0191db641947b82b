use crate::cpwl::Cpwl;
use crate::error::{Error, Result};

/// Half-width of the band around a rounding tie that is treated as a tie.
const TIE_TOL: f64 = 1e-9;
/// Slack allowed when checking the Lipschitz contract at the nodes.
const CONTRACT_TOL: f64 = 1e-9;

/// Integer levels `m_0..m_k` with `m_0 = m_k = 0` and unit steps at most.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    levels: Vec<i64>,
}

impl Pattern {
    pub fn new(levels: Vec<i64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::Invariant(
                "a pattern needs at least two levels".into(),
            ));
        }
        if levels[0] != 0 || levels[levels.len() - 1] != 0 {
            return Err(Error::Invariant(
                "a pattern must start and end at level 0".into(),
            ));
        }
        if let Some(j) = levels.windows(2).position(|w| (w[1] - w[0]).abs() > 1) {
            return Err(Error::Invariant(format!(
                "levels {} and {} at {j}, {} differ by more than 1",
                levels[j],
                levels[j + 1],
                j + 1
            )));
        }
        Ok(Pattern { levels })
    }

    pub fn levels(&self) -> &[i64] {
        &self.levels
    }

    /// `k`, the number of steps.
    pub fn k(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.levels.iter().all(|&l| l == 0)
    }

    /// The CPwL through `(j/k, m_j h^α)` with `h = 1/k`.
    pub fn to_cpwl(&self, alpha: f64) -> Cpwl {
        let k = self.k() as f64;
        let step = k.powf(-alpha);
        let xs = (0..=self.k()).map(|j| j as f64 / k).collect();
        let vs = self.levels.iter().map(|&l| l as f64 * step).collect();
        Cpwl::new(xs, vs).expect("uniform nodes")
    }
}

/// Quantises `g` (with `g(0) = g(1) = 0`, `|g|_{Lip α} ≤ 1`) to the grid
/// `h^α ℤ` at the nodes `j/k`: each level is the multiple of `h^α` closest to
/// `g(j/k)`, ties going to the previous level. The induced CPwL is within
/// `2 h^α` of `g`.
pub fn quantize_pattern(g: &dyn Fn(f64) -> f64, k: usize, alpha: f64) -> Result<Pattern> {
    if k == 0 {
        return Err(Error::Argument("k must be ≥ 1".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Argument(format!(
            "α must lie in (0, 1], got {alpha}"
        )));
    }
    let kf = k as f64;
    let vals: Vec<f64> = (0..=k).map(|j| g(j as f64 / kf)).collect();
    if vals[0].abs() > CONTRACT_TOL || vals[k].abs() > CONTRACT_TOL {
        return Err(Error::Contract(format!(
            "g must vanish at 0 and 1, got {} and {}",
            vals[0], vals[k]
        )));
    }
    for i in 0..=k {
        for j in i + 1..=k {
            let allowed = ((j - i) as f64 / kf).powf(alpha);
            if (vals[j] - vals[i]).abs() > allowed + CONTRACT_TOL {
                return Err(Error::Contract(format!(
                    "|g({}/{k}) - g({}/{k})| = {} exceeds the Lip-{alpha} bound {allowed}",
                    j,
                    i,
                    (vals[j] - vals[i]).abs()
                )));
            }
        }
    }
    let step = kf.powf(-alpha);
    let mut levels = vec![0i64; k + 1];
    for j in 1..k {
        let t = vals[j] / step;
        let prev = levels[j - 1];
        let lo = t.floor();
        let frac = t - lo;
        levels[j] = if (frac - 0.5).abs() <= TIE_TOL {
            // the previous level is within 3/2 of t, so one of the two
            // candidates is at distance ≤ 1 from it
            if (lo as i64 - prev).abs() <= (lo as i64 + 1 - prev).abs() {
                lo as i64
            } else {
                lo as i64 + 1
            }
        } else {
            t.round() as i64
        };
    }
    Pattern::new(levels)
}
