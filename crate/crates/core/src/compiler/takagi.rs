use crate::error::Result;
use crate::network::{iterate_sum, ReluNetwork, SpecialNetwork};

/// `Σ c_k H^{∘k}` as a special network of width 4 and depth `m`.
pub fn takagi_network(coeffs: &[f64]) -> Result<SpecialNetwork> {
    iterate_sum(&ReluNetwork::hat(), coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpwl::{hat, sup_diff, takagi_partial, Cpwl};
    use crate::network::Network;

    #[test]
    fn matches_partial_sums() {
        let c: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
        let net = takagi_network(&c).unwrap();
        assert_eq!((net.width(), net.depth()), (4, 8));
        let f = net.extract_cpwl().unwrap();
        assert!(sup_diff(&f, &takagi_partial(&c).unwrap()) <= 1e-12);
    }

    #[test]
    fn single_coefficient_is_scaled_hat() {
        let f = takagi_network(&[0.3]).unwrap().extract_cpwl().unwrap();
        assert!(sup_diff(&f, &hat().scale(0.3)) <= 1e-15);
    }

    #[test]
    fn parabola() {
        let m = 9;
        let c: Vec<f64> = (1..=m).map(|k| 0.25f64.powi(k)).collect();
        let f = takagi_network(&c).unwrap().extract_cpwl().unwrap();
        let xs: Vec<f64> = (0..=4000).map(|i| i as f64 / 4000.0).collect();
        let p = Cpwl::interpolate(xs, |x| x * (1.0 - x)).unwrap();
        // the interpolant of x(1-x) on the grid is itself within 1/(4·4000²)
        assert!(sup_diff(&f, &p) <= 0.25f64.powi(m) / 3.0 + 1.6e-8);
    }
}
