//! Random MIMO channels, the zero-forcing precoder and the receive equation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, SlpError};

/// Condition-number cutoff above which a channel draw is rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Frobenius tolerance on `H * W - I` for an accepted precoder.
pub const ZF_IDENTITY_TOL: f64 = 1e-9;

/// An `N_r x N_t` complex channel matrix with `N_t >= N_r`.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    h: DMatrix<Complex64>,
}

impl ChannelMatrix {
    pub fn from_matrix(h: DMatrix<Complex64>) -> Result<ChannelMatrix> {
        let (n_r, n_t) = h.shape();
        if n_r < 1 || n_t < n_r {
            return Err(SlpError::AntennaCount { n_t, n_r });
        }
        Ok(ChannelMatrix { h })
    }

    pub fn n_r(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_t(&self) -> usize {
        self.h.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.h
    }

    /// Noiseless receive: `y = H x`.
    pub fn apply(&self, x: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if x.len() != self.n_t() {
            return Err(SlpError::DimensionMismatch {
                context: "transmit vector",
                expected: self.n_t(),
                actual: x.len(),
            });
        }
        Ok(&self.h * x)
    }
}

/// The right pseudo-inverse `W = H^H (H H^H)^{-1}`, so `H W = I`.
#[derive(Debug, Clone)]
pub struct ZfPrecoder {
    w: DMatrix<Complex64>,
}

impl ZfPrecoder {
    pub fn n_t(&self) -> usize {
        self.w.nrows()
    }

    pub fn n_r(&self) -> usize {
        self.w.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.w
    }
}

/// Draws an i.i.d. CN(0, 1) channel: real and imaginary parts are each
/// zero-mean Gaussian with variance 1/2. Reproducible under a fixed seed.
pub fn draw_channel(n_r: usize, n_t: usize, rng_seed: u64) -> Result<ChannelMatrix> {
    if n_r < 1 || n_t < n_r {
        return Err(SlpError::AntennaCount { n_t, n_r });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid std dev");
    // Row-major fill keeps draws stable if the matrix layout ever changes.
    let entries: Vec<Complex64> = (0..n_r * n_t)
        .map(|_| Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    let h = DMatrix::from_row_iterator(n_r, n_t, entries);
    Ok(ChannelMatrix { h })
}

/// Builds the zero-forcing precoder through a Cholesky factorization of
/// `H H^H`, rejecting channels whose condition number exceeds
/// [`CONDITION_LIMIT`] or whose `H W - I` residual exceeds
/// [`ZF_IDENTITY_TOL`].
pub fn zf_precoder(h: &ChannelMatrix) -> Result<ZfPrecoder> {
    let n_r = h.n_r();
    let singular_values = h.matrix().clone().svd(false, false).singular_values;
    let s_max = singular_values.max();
    let s_min = singular_values.min();
    // cond(H H^H) = (s_max / s_min)^2
    let cond = if s_min > 0.0 {
        (s_max / s_min).powi(2)
    } else {
        f64::INFINITY
    };
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(SlpError::SingularChannel { cond });
    }

    let gram = h.matrix() * h.matrix().adjoint();
    let chol = gram.cholesky().ok_or(SlpError::SingularChannel { cond })?;
    let w = h.matrix().adjoint() * chol.inverse();

    let residual = (h.matrix() * &w - DMatrix::<Complex64>::identity(n_r, n_r)).norm();
    if !(residual < ZF_IDENTITY_TOL) {
        return Err(SlpError::SingularChannel { cond });
    }
    Ok(ZfPrecoder { w })
}

/// Receive equation `y = H x + n` with i.i.d. CN(0, noise_var) noise;
/// `noise_var = 0` gives the noiseless case.
pub fn apply_channel(
    h: &ChannelMatrix,
    x: &DVector<Complex64>,
    noise_var: f64,
    rng_seed: u64,
) -> Result<DVector<Complex64>> {
    if !(noise_var >= 0.0) {
        return Err(SlpError::InvalidInput(format!(
            "noise variance must be nonnegative, got {noise_var}"
        )));
    }
    let mut y = h.apply(x)?;
    if noise_var > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let normal = Normal::new(0.0, (noise_var / 2.0).sqrt()).expect("valid std dev");
        for yk in y.iter_mut() {
            *yk += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{draw_symbols, make_mpsk};

    #[test]
    fn draw_channel_is_seed_deterministic() {
        let a = draw_channel(10, 10, 7).unwrap();
        let b = draw_channel(10, 10, 7).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = draw_channel(10, 10, 8).unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn draw_channel_entry_energy_is_one() {
        let h = draw_channel(100, 1000, 3).unwrap();
        let mean_energy: f64 =
            h.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>() / (100.0 * 1000.0);
        assert!((mean_energy - 1.0).abs() < 0.02, "E|h|^2 = {mean_energy}");
    }

    #[test]
    fn wide_channel_rejected() {
        assert!(matches!(
            draw_channel(4, 2, 1),
            Err(SlpError::AntennaCount { .. })
        ));
        assert!(matches!(
            draw_channel(0, 0, 1),
            Err(SlpError::AntennaCount { .. })
        ));
    }

    #[test]
    fn identity_channel_inverts_to_identity() {
        let h = ChannelMatrix::from_matrix(DMatrix::identity(3, 3)).unwrap();
        let w = zf_precoder(&h).unwrap();
        assert!((w.matrix() - DMatrix::<Complex64>::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn zf_identity_holds_for_random_channels() {
        for seed in 0..20 {
            let h = draw_channel(4, 6, seed).unwrap();
            let w = zf_precoder(&h).unwrap();
            let residual = (h.matrix() * w.matrix() - DMatrix::<Complex64>::identity(4, 4)).norm();
            assert!(residual < 1e-9, "seed {seed}: residual {residual:.3e}");
        }
    }

    #[test]
    fn duplicated_row_is_singular() {
        let mut h = draw_channel(3, 5, 1).unwrap().matrix().clone();
        let row = h.row(0).into_owned();
        h.set_row(2, &row);
        let h = ChannelMatrix::from_matrix(h).unwrap();
        assert!(matches!(
            zf_precoder(&h),
            Err(SlpError::SingularChannel { .. })
        ));
    }

    #[test]
    fn precoder_scales_inversely_with_channel() {
        let h = draw_channel(3, 5, 9).unwrap();
        let scaled = ChannelMatrix::from_matrix(h.matrix() * Complex64::new(2.5, 0.0)).unwrap();
        let w = zf_precoder(&h).unwrap();
        let w_scaled = zf_precoder(&scaled).unwrap();
        assert!((w_scaled.matrix() * Complex64::new(2.5, 0.0) - w.matrix()).norm() < 1e-9);
    }

    #[test]
    fn noiseless_receive_recovers_targets() {
        let qpsk = make_mpsk(4).unwrap();
        let h = draw_channel(4, 6, 5).unwrap();
        let w = zf_precoder(&h).unwrap();
        let s = draw_symbols(&qpsk, 4, 17);
        let gamma = 10f64.powf(10.0 / 20.0);
        let target = DVector::from_iterator(4, s.entries().iter().map(|&p| p * gamma));
        // x = W (gamma o s) -> y = gamma o s
        let x = w.matrix() * &target;
        let y = apply_channel(&h, &x, 0.0, 0).unwrap();
        assert!((y - &target).norm() < 1e-9);

        // x = W (gamma o s + u) -> y = gamma o s + u
        let u = DVector::from_fn(4, |k, _| Complex64::new(0.3 + k as f64 * 0.1, -0.2));
        let x = w.matrix() * (&target + &u);
        let y = apply_channel(&h, &x, 0.0, 0).unwrap();
        assert!((y - (&target + &u)).norm() < 1e-9);
    }

    #[test]
    fn noise_power_accounts() {
        let h = draw_channel(10, 10, 2).unwrap();
        let x = DVector::from_element(10, Complex64::new(1.0, 0.0));
        let clean = h.apply(&x).unwrap();
        let noise_var = 0.5;
        let trials = 2000;
        let mut acc = 0.0;
        for seed in 0..trials {
            let y = apply_channel(&h, &x, noise_var, seed).unwrap();
            acc += (y - &clean).norm_squared();
        }
        let measured = acc / trials as f64;
        let expected = 10.0 * noise_var;
        assert!(
            (measured / expected - 1.0).abs() < 0.05,
            "noise power {measured} vs {expected}"
        );
    }

    #[test]
    fn negative_noise_var_rejected() {
        let h = draw_channel(2, 2, 1).unwrap();
        let x = DVector::from_element(2, Complex64::new(1.0, 0.0));
        assert!(apply_channel(&h, &x, -1.0, 0).is_err());
        assert!(apply_channel(&h, &x, f64::NAN, 0).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let h = draw_channel(2, 3, 1).unwrap();
        let x = DVector::from_element(2, Complex64::new(1.0, 0.0));
        assert!(matches!(
            apply_channel(&h, &x, 0.0, 0),
            Err(SlpError::DimensionMismatch { .. })
        ));
    }
}
