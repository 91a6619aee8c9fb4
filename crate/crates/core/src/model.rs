//! Discrete-time Wiener phase-noise channel
//! `y_k = x_k e^{j phi_k} + w_k`, with `phi_k = phi_{k-1} + Delta_k`,
//! `Delta_k ~ N(0, sigma_delta^2)` and circularly symmetric AWGN of
//! per-component variance `sigma_w^2`, plus the equivalent amplitude/phase
//! form used everywhere else in the crate.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::real::{real, Real};
use crate::special::wrap_angle;

/// Physical scenario: AWGN per-component variance, phase-innovation variance
/// and the average-power budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<T> {
    sigma_w_sq: T,
    sigma_delta_sq: T,
    es: T,
}

impl<T: Real> ChannelParams<T> {
    pub fn new(sigma_w_sq: T, sigma_delta_sq: T, es: T) -> Result<Self> {
        if !(sigma_w_sq > T::zero()) || !sigma_w_sq.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sigma_w_sq must be finite and positive, got {sigma_w_sq:?}"
            )));
        }
        if !(sigma_delta_sq >= T::zero()) || !sigma_delta_sq.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sigma_delta_sq must be finite and nonnegative, got {sigma_delta_sq:?}"
            )));
        }
        if !(es > T::zero()) || !es.is_finite() {
            return Err(Error::InvalidInput(format!(
                "es must be finite and positive, got {es:?}"
            )));
        }
        Ok(Self {
            sigma_w_sq,
            sigma_delta_sq,
            es,
        })
    }

    /// Build from an oscillator 3-dB linewidth and the symbol interval,
    /// using `sigma_delta^2 = 4 pi f_3dB T_s`.
    pub fn from_oscillator(f_3db: T, t_s: T, sigma_w_sq: T, es: T) -> Result<Self> {
        if !(f_3db >= T::zero()) || !(t_s > T::zero()) {
            return Err(Error::InvalidInput(
                "f_3db must be nonnegative and t_s positive".into(),
            ));
        }
        Self::new(sigma_w_sq, real::<T>(4.0) * T::PI() * f_3db * t_s, es)
    }

    /// Build from an SNR in dB at fixed `es`, with `SNR = es / (2 sigma_w^2)`.
    pub fn from_snr_db(snr_db: T, sigma_delta_sq: T, es: T) -> Result<Self> {
        let snr = real::<T>(10.0).powf(snr_db / real(10.0));
        Self::new(es / (real::<T>(2.0) * snr), sigma_delta_sq, es)
    }

    pub fn sigma_w_sq(&self) -> T {
        self.sigma_w_sq
    }

    pub fn sigma_delta_sq(&self) -> T {
        self.sigma_delta_sq
    }

    pub fn es(&self) -> T {
        self.es
    }

    /// Linear SNR, `es / (2 sigma_w^2)`.
    pub fn snr(&self) -> T {
        self.es / (real::<T>(2.0) * self.sigma_w_sq)
    }
}

/// SNR in dB.
pub fn snr_db<T: Real>(params: &ChannelParams<T>) -> T {
    real::<T>(10.0) * params.snr().log10()
}

/// A block of transmitted symbols in polar form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock<T> {
    amplitudes: Vec<T>,
    phases: Vec<T>,
}

impl<T: Real> SymbolBlock<T> {
    /// Phases are wrapped to `[0, 2 pi)`; amplitudes must be finite and
    /// nonnegative.
    pub fn new(amplitudes: Vec<T>, phases: Vec<T>) -> Result<Self> {
        if amplitudes.len() != phases.len() {
            return Err(Error::InvalidInput(format!(
                "amplitude/phase length mismatch: {} vs {}",
                amplitudes.len(),
                phases.len()
            )));
        }
        if amplitudes.iter().any(|a| !a.is_finite() || *a < T::zero()) {
            return Err(Error::InvalidInput(
                "amplitudes must be finite and nonnegative".into(),
            ));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("phases must be finite".into()));
        }
        let phases = phases.into_iter().map(wrap_angle).collect();
        Ok(Self { amplitudes, phases })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[T] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[T] {
        &self.phases
    }

    /// `x_k = R_k e^{j Theta_k}`.
    pub fn complex_symbols(&self) -> Vec<Complex<T>> {
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .map(|(&r, &th)| Complex::from_polar(r, th))
            .collect()
    }
}

/// One simulated channel realization in amplitude/phase form, keeping the
/// unwrapped phase path and the raw noise components so the complex form can
/// be reconstructed exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock<T> {
    amplitudes: Vec<T>,
    phases: Vec<T>,
    phase_path: Vec<T>,
    inphase_noise: Vec<T>,
    quadrature_noise: Vec<T>,
}

impl<T: Real> ReceivedBlock<T> {
    /// Received amplitudes `r_k`.
    pub fn amplitudes(&self) -> &[T] {
        &self.amplitudes
    }

    /// Received phases `theta_k`, wrapped to `[0, 2 pi)`.
    pub fn phases(&self) -> &[T] {
        &self.phases
    }

    /// Unwrapped Wiener phase path `phi_k` (accumulated increments).
    pub fn phase_path(&self) -> &[T] {
        &self.phase_path
    }

    /// Noise component parallel to the rotated symbol, `w_{k,par}`.
    pub fn inphase_noise(&self) -> &[T] {
        &self.inphase_noise
    }

    /// Noise component orthogonal to the rotated symbol, `w_{k,perp}`.
    pub fn quadrature_noise(&self) -> &[T] {
        &self.quadrature_noise
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// `y_k = r_k e^{j theta_k}`.
    pub fn complex_outputs(&self) -> Vec<Complex<T>> {
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .map(|(&r, &th)| Complex::from_polar(r, th))
            .collect()
    }
}

/// Simulate one block through the channel. Deterministic given
/// `(params, input, seed, phi0)`; per step the generator is consumed in the
/// fixed order (Delta, w_par, w_perp).
pub fn simulate<T: Real>(
    params: &ChannelParams<T>,
    input: &SymbolBlock<T>,
    seed: u64,
    phi0: T,
) -> Result<ReceivedBlock<T>> {
    if input.is_empty() {
        return Err(Error::InvalidInput("input block is empty".into()));
    }
    if !phi0.is_finite() {
        return Err(Error::InvalidInput(format!(
            "initial phase must be finite, got {phi0:?}"
        )));
    }
    let n = input.len();
    let sigma_w = params.sigma_w_sq().sqrt();
    let sigma_delta = params.sigma_delta_sq().sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut amplitudes = Vec::with_capacity(n);
    let mut phases = Vec::with_capacity(n);
    let mut phase_path = Vec::with_capacity(n);
    let mut inphase = Vec::with_capacity(n);
    let mut quadrature = Vec::with_capacity(n);

    let mut phi = phi0;
    for k in 0..n {
        phi += sigma_delta * T::standard_normal(&mut rng);
        let w_par = sigma_w * T::standard_normal(&mut rng);
        let w_perp = sigma_w * T::standard_normal(&mut rng);
        let big_r = input.amplitudes()[k];
        let theta_in = input.phases()[k];
        let a = big_r + w_par;
        let r = (a * a + w_perp * w_perp).sqrt();
        // atan2 keeps the polar form exactly equal to the complex form even
        // when the in-phase component goes negative.
        let n_k = w_perp.atan2(a);
        amplitudes.push(r);
        phases.push(wrap_angle(theta_in + n_k + phi));
        phase_path.push(phi);
        inphase.push(w_par);
        quadrature.push(w_perp);
    }

    Ok(ReceivedBlock {
        amplitudes,
        phases,
        phase_path,
        inphase_noise: inphase,
        quadrature_noise: quadrature,
    })
}

/// Simulate with the initial phase drawn uniformly from `[0, 2 pi)`, which
/// makes the phase process stationary from the first sample.
pub fn simulate_stationary<T: Real>(
    params: &ChannelParams<T>,
    input: &SymbolBlock<T>,
    seed: u64,
) -> Result<ReceivedBlock<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(crate::special::derive_seed(seed, 0x01F0));
    let phi0 = T::unit_uniform(&mut rng) * T::TAU();
    simulate(params, input, seed, phi0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_input(n: usize) -> SymbolBlock<f64> {
        SymbolBlock::new(vec![1.0; n], vec![0.0; n]).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ChannelParams::new(0.0, 1e-3, 1.0).is_err());
        assert!(ChannelParams::new(1e-3, -1e-3, 1.0).is_err());
        assert!(ChannelParams::new(1e-3, 1e-3, 0.0).is_err());
        assert!(ChannelParams::new(f64::NAN, 1e-3, 1.0).is_err());
        assert!(ChannelParams::new(5e-3, 0.0, 1.0).is_ok());
    }

    #[test]
    fn snr_definition() {
        let p = ChannelParams::new(0.5, 0.0, 1.0).unwrap();
        assert_relative_eq!(snr_db(&p), 0.0, epsilon = 1e-12);
        let p = ChannelParams::new(5e-3, 0.0, 1.0).unwrap();
        assert_relative_eq!(snr_db(&p), 20.0, epsilon = 1e-12);
        let p = ChannelParams::new(5e-6, 0.0, 1.0).unwrap();
        assert_relative_eq!(snr_db(&p), 50.0, epsilon = 1e-9);
    }

    #[test]
    fn from_snr_round_trips() {
        let p = ChannelParams::from_snr_db(17.5, 1e-3, 1.0).unwrap();
        assert_relative_eq!(snr_db(&p), 17.5, epsilon = 1e-12);
    }

    #[test]
    fn oscillator_conversion() {
        let p = ChannelParams::from_oscillator(1e5, 1e-9, 5e-3, 1.0).unwrap();
        assert_relative_eq!(
            p.sigma_delta_sq(),
            4.0 * std::f64::consts::PI * 1e5 * 1e-9,
            epsilon = 1e-15
        );
    }

    #[test]
    fn noise_free_identity() {
        let p = ChannelParams::new(1e-300, 0.0, 1.0).unwrap();
        let out = simulate(&p, &unit_input(4), 3, 0.0).unwrap();
        for k in 0..4 {
            assert_relative_eq!(out.amplitudes()[k], 1.0, epsilon = 1e-9);
            assert!(out.phases()[k] < 1e-9 || out.phases()[k] > std::f64::consts::TAU - 1e-9);
        }
    }

    #[test]
    fn zero_innovation_keeps_phase_constant() {
        let p = ChannelParams::new(5e-3, 0.0, 1.0).unwrap();
        let out = simulate(&p, &unit_input(64), 11, 1.25).unwrap();
        for &phi in out.phase_path() {
            assert_eq!(phi, 1.25);
        }
    }

    #[test]
    fn innovation_variance_moment_check() {
        let p = ChannelParams::new(5e-3, 1e-3, 1.0).unwrap();
        let n = 100_000;
        let out = simulate(&p, &unit_input(n), 42, 0.0).unwrap();
        let incs: Vec<f64> = out
            .phase_path()
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect();
        let mean = incs.iter().sum::<f64>() / incs.len() as f64;
        let var = incs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (incs.len() - 1) as f64;
        // var(sample variance) ~ 2 sigma^4 / n for Gaussian increments
        let se = (2.0 / incs.len() as f64).sqrt() * 1e-3;
        assert!(
            (var - 1e-3).abs() < 3.0 * se,
            "sample variance {var} vs 1e-3 (3se = {})",
            3.0 * se
        );
    }

    #[test]
    fn polar_and_complex_forms_agree() {
        let p = ChannelParams::new(5e-3, 1e-3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 2000;
        let amps: Vec<f64> = (0..n).map(|_| f64::unit_uniform(&mut rng) * 2.0).collect();
        let phs: Vec<f64> = (0..n)
            .map(|_| f64::unit_uniform(&mut rng) * std::f64::consts::TAU)
            .collect();
        let input = SymbolBlock::new(amps, phs).unwrap();
        let out = simulate(&p, &input, 17, 0.4).unwrap();
        let xs = input.complex_symbols();
        let ys = out.complex_outputs();
        for k in 0..n {
            // reconstruct w_k in the fixed frame and form y = x e^{j phi} + w
            let rot = Complex::from_polar(1.0, input.phases()[k] + out.phase_path()[k]);
            let w = Complex::new(out.inphase_noise()[k], out.quadrature_noise()[k]) * rot;
            let y = xs[k] * Complex::from_polar(1.0, out.phase_path()[k]) + w;
            let err = (y - ys[k]).norm() / ys[k].norm().max(1e-30);
            assert!(err < 1e-10, "sample {k}: {err}");
            // stored amplitude reconstructs exactly from stored components
            let a = input.amplitudes()[k] + out.inphase_noise()[k];
            let r = (a * a + out.quadrature_noise()[k].powi(2)).sqrt();
            assert_eq!(r.to_bits(), out.amplitudes()[k].to_bits());
        }
    }

    #[test]
    fn seed_determinism_bit_identical() {
        let p = ChannelParams::new(5e-4, 1e-3, 1.0).unwrap();
        let a = simulate(&p, &unit_input(256), 1234, 0.7).unwrap();
        let b = simulate(&p, &unit_input(256), 1234, 0.7).unwrap();
        assert_eq!(a, b);
        let c = simulate(&p, &unit_input(256), 1235, 0.7).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn empty_input_and_bad_phi_rejected() {
        let p = ChannelParams::new(5e-4, 1e-3, 1.0).unwrap();
        let empty = SymbolBlock::new(vec![], vec![]).unwrap();
        assert!(matches!(
            simulate(&p, &empty, 1, 0.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            simulate(&p, &unit_input(3), 1, f64::NAN),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn symbol_block_validation_and_wrapping() {
        assert!(SymbolBlock::new(vec![1.0], vec![]).is_err());
        assert!(SymbolBlock::new(vec![-1.0], vec![0.0]).is_err());
        assert!(SymbolBlock::new(vec![1.0], vec![f64::INFINITY]).is_err());
        let b = SymbolBlock::new(vec![1.0], vec![-0.5]).unwrap();
        assert_relative_eq!(b.phases()[0], std::f64::consts::TAU - 0.5, epsilon = 1e-12);
    }
}
