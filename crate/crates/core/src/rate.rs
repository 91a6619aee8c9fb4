//! Achievable-information-rate estimation for a given input law: a particle
//! forward pass over the phase state for `log f(y^n | x^n)`, and an
//! amplitude-domain importance-sampled estimate of `log f(y^n)` that
//! exploits the circular symmetry of the input (uniform phases make the
//! output phases i.i.d. uniform, so the unconditional density factorizes
//! over amplitude blocks).

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{simulate, ChannelParams, SymbolBlock};
use crate::quad::InputDistParams;
use crate::real::{real, Real};
use crate::sampler;
use crate::special::{derive_seed, ln_i0, logsumexp, normal_cdf, wrap_angle};

// ---------------------------------------------------------------------------
// Input laws
// ---------------------------------------------------------------------------

/// Input distribution used for rate estimation. Phases are always i.i.d.
/// uniform; the law fixes the amplitude process.
#[derive(Debug, Clone, PartialEq)]
pub enum InputLaw<T> {
    /// Solved block-dependent amplitude density (`m` = 2 or 3).
    Block(InputDistParams<T>),
    /// Circularly symmetric Gaussian of power `es` (Rayleigh amplitudes).
    Gaussian,
    /// Half-normal amplitudes (amplitude squared is Gamma(1/2)-distributed),
    /// the classical high-SNR reference input.
    GammaAmplitude,
}

impl<T: Real> InputLaw<T> {
    pub fn label(&self) -> &'static str {
        match self {
            InputLaw::Block(d) if d.m == 2 => "m2",
            InputLaw::Block(_) => "m3",
            InputLaw::Gaussian => "gaussian",
            InputLaw::GammaAmplitude => "gamma",
        }
    }

    /// Amplitude block length (1 for the i.i.d. reference laws).
    pub fn block_len(&self) -> usize {
        match self {
            InputLaw::Block(d) => d.m,
            _ => 1,
        }
    }

    /// Natural log of the amplitude density of one time-ordered block.
    fn ln_block_density(&self, params: &ChannelParams<T>, block: &[T]) -> Result<T> {
        match self {
            InputLaw::Block(dist) => sampler::ln_f_input_density(params, dist, block),
            InputLaw::Gaussian => {
                let es = params.es();
                let r = block[0];
                Ok((real::<T>(2.0) * r / es).ln() - r * r / es)
            }
            InputLaw::GammaAmplitude => {
                let es = params.es();
                let r = block[0];
                Ok((real::<T>(2.0) / (T::PI() * es)).ln() * real::<T>(0.5)
                    - r * r / (real::<T>(2.0) * es))
            }
        }
    }

    /// Draw one time-ordered amplitude block.
    fn draw_block<R: Rng>(
        &self,
        params: &ChannelParams<T>,
        rng: &mut R,
        out: &mut [T],
    ) -> Result<()> {
        match self {
            InputLaw::Block(dist) => {
                let mut proposed = 0u64;
                sampler::draw_amplitude_block(params, dist, rng, out, &mut proposed)
            }
            InputLaw::Gaussian => {
                let u = T::one() - T::unit_uniform(rng);
                out[0] = (-params.es() * u.ln()).sqrt();
                Ok(())
            }
            InputLaw::GammaAmplitude => {
                out[0] = T::standard_normal(rng).abs() * params.es().sqrt();
                Ok(())
            }
        }
    }

    /// Draw a full input of `n` symbols (n divisible by the block length).
    pub fn draw_input(
        &self,
        params: &ChannelParams<T>,
        n: usize,
        seed: u64,
    ) -> Result<SymbolBlock<T>> {
        match self {
            InputLaw::Block(dist) => {
                let drawn = sampler::draw_input_block(params, dist, n / dist.m, seed)?;
                Ok(drawn.block)
            }
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut amps = Vec::with_capacity(n);
                let mut phases = Vec::with_capacity(n);
                let mut slot = [T::zero(); 1];
                for _ in 0..n {
                    self.draw_block(params, &mut rng, &mut slot)?;
                    amps.push(slot[0]);
                    phases.push(T::unit_uniform(&mut rng) * T::TAU());
                }
                SymbolBlock::new(amps, phases)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Phase particle filter
// ---------------------------------------------------------------------------

/// Posterior representation of the phase state.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud<T> {
    /// Phase hypotheses.
    pub phases: Vec<T>,
    /// Normalized log weights (`logsumexp == 0`).
    pub log_weights: Vec<T>,
    /// Effective sample size, in `[1, P]`.
    pub ess: T,
}

/// Initial phase knowledge of the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialPhase<T> {
    /// Stationary start: uniform phases on `[0, 2 pi)`.
    Uniform,
    /// Known initial phase (cloud starts at `phi_0` propagated one step).
    Known(T),
}

struct UnknownInputState<T> {
    law: InputLaw<T>,
    m: usize,
    pos: usize,
    /// Current amplitude block per particle, flattened P x m.
    blocks: Vec<T>,
    /// Input symbols attached to the particles for the current step.
    symbols: Vec<Complex<T>>,
}

/// Bootstrap particle filter over the Wiener phase state with systematic
/// resampling. Emissions either condition on a known input symbol or
/// marginalize the input law through per-particle draws.
pub struct PhaseParticleFilter<T: Real> {
    params: ChannelParams<T>,
    phases: Vec<T>,
    log_weights: Vec<T>,
    rng: ChaCha8Rng,
    resample_fraction: T,
    collapse_count: usize,
    resample_count: usize,
    input: Option<UnknownInputState<T>>,
    emissions: Vec<T>,
    ess: T,
}

impl<T: Real> PhaseParticleFilter<T> {
    /// Filter for a known input stream.
    pub fn new(
        params: &ChannelParams<T>,
        n_particles: usize,
        init: InitialPhase<T>,
        seed: u64,
    ) -> Result<Self> {
        Self::build(params, n_particles, init, seed, None)
    }

    /// Filter that marginalizes an input law (unconditional pass).
    pub fn with_input_law(
        params: &ChannelParams<T>,
        n_particles: usize,
        init: InitialPhase<T>,
        seed: u64,
        law: InputLaw<T>,
    ) -> Result<Self> {
        let m = law.block_len();
        let state = UnknownInputState {
            law,
            m,
            pos: 0,
            blocks: vec![T::zero(); n_particles * m],
            symbols: vec![Complex::new(T::zero(), T::zero()); n_particles],
        };
        Self::build(params, n_particles, init, seed, Some(state))
    }

    fn build(
        params: &ChannelParams<T>,
        n_particles: usize,
        init: InitialPhase<T>,
        seed: u64,
        input: Option<UnknownInputState<T>>,
    ) -> Result<Self> {
        if n_particles == 0 {
            return Err(Error::InvalidInput("need at least one particle".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ln_p = real::<T>(n_particles as f64).ln();
        let mut phases = Vec::with_capacity(n_particles);
        match init {
            InitialPhase::Uniform => {
                for _ in 0..n_particles {
                    phases.push(T::unit_uniform(&mut rng) * T::TAU());
                }
            }
            InitialPhase::Known(phi0) => {
                if !phi0.is_finite() {
                    return Err(Error::InvalidInput("initial phase must be finite".into()));
                }
                let sigma_d = params.sigma_delta_sq().sqrt();
                for _ in 0..n_particles {
                    phases.push(phi0 + sigma_d * T::standard_normal(&mut rng));
                }
            }
        }
        Ok(Self {
            params: *params,
            phases,
            log_weights: vec![-ln_p; n_particles],
            rng,
            resample_fraction: real(0.5),
            collapse_count: 0,
            resample_count: 0,
            input,
            emissions: vec![T::zero(); n_particles],
            ess: real(n_particles as f64),
        })
    }

    pub fn n_particles(&self) -> usize {
        self.phases.len()
    }

    pub fn collapse_count(&self) -> usize {
        self.collapse_count
    }

    pub fn resample_count(&self) -> usize {
        self.resample_count
    }

    pub fn cloud(&self) -> ParticleCloud<T> {
        ParticleCloud {
            phases: self.phases.clone(),
            log_weights: self.log_weights.clone(),
            ess: self.ess,
        }
    }

    fn ln_emission_known(&self, phase: T, y: Complex<T>, x: Complex<T>) -> T {
        let sw2 = self.params.sigma_w_sq();
        let rotated = x * Complex::from_polar(T::one(), phase);
        let d = y - rotated;
        -d.norm_sqr() / (sw2 + sw2) - (T::TAU() * sw2).ln()
    }

    fn fill_emissions(&mut self, y: Complex<T>, x: Option<Complex<T>>) {
        match x {
            Some(x) => {
                for i in 0..self.phases.len() {
                    self.emissions[i] = self.ln_emission_known(self.phases[i], y, x);
                }
            }
            None => {
                let state = self.input.as_ref().expect("unknown-x emission needs a law");
                for i in 0..self.phases.len() {
                    self.emissions[i] = self.ln_emission_known(self.phases[i], y, state.symbols[i]);
                }
            }
        }
    }

    /// Advance the per-particle input draws to the current step; at block
    /// boundaries this draws a fresh amplitude block per particle.
    fn refresh_input_symbols(&mut self) -> Result<()> {
        let Some(mut state) = self.input.take() else {
            return Ok(());
        };
        if state.pos == 0 {
            let m = state.m;
            for i in 0..self.phases.len() {
                let row = &mut state.blocks[i * m..(i + 1) * m];
                state.law.draw_block(&self.params, &mut self.rng, row)?;
            }
        }
        for i in 0..self.phases.len() {
            let amp = state.blocks[i * state.m + state.pos];
            let theta = T::unit_uniform(&mut self.rng) * T::TAU();
            state.symbols[i] = Complex::from_polar(amp, theta);
        }
        self.input = Some(state);
        Ok(())
    }

    /// One filter step: returns `log2` of the one-step predictive density of
    /// `y` given the past, then multiplies weights, resamples when the ESS
    /// drops below half the cloud, and propagates the phases.
    pub fn log_pred_density(&mut self, y: Complex<T>, x: Option<Complex<T>>) -> Result<T> {
        if x.is_none() {
            if self.input.is_none() {
                return Err(Error::InvalidInput(
                    "filter was built without an input law; x is required".into(),
                ));
            }
            self.refresh_input_symbols()?;
        }
        self.fill_emissions(y, x);

        let n = self.phases.len();
        let mut joint: Vec<T> = (0..n)
            .map(|i| self.log_weights[i] + self.emissions[i])
            .collect();
        let mut ln_pred = logsumexp(&joint);

        // Every weight underflowed: re-anchor on uniform phases and retry.
        let floor = T::min_positive_value().ln();
        if !(ln_pred > floor) {
            self.collapse_count += 1;
            let ln_p = real::<T>(n as f64).ln();
            for i in 0..n {
                self.phases[i] = T::unit_uniform(&mut self.rng) * T::TAU();
                self.log_weights[i] = -ln_p;
            }
            self.fill_emissions(y, x);
            for i in 0..n {
                joint[i] = self.log_weights[i] + self.emissions[i];
            }
            ln_pred = logsumexp(&joint);
        }

        // Weight update and renormalization.
        let norm = logsumexp(&joint);
        for i in 0..n {
            self.log_weights[i] = joint[i] - norm;
        }

        // ESS and systematic resampling.
        let mut sum_sq = T::zero();
        for &lw in &self.log_weights {
            let w = lw.exp();
            sum_sq += w * w;
        }
        self.ess = sum_sq.recip().min(real(n as f64)).max(T::one());
        if self.ess < self.resample_fraction * real(n as f64) {
            self.systematic_resample();
            self.resample_count += 1;
        }

        // Propagate the phase state for the next observation.
        let sigma_d = self.params.sigma_delta_sq().sqrt();
        for phase in &mut self.phases {
            *phase += sigma_d * T::standard_normal(&mut self.rng);
        }
        if let Some(state) = &mut self.input {
            state.pos = (state.pos + 1) % state.m;
        }

        Ok(ln_pred / T::LN_2())
    }

    fn systematic_resample(&mut self) {
        let n = self.phases.len();
        let nt = real::<T>(n as f64);
        let u0 = T::unit_uniform(&mut self.rng);
        let mut indices = Vec::with_capacity(n);
        let mut cum = self.log_weights[0].exp();
        let mut j = 0usize;
        for i in 0..n {
            let u = (real::<T>(i as f64) + u0) / nt;
            while cum < u && j + 1 < n {
                j += 1;
                cum += self.log_weights[j].exp();
            }
            indices.push(j);
        }
        self.phases = indices.iter().map(|&j| self.phases[j]).collect();
        let ln_p = nt.ln();
        self.log_weights.fill(-ln_p);
        if let Some(state) = &mut self.input {
            let m = state.m;
            let mut blocks = Vec::with_capacity(n * m);
            for &j in &indices {
                blocks.extend_from_slice(&state.blocks[j * m..(j + 1) * m]);
            }
            state.blocks = blocks;
        }
        self.ess = nt;
    }
}

// ---------------------------------------------------------------------------
// Unconditional density via per-block importance sampling
// ---------------------------------------------------------------------------

fn ln_rician<T: Real>(r: T, big_r: T, sw2: T) -> T {
    r.ln() - sw2.ln() - (r * r + big_r * big_r) / (sw2 + sw2) + ln_i0(r * big_r / sw2)
}

/// `ln` density of the positive-truncated normal proposal centered on the
/// observed amplitude.
fn ln_trunc_normal<T: Real>(x: T, center: T, sigma: T) -> T {
    let d = (x - center) / sigma;
    -d * d * real::<T>(0.5) - (sigma * T::TAU().sqrt()).ln() - normal_cdf(center / sigma).ln()
}

struct UncondDiagnostics<T> {
    min_ess: T,
    collapses: usize,
}

/// Per-use `log2` contributions of the unconditional output density. Output
/// phases are i.i.d. uniform for every circularly symmetric law, so
/// `f(y^n)` factorizes into `prod_k 1/(2 pi r_k)` times the block densities
/// of the received amplitudes; each block density is estimated by importance
/// sampling with a truncated-normal proposal matched to the Rician emission.
fn unconditional_log2_series<T: Real>(
    params: &ChannelParams<T>,
    law: &InputLaw<T>,
    received: &[T],
    n_draws: usize,
    seed: u64,
) -> Result<(Vec<T>, UncondDiagnostics<T>)> {
    let m = law.block_len();
    debug_assert_eq!(received.len() % m, 0);
    let sw2 = params.sigma_w_sq();
    let sigma_w = sw2.sqrt();
    let n_blocks = received.len() / m;

    let per_block: Vec<Result<(T, T)>> = (0..n_blocks)
        .into_par_iter()
        .map(|j| {
            let obs = &received[j * m..(j + 1) * m];
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, j as u64));
            let mut lws = Vec::with_capacity(n_draws);
            let mut draw = vec![T::zero(); m];
            for _ in 0..n_draws {
                for (slot, &r_obs) in draw.iter_mut().zip(obs) {
                    loop {
                        let x = r_obs + sigma_w * T::standard_normal(&mut rng);
                        if x > T::zero() {
                            *slot = x;
                            break;
                        }
                    }
                }
                let mut lw = law.ln_block_density(params, &draw)?;
                for (&x, &r_obs) in draw.iter().zip(obs) {
                    lw += ln_rician(r_obs, x, sw2) - ln_trunc_normal(x, r_obs, sigma_w);
                }
                lws.push(lw);
            }
            let lse = logsumexp(&lws);
            let ln_f = lse - real::<T>(n_draws as f64).ln();
            // ESS of the weight set
            let mut sum_sq = T::zero();
            for &lw in &lws {
                let w = (lw - lse).exp();
                sum_sq += w * w;
            }
            Ok((ln_f, sum_sq.recip()))
        })
        .collect();

    let ln2 = T::LN_2();
    let mut series = Vec::with_capacity(received.len());
    let mut min_ess = T::infinity();
    let mut collapses = 0usize;
    let floor = T::min_positive_value().ln();
    let mt = real::<T>(m as f64);
    for (j, res) in per_block.into_iter().enumerate() {
        let (ln_f, ess) = res?;
        if !(ln_f > floor) {
            collapses += 1;
        }
        if ess < min_ess {
            min_ess = ess;
        }
        for pos in 0..m {
            let r_k = received[j * m + pos];
            series.push((ln_f / mt - (T::TAU() * r_k).ln()) / ln2);
        }
    }
    Ok((series, UncondDiagnostics { min_ess, collapses }))
}

// ---------------------------------------------------------------------------
// Rate estimation
// ---------------------------------------------------------------------------

/// An information-rate estimate in bits per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate<T> {
    pub bits_per_use: T,
    pub std_err: T,
    pub n_uses: usize,
    pub n_particles: usize,
    pub input_label: String,
    /// Weight-collapse events across both passes.
    pub collapse_count: usize,
    /// Set when collapses exceeded 1% of the channel uses.
    pub unreliable: bool,
    /// Smallest per-block importance-sampling ESS seen in the
    /// unconditional pass.
    pub min_uncond_ess: T,
}

/// Knobs for [`estimate_rate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateOptions<T> {
    /// `Some(phi0)`: the receiver knows the initial phase and the channel is
    /// simulated from it. `None`: stationary uniform start.
    pub initial_phase: Option<T>,
    /// Channel uses per bootstrap segment.
    pub segment_len: usize,
    /// Bootstrap resamples for the standard error.
    pub bootstrap_resamples: usize,
}

impl<T: Real> Default for RateOptions<T> {
    fn default() -> Self {
        Self {
            initial_phase: None,
            segment_len: 100,
            bootstrap_resamples: 500,
        }
    }
}

/// Estimate the achievable rate of the channel under `law` from one
/// simulated realization of `n_uses` symbols:
/// `(1/n) * (log2 f^(y^n | x^n) - log2 f^(y^n))`, with the conditional term
/// from a particle forward pass and the unconditional term from per-block
/// importance sampling. The standard error comes from a block bootstrap
/// over segments.
pub fn estimate_rate<T: Real>(
    params: &ChannelParams<T>,
    law: &InputLaw<T>,
    n_uses: usize,
    n_particles: usize,
    seed: u64,
    opts: &RateOptions<T>,
) -> Result<RateEstimate<T>> {
    if n_uses < 100 {
        return Err(Error::InvalidInput(format!(
            "need at least 100 channel uses, got {n_uses}"
        )));
    }
    if n_particles < 1000 {
        return Err(Error::InvalidInput(format!(
            "need at least 1000 particles, got {n_particles}"
        )));
    }
    let m = law.block_len();
    let n = n_uses - n_uses % m;

    let input = law.draw_input(params, n, derive_seed(seed, 1))?;
    let phi0 = match opts.initial_phase {
        Some(p) => p,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));
            T::unit_uniform(&mut rng) * T::TAU()
        }
    };
    let received = simulate(params, &input, derive_seed(seed, 3), phi0)?;
    let xs = input.complex_symbols();
    let ys = received.complex_outputs();

    // Conditional pass.
    let init = match opts.initial_phase {
        Some(p) => InitialPhase::Known(p),
        None => InitialPhase::Uniform,
    };
    let mut filter = PhaseParticleFilter::new(params, n_particles, init, derive_seed(seed, 4))?;
    let mut cond = Vec::with_capacity(n);
    for k in 0..n {
        cond.push(filter.log_pred_density(ys[k], Some(xs[k]))?);
    }

    // Unconditional pass.
    let (uncond, diag) = unconditional_log2_series(
        params,
        law,
        received.amplitudes(),
        n_particles,
        derive_seed(seed, 5),
    )?;

    let series: Vec<T> = cond.iter().zip(&uncond).map(|(&c, &u)| c - u).collect();
    let nt = real::<T>(n as f64);
    let bits_per_use = series.iter().copied().sum::<T>() / nt;

    let std_err = block_bootstrap_se(&series, opts.segment_len, opts.bootstrap_resamples, seed);

    let collapse_count = filter.collapse_count() + diag.collapses;
    Ok(RateEstimate {
        bits_per_use,
        std_err,
        n_uses: n,
        n_particles,
        input_label: law.label().to_string(),
        collapse_count,
        unreliable: collapse_count * 100 > n,
        min_uncond_ess: diag.min_ess,
    })
}

/// Block-bootstrap standard error of the mean of `series` over segments of
/// `seg_len` entries.
fn block_bootstrap_se<T: Real>(series: &[T], seg_len: usize, resamples: usize, seed: u64) -> T {
    let n = series.len();
    let n_segs = n / seg_len.max(1);
    if n_segs < 2 {
        // too short for segments: i.i.d. fallback
        let nt = real::<T>(n as f64);
        let mean = series.iter().copied().sum::<T>() / nt;
        let var = series
            .iter()
            .map(|&x| (x - mean) * (x - mean))
            .sum::<T>()
            / (nt - T::one());
        return (var / nt).sqrt();
    }
    let sums: Vec<T> = (0..n_segs)
        .map(|s| series[s * seg_len..(s + 1) * seg_len].iter().copied().sum())
        .collect();
    let tail: T = series[n_segs * seg_len..].iter().copied().sum();
    let nt = real::<T>(n as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 6));
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut total = tail;
        for _ in 0..n_segs {
            let pick = (T::unit_uniform(&mut rng) * real(n_segs as f64))
                .to_usize()
                .unwrap_or(0)
                .min(n_segs - 1);
            total += sums[pick];
        }
        means.push(total / nt);
    }
    let bt = real::<T>(resamples as f64);
    let mean = means.iter().copied().sum::<T>() / bt;
    let var = means
        .iter()
        .map(|&x| (x - mean) * (x - mean))
        .sum::<T>()
        / (bt - T::one());
    var.sqrt()
}

// ---------------------------------------------------------------------------
// Quantized-phase forward oracle
// ---------------------------------------------------------------------------

/// Exact forward algorithm over a quantized phase state: returns
/// `(1/n) sum_k log2 f(y_k | y^{k-1}, x^n)` on a wheel of `n_bins` phases.
/// Small-`n` validation oracle for the particle conditional pass.
pub fn phase_grid_log_likelihood<T: Real>(
    params: &ChannelParams<T>,
    xs: &[Complex<T>],
    ys: &[Complex<T>],
    n_bins: usize,
    phi0: Option<T>,
) -> Result<T> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::InvalidInput(
            "need equal, nonempty input/output streams".into(),
        ));
    }
    if n_bins < 8 {
        return Err(Error::InvalidInput("need at least 8 phase bins".into()));
    }
    let tau = T::TAU();
    let h = tau / real(n_bins as f64);
    let sigma_d = params.sigma_delta_sq().sqrt();
    let sw2 = params.sigma_w_sq();

    // Transition kernel over bin offsets (wrapped Gaussian bin masses).
    let mut kernel: Vec<(isize, T)> = Vec::new();
    if sigma_d > T::zero() {
        let width = (real::<T>(7.0) * sigma_d / h)
            .ceil()
            .to_isize()
            .unwrap_or(isize::MAX)
            .clamp(1, n_bins as isize / 2);
        let norm = (T::TAU()).sqrt() * sigma_d;
        let pdf = move |t: T| (-t * t / (real::<T>(2.0) * sigma_d * sigma_d)).exp() / norm;
        let mut total = T::zero();
        for d in -width..=width {
            let lo = real::<T>(d as f64) * h - h * real(0.5);
            let mass = crate::quad::integrate_1d(pdf, lo, lo + h, real(1e-13))?;
            kernel.push((d, mass));
            total += mass;
        }
        for (_, m) in &mut kernel {
            *m = *m / total;
        }
    } else {
        kernel.push((0, T::one()));
    }

    // Initial distribution over bins.
    let mut alpha = vec![T::zero(); n_bins];
    match phi0 {
        Some(p) => {
            let idx = ((wrap_angle(p) / h).floor().to_usize().unwrap_or(0)).min(n_bins - 1);
            alpha[idx] = T::one();
        }
        None => {
            let u = (real::<T>(n_bins as f64)).recip();
            alpha.fill(u);
        }
    }

    let centers: Vec<T> = (0..n_bins)
        .map(|b| (real::<T>(b as f64) + real(0.5)) * h)
        .collect();

    let mut acc = T::zero();
    let mut pred = vec![T::zero(); n_bins];
    let mut ln_e = vec![T::zero(); n_bins];
    for (x, y) in xs.iter().zip(ys) {
        // predict
        pred.fill(T::zero());
        for (d, mass) in &kernel {
            for b in 0..n_bins {
                let src = (b as isize - d).rem_euclid(n_bins as isize) as usize;
                pred[b] += *mass * alpha[src];
            }
        }
        // emission at bin centers
        let mut max_ln = T::neg_infinity();
        for b in 0..n_bins {
            let rotated = *x * Complex::from_polar(T::one(), centers[b]);
            let dxy = *y - rotated;
            let le = -dxy.norm_sqr() / (sw2 + sw2) - (T::TAU() * sw2).ln();
            ln_e[b] = le;
            if le > max_ln {
                max_ln = le;
            }
        }
        let mut step = T::zero();
        for b in 0..n_bins {
            let e = (ln_e[b] - max_ln).exp();
            pred[b] *= e;
            step += pred[b];
        }
        acc += (step.ln() + max_ln) / T::LN_2();
        for b in 0..n_bins {
            pred[b] /= step;
        }
        std::mem::swap(&mut alpha, &mut pred);
    }
    Ok(acc / real(xs.len() as f64))
}
