//! The duality upper bound `C_U` (Monte-Carlo + quadrature over a grid of
//! conditioning amplitudes and offsets `mu`) and the closed-form high-SNR
//! bound `C_U~`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::entropy::{knn_entropy, EntropySample, DEFAULT_K};
use crate::error::{Error, Result};
use crate::model::{snr_db, ChannelParams};
use crate::quad::{integrate_1d, solve_aux_params, AuxOutputParams};
use crate::real::{real, Real};
use crate::special::derive_seed;

/// The amplitude-conditioned term `G(R)` of the duality bound and its three
/// pieces, all in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofR<T> {
    pub r_value: T,
    pub mu: T,
    pub value: T,
    /// `(1/2) E[log2(sigma_w^2 / (r + mu)^2 + sigma_delta^2)]` by 2-D
    /// quadrature over the Gaussian noise pair.
    pub term_integral: T,
    /// k-NN entropy of the conditional received amplitude.
    pub term_h_r: T,
    /// k-NN conditional entropy of the received phase-noise increment given
    /// the amplitude.
    pub term_h_cond: T,
    pub n_samples: usize,
}

/// Result of the grid-optimized upper bound at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperBoundResult<T> {
    pub snr_db: T,
    pub c_u: T,
    pub c_u_tilde: T,
    pub argmax_r: T,
    pub argmin_mu: T,
    /// Auxiliary output parameters at the minimizing `mu`.
    pub aux: AuxOutputParams<T>,
    /// Bound value per `mu` grid entry, for diagnostics.
    pub bound_per_mu: Vec<(T, T)>,
}

/// Minimum Monte-Carlo sample budget per `G(R)` evaluation.
pub const MIN_G_SAMPLES: usize = 10_000;

/// Default conditioning-amplitude grid: 60 log-spaced points in
/// `[1e-3 sqrt(es), 30 sqrt(es)]`.
pub fn default_r_grid<T: Real>(es: T) -> Vec<T> {
    let root = es.sqrt();
    let lo = (root * real::<T>(1e-3)).ln();
    let hi = (root * real::<T>(30.0)).ln();
    (0..60)
        .map(|i| {
            let t = real::<T>(i as f64 / 59.0);
            (lo + (hi - lo) * t).exp()
        })
        .collect()
}

/// Default offset grid `{0, 0.05, 0.1, 0.5, 1} * sqrt(es)`.
pub fn default_mu_grid<T: Real>(es: T) -> Vec<T> {
    let root = es.sqrt();
    [0.0, 0.05, 0.1, 0.5, 1.0]
        .iter()
        .map(|&c| real::<T>(c) * root)
        .collect()
}

/// The first (quadrature) term of `G(R)` in bits.
fn g_integral_term<T: Real>(params: &ChannelParams<T>, big_r: T, mu: T) -> Result<T> {
    let sw2 = params.sigma_w_sq();
    let sd2 = params.sigma_delta_sq();
    let sigma_w = sw2.sqrt();
    let bound = sigma_w * real::<T>(9.5);
    let norm = (T::TAU()).sqrt() * sigma_w;
    let pdf = move |t: T| (-t * t / (sw2 + sw2)).exp() / norm;

    let inner_tol = real::<T>(1e-11);
    let outer = move |u: T| {
        let a = big_r + u;
        let f = move |v: T| {
            let r = (a * a + v * v).sqrt();
            (sw2 / (r + mu).powi(2) + sd2).log2() * pdf(v)
        };
        match crate::quad::integrate_1d(f, -bound, bound, inner_tol) {
            Ok(v) => v * pdf(u),
            Err(_) => T::nan(),
        }
    };
    let val = integrate_1d(outer, -bound, bound, real(1e-9))?;
    if !val.is_finite() {
        return Err(Error::NumericalFailure(
            "quadrature term of G(R) did not converge".into(),
        ));
    }
    Ok(val * real(0.5))
}

/// Entropy terms of `G(R)`: `(h(r), h(joint))` from one seeded sample set.
fn g_entropy_terms<T: Real>(
    params: &ChannelParams<T>,
    big_r: T,
    n_samples: usize,
    seed: u64,
) -> Result<(T, T)> {
    const CHUNK: usize = 1 << 14;
    let sigma_w = params.sigma_w_sq().sqrt();
    let sigma_d = params.sigma_delta_sq().sqrt();
    let n_chunks = n_samples.div_ceil(CHUNK);
    let chunks: Vec<(Vec<T>, Vec<[T; 2]>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, c as u64));
            let count = CHUNK.min(n_samples - c * CHUNK);
            let mut rs = Vec::with_capacity(count);
            let mut joint = Vec::with_capacity(count);
            for _ in 0..count {
                let w_par = sigma_w * T::standard_normal(&mut rng);
                let w_perp = sigma_w * T::standard_normal(&mut rng);
                let delta = sigma_d * T::standard_normal(&mut rng);
                let a = big_r + w_par;
                let r = (a * a + w_perp * w_perp).sqrt();
                let n_k = w_perp.atan2(a);
                rs.push(r);
                joint.push([r, n_k + delta]);
            }
            (rs, joint)
        })
        .collect();

    let mut rs = Vec::with_capacity(n_samples);
    let mut joint = Vec::with_capacity(n_samples);
    for (a, b) in chunks {
        rs.extend(a);
        joint.extend(b);
    }
    let h_r = knn_entropy(&EntropySample::from_1d(rs)?, DEFAULT_K)?;
    let h_joint = knn_entropy(&EntropySample::from_2d(joint)?, DEFAULT_K)?;
    Ok((h_r, h_joint))
}

/// Evaluate `G(R)` at one conditioning amplitude with `n_samples` draws for
/// the entropy terms. Deterministic in `seed`.
pub fn g_of_r<T: Real>(
    params: &ChannelParams<T>,
    big_r: T,
    mu: T,
    n_samples: usize,
    seed: u64,
) -> Result<GofR<T>> {
    if !(big_r >= T::zero()) || !(mu >= T::zero()) {
        return Err(Error::InvalidInput(
            "R and mu must be nonnegative".into(),
        ));
    }
    if n_samples < MIN_G_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_G_SAMPLES} samples, got {n_samples}"
        )));
    }
    let term_integral = g_integral_term(params, big_r, mu)?;
    let (term_h_r, h_joint) = g_entropy_terms(params, big_r, n_samples, seed)?;
    let term_h_cond = h_joint - term_h_r;
    let value = term_integral - term_h_r - term_h_cond;
    if !value.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "G(R) is not finite at R = {big_r:?}"
        )));
    }
    Ok(GofR {
        r_value: big_r,
        mu,
        value,
        term_integral,
        term_h_r,
        term_h_cond,
        n_samples,
    })
}

/// The grid-optimized duality upper bound: minimize over `mu_grid` of the
/// solved-q constant plus `max_R G(R)` over `r_grid`. Auxiliary parameters
/// are solved fresh per `mu`; entropy samples are shared across `mu` for a
/// given `R` (they do not depend on `mu`), with seeds derived per `R` index.
pub fn upper_bound_cu<T: Real>(
    params: &ChannelParams<T>,
    mu_grid: &[T],
    r_grid: &[T],
    n_samples: usize,
    seed: u64,
) -> Result<UpperBoundResult<T>> {
    if mu_grid.is_empty() || r_grid.is_empty() {
        return Err(Error::InvalidInput("grids must be nonempty".into()));
    }
    if mu_grid.windows(2).any(|w| w[1] <= w[0]) || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "grids must be sorted strictly ascending".into(),
        ));
    }
    if mu_grid[0] < T::zero() {
        return Err(Error::InvalidInput("mu grid must be nonnegative".into()));
    }

    // Entropy terms once per R (seed tied to the R index).
    let entropy_terms: Vec<(T, T)> = r_grid
        .par_iter()
        .enumerate()
        .map(|(i, &r)| g_entropy_terms(params, r, n_samples, derive_seed(seed, i as u64)))
        .collect::<Result<_>>()?;

    let target = params.es() + real::<T>(2.0) * params.sigma_w_sq();
    let mut best: Option<(T, T, T, AuxOutputParams<T>)> = None;
    let mut bound_per_mu = Vec::with_capacity(mu_grid.len());
    for &mu in mu_grid {
        let aux = solve_aux_params(params, mu)?;
        let g_vals: Vec<T> = r_grid
            .par_iter()
            .zip(entropy_terms.par_iter())
            .map(|(&r, &(h_r, h_joint))| {
                g_integral_term(params, r, mu).map(|t1| t1 - h_r - (h_joint - h_r))
            })
            .collect::<Result<_>>()?;
        let (gi, g_max) = g_vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, &v)| (i, v))
            .unwrap();
        let constant = -(aux.alpha_u / T::TAU()).log2() + aux.beta_u / T::LN_2() * target;
        let bound = constant + g_max;
        if !bound.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "upper bound not finite at mu = {mu:?}"
            )));
        }
        bound_per_mu.push((mu, bound));
        if best.as_ref().map_or(true, |(b, ..)| bound < *b) {
            best = Some((bound, mu, r_grid[gi], aux));
        }
    }
    let (c_u, argmin_mu, argmax_r, aux) = best.unwrap();
    Ok(UpperBoundResult {
        snr_db: snr_db(params),
        c_u,
        c_u_tilde: upper_bound_cu_tilde(params)?,
        argmax_r,
        argmin_mu,
        aux,
        bound_per_mu,
    })
}

/// Closed-form high-SNR upper bound
/// `beta_u(0)/ln 2 * (es + 2 sigma_w^2) - (1/2) log2(sigma_w^2 e^2 alpha_u^2(0))`.
pub fn upper_bound_cu_tilde<T: Real>(params: &ChannelParams<T>) -> Result<T> {
    let aux = solve_aux_params(params, T::zero())?;
    Ok(cu_tilde_from_aux(params, &aux))
}

/// Same closed form, reusing already-solved auxiliary parameters.
pub fn cu_tilde_from_aux<T: Real>(params: &ChannelParams<T>, aux: &AuxOutputParams<T>) -> T {
    let target = params.es() + real::<T>(2.0) * params.sigma_w_sq();
    let inside = params.sigma_w_sq() * T::E() * T::E() * aux.alpha_u * aux.alpha_u;
    aux.beta_u / T::LN_2() * target - inside.log2() * real(0.5)
}
