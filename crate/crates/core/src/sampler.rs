//! The block input densities `f(R~) = alpha_l g_b(R~)^{-M/2} e^{-beta_l ||R~||^2}`,
//! the conditional-covariance ratio `g_b`, and a rejection sampler that draws
//! symbol blocks from them (amplitudes from `f`, phases uniform).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ChannelParams, SymbolBlock};
use crate::quad::InputDistParams;
use crate::real::{real, Real};
use crate::special::derive_seed;

/// `g_b` for a length-2 block: `sigma_delta^2 + sigma_w^2/r_n^2 + sigma_w^2/r_{n-1}^2`.
pub fn gb_m2<T: Real>(params: &ChannelParams<T>, r_n: T, r_nm1: T) -> Result<T> {
    if !(r_n > T::zero()) || !(r_nm1 > T::zero()) {
        return Err(Error::DomainError(format!(
            "g_b needs positive amplitudes, got ({r_n:?}, {r_nm1:?})"
        )));
    }
    Ok(gb_m2_unchecked(
        params.sigma_delta_sq(),
        params.sigma_w_sq(),
        r_n,
        r_nm1,
    ))
}

#[inline]
pub(crate) fn gb_m2_unchecked<T: Real>(sd2: T, sw2: T, r_n: T, r_nm1: T) -> T {
    // grouping keeps the formula bit-exactly symmetric in the amplitudes
    sd2 + (sw2 / (r_n * r_n) + sw2 / (r_nm1 * r_nm1))
}

/// `g_b` for a length-3 block, i.e. `det(Sigma_n)/det(Sigma_{n-1})` of the
/// differenced phase process; equals the m=2 form minus a Schur complement
/// term in the middle amplitude.
pub fn gb_m3<T: Real>(params: &ChannelParams<T>, r_n: T, r_nm1: T, r_nm2: T) -> Result<T> {
    if !(r_n > T::zero()) || !(r_nm1 > T::zero()) || !(r_nm2 > T::zero()) {
        return Err(Error::DomainError(format!(
            "g_b needs positive amplitudes, got ({r_n:?}, {r_nm1:?}, {r_nm2:?})"
        )));
    }
    Ok(gb_m3_unchecked(
        params.sigma_delta_sq(),
        params.sigma_w_sq(),
        r_n,
        r_nm1,
        r_nm2,
    ))
}

#[inline]
pub(crate) fn gb_m3_unchecked<T: Real>(sd2: T, sw2: T, r_n: T, r_nm1: T, r_nm2: T) -> T {
    let v_n = sw2 / (r_n * r_n);
    let v_nm1 = sw2 / (r_nm1 * r_nm1);
    let v_nm2 = sw2 / (r_nm2 * r_nm2);
    sd2 + v_n + v_nm1 - v_nm1 * v_nm1 / (sd2 + v_nm1 + v_nm2)
}

/// `g_b` of a time-ordered block (oldest amplitude first).
pub(crate) fn gb_block<T: Real>(sd2: T, sw2: T, block: &[T]) -> T {
    match block.len() {
        2 => gb_m2_unchecked(sd2, sw2, block[1], block[0]),
        3 => gb_m3_unchecked(sd2, sw2, block[2], block[1], block[0]),
        n => unreachable!("unsupported block length {n}"),
    }
}

/// One evaluation of `g_b` with its inputs, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct GbEval<T> {
    pub m: usize,
    /// Time-ordered amplitudes (oldest first).
    pub amplitudes: Vec<T>,
    pub value: T,
}

impl<T: Real> GbEval<T> {
    pub fn evaluate(params: &ChannelParams<T>, amplitudes: &[T]) -> Result<Self> {
        let value = match amplitudes.len() {
            2 => gb_m2(params, amplitudes[1], amplitudes[0])?,
            3 => gb_m3(params, amplitudes[2], amplitudes[1], amplitudes[0])?,
            n => {
                return Err(Error::InvalidInput(format!(
                    "g_b is defined for blocks of length 2 or 3, got {n}"
                )))
            }
        };
        Ok(Self {
            m: amplitudes.len(),
            amplitudes: amplitudes.to_vec(),
            value,
        })
    }
}

/// The solved input density at a time-ordered amplitude block.
pub fn f_input_density<T: Real>(
    params: &ChannelParams<T>,
    dist: &InputDistParams<T>,
    amplitudes: &[T],
) -> Result<T> {
    ln_f_input_density(params, dist, amplitudes).map(|l| l.exp())
}

/// Natural log of [`f_input_density`].
pub fn ln_f_input_density<T: Real>(
    params: &ChannelParams<T>,
    dist: &InputDistParams<T>,
    amplitudes: &[T],
) -> Result<T> {
    if amplitudes.len() != dist.m {
        return Err(Error::InvalidInput(format!(
            "expected a block of {} amplitudes, got {}",
            dist.m,
            amplitudes.len()
        )));
    }
    if amplitudes.iter().any(|&a| !(a > T::zero())) {
        return Err(Error::DomainError(
            "input density needs positive amplitudes".into(),
        ));
    }
    let g = gb_block(params.sigma_delta_sq(), params.sigma_w_sq(), amplitudes);
    let norm_sq: T = amplitudes.iter().map(|&a| a * a).sum();
    let half_m = real::<T>(dist.m as f64 / 2.0);
    Ok(dist.alpha_l.ln() - half_m * g.ln() - dist.beta_l * norm_sq)
}

/// Counters from one rejection-sampling run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RejectionStats {
    pub proposed: u64,
    pub accepted: u64,
    /// Set when the acceptance rate fell below 1e-4.
    pub inefficient_proposal: bool,
}

impl RejectionStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// A drawn symbol block plus sampler diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawnInput<T> {
    pub block: SymbolBlock<T>,
    pub stats: RejectionStats,
}

const INEFFICIENT_RATE: f64 = 1e-4;
// Expected proposals may legitimately reach ~1e4 per block at low SNR; this
// only catches runaway parameter regimes.
const MAX_PROPOSALS_PER_BLOCK: u64 = 100_000_000;

/// Draw `n_blocks` i.i.d. amplitude blocks from `f(R~)` by rejection sampling
/// (product half-normal proposal of scale `1/sqrt(2 beta_l)`, envelope
/// `g_b^{-M/2} <= sigma_delta^{-M}`), with i.i.d. uniform phases. The result
/// holds `m * n_blocks` symbols in time order and is deterministic in `seed`.
pub fn draw_input_block<T: Real>(
    params: &ChannelParams<T>,
    dist: &InputDistParams<T>,
    n_blocks: usize,
    seed: u64,
) -> Result<DrawnInput<T>> {
    if n_blocks == 0 {
        return Err(Error::InvalidInput("n_blocks must be at least 1".into()));
    }
    if !(params.sigma_delta_sq() > T::zero()) {
        return Err(Error::InvalidInput(
            "the rejection envelope needs sigma_delta_sq > 0".into(),
        ));
    }
    let m = dist.m;
    const CHUNK: usize = 1024;
    let n_chunks = n_blocks.div_ceil(CHUNK);

    let chunks: Vec<Result<(Vec<T>, Vec<T>, u64)>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, c as u64));
            let count = CHUNK.min(n_blocks - c * CHUNK);
            let mut amps = Vec::with_capacity(count * m);
            let mut phases = Vec::with_capacity(count * m);
            let mut proposed = 0u64;
            let mut block = vec![T::zero(); m];
            for _ in 0..count {
                draw_amplitude_block(params, dist, &mut rng, &mut block, &mut proposed)?;
                amps.extend_from_slice(&block);
                for _ in 0..m {
                    phases.push(T::unit_uniform(&mut rng) * T::TAU());
                }
            }
            Ok((amps, phases, proposed))
        })
        .collect();

    let mut amplitudes = Vec::with_capacity(n_blocks * m);
    let mut phases = Vec::with_capacity(n_blocks * m);
    let mut proposed = 0u64;
    for chunk in chunks {
        let (a, p, count) = chunk?;
        amplitudes.extend(a);
        phases.extend(p);
        proposed += count;
    }

    let accepted = n_blocks as u64;
    let stats = RejectionStats {
        proposed,
        accepted,
        inefficient_proposal: (accepted as f64 / proposed as f64) < INEFFICIENT_RATE,
    };
    Ok(DrawnInput {
        block: SymbolBlock::new(amplitudes, phases)?,
        stats,
    })
}

/// Draw one amplitude block into `out`; counts proposals.
pub(crate) fn draw_amplitude_block<T: Real, R: Rng>(
    params: &ChannelParams<T>,
    dist: &InputDistParams<T>,
    rng: &mut R,
    out: &mut [T],
    proposed: &mut u64,
) -> Result<()> {
    let sd2 = params.sigma_delta_sq();
    let sw2 = params.sigma_w_sq();
    let m = dist.m;
    let scale = (real::<T>(2.0) * dist.beta_l).sqrt().recip();
    let half_m = real::<T>(m as f64 / 2.0);
    let mut local = 0u64;
    loop {
        local += 1;
        if local > MAX_PROPOSALS_PER_BLOCK {
            return Err(Error::NoConvergence(format!(
                "rejection sampler exceeded {MAX_PROPOSALS_PER_BLOCK} proposals for one block"
            )));
        }
        let mut ok = true;
        for slot in out.iter_mut() {
            let x = T::standard_normal(rng).abs() * scale;
            if !(x > T::zero()) {
                ok = false;
            }
            *slot = x;
        }
        if !ok {
            continue; // zero draw has probability zero; keep g_b finite
        }
        let g = gb_block(sd2, sw2, out);
        let accept_prob = (sd2 / g).powf(half_m);
        if accept_prob > T::one() + real(1e-12) {
            return Err(Error::EnvelopeError(format!(
                "acceptance probability {accept_prob:?} > 1 (g_b fell below sigma_delta_sq)"
            )));
        }
        if T::unit_uniform(rng) < accept_prob {
            *proposed += local;
            return Ok(());
        }
    }
}
