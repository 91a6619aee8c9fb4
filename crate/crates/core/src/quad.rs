//! Numerical quadrature, bisection, and the constraint solvers for the
//! auxiliary output density `q(r)` and the block input densities `f(R~)`.
//!
//! `q(r) = alpha_u * exp(-beta_u r^2) / sqrt(sigma_w^2/(r+mu)^2 + sigma_delta^2)`
//! is pinned down by unit mass and a second-moment constraint; the moment
//! ratio is independent of `alpha_u`, so `beta_u` is found by bisection and
//! `alpha_u` follows from normalization. The input densities
//! `f(R~) ∝ g_b(R~)^{-M/2} exp(-beta_l ||R~||^2)` are solved the same way,
//! with tensor quadrature for M=2 and seeded Monte-Carlo integration for M=3.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ChannelParams;
use crate::real::{real, Real};
use crate::sampler;
use crate::special::derive_seed;

// ---------------------------------------------------------------------------
// Gauss-Kronrod 15(7) adaptive quadrature
// ---------------------------------------------------------------------------

// Abscissae/weights for the 15-point Kronrod rule and the embedded 7-point
// Gauss rule (positive half; the rule is symmetric).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct GkEstimate<T> {
    value: T,
    err: T,
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> GkEstimate<T> {
    let half = (b - a) * real(0.5);
    let center = (a + b) * real(0.5);
    let fc = f(center);

    let mut resk = real::<T>(WGK[7]) * fc;
    let mut resg = real::<T>(WG[3]) * fc;
    let mut resabs = real::<T>(WGK[7]) * fc.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half * real(XGK[j]);
        let y1 = f(center - dx);
        let y2 = f(center + dx);
        fv1[j] = y1;
        fv2[j] = y2;
        let wk = real::<T>(WGK[j]);
        resk += wk * (y1 + y2);
        resabs += wk * (y1.abs() + y2.abs());
        if j % 2 == 1 {
            resg += real::<T>(WG[(j - 1) / 2]) * (y1 + y2);
        }
    }

    let reskh = resk * real(0.5);
    let mut resasc = real::<T>(WGK[7]) * (fc - reskh).abs();
    for j in 0..7 {
        resasc += real::<T>(WGK[j]) * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }

    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc > T::zero() && err > T::zero() {
        let scaled = (real::<T>(200.0) * err / resasc).powf(real(1.5));
        err = resasc * scaled.min(T::one());
    }
    let floor = real::<T>(50.0) * T::epsilon() * resabs;
    GkEstimate {
        value,
        err: err.max(floor),
    }
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    err: T,
}

/// Globally adaptive quadrature on a finite interval, absolute tolerance.
fn adaptive_finite<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    tol: T,
    max_segments: usize,
) -> Result<(T, T)> {
    let first = gk15(f, a, b);
    let mut segs = vec![Segment {
        a,
        b,
        value: first.value,
        err: first.err,
    }];
    loop {
        let total_err: T = segs.iter().map(|s| s.err).sum();
        if total_err <= tol {
            let total: T = segs.iter().map(|s| s.value).sum();
            return Ok((total, total_err));
        }
        if segs.len() >= max_segments {
            return Err(Error::NoConvergence(format!(
                "adaptive quadrature: error {total_err:?} > tol {tol:?} after {} segments",
                segs.len()
            )));
        }
        let mut worst = 0;
        for (i, s) in segs.iter().enumerate() {
            if s.err > segs[worst].err {
                worst = i;
            }
        }
        let s = &segs[worst];
        let mid = (s.a + s.b) * real(0.5);
        let width_floor = (s.a.abs() + s.b.abs() + T::one()) * T::epsilon() * real(4.0);
        if (s.b - s.a).abs() <= width_floor {
            return Err(Error::NoConvergence(format!(
                "adaptive quadrature: interval at {:?} too small to refine further",
                s.a
            )));
        }
        let left = gk15(f, s.a, mid);
        let right = gk15(f, mid, s.b);
        let old_b = s.b;
        let old_a = s.a;
        segs[worst] = Segment {
            a: old_a,
            b: mid,
            value: left.value,
            err: left.err,
        };
        segs.push(Segment {
            a: mid,
            b: old_b,
            value: right.value,
            err: right.err,
        });
    }
}

/// Quadrature over `[a, inf)` by width-doubling segments; stops once two
/// consecutive segments contribute nothing at the requested tolerance. The
/// integrand must decay (all uses here carry a Gaussian envelope).
fn adaptive_half_line<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    tol: T,
    scale_hint: T,
) -> Result<(T, T)> {
    let seg_tol = tol * real(0.125);
    let mut width = if scale_hint.is_finite() && scale_hint > T::zero() {
        scale_hint
    } else {
        T::one()
    };
    let mut lo = a;
    let mut total = T::zero();
    let mut total_err = T::zero();
    let mut quiet = 0u32;
    for _ in 0..64 {
        let hi = lo + width;
        let (v, e) = adaptive_finite(f, lo, hi, seg_tol, 1024)?;
        total += v;
        total_err += e;
        let floor = (total.abs() * T::epsilon() * real(16.0)).max(tol * real(0.01));
        if v.abs() <= floor {
            quiet += 1;
            if quiet >= 2 {
                // Residual tail bounded by the (vanishing) last contribution.
                return Ok((total, total_err + v.abs()));
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width = width * real(2.0);
    }
    Err(Error::NoConvergence(
        "half-line quadrature: integrand did not decay within the segment budget".into(),
    ))
}

/// Adaptive quadrature of `f` over `(a, b)` with absolute tolerance `tol`;
/// pass `b = infinity` for a semi-infinite range.
pub fn integrate_1d<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<T> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("lower limit must be finite".into()));
    }
    if tol <= T::zero() {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    if b.is_finite() {
        if b < a {
            return Err(Error::InvalidInput("upper limit below lower limit".into()));
        }
        if b == a {
            return Ok(T::zero());
        }
        adaptive_finite(&f, a, b, tol, 2048).map(|(v, _)| v)
    } else if b == T::infinity() {
        adaptive_half_line(&f, a, tol, T::one()).map(|(v, _)| v)
    } else {
        Err(Error::InvalidInput("upper limit is NaN or -inf".into()))
    }
}

// ---------------------------------------------------------------------------
// Bisection
// ---------------------------------------------------------------------------

/// Bisect `f` over `[lo, hi]` given residuals of opposite sign at the ends.
/// Returns `(x, f(x), iterations)` once `accept(f(x))` holds.
fn bisect<T: Real>(
    mut f: impl FnMut(T) -> Result<T>,
    mut lo: T,
    mut hi: T,
    flo: T,
    accept: impl Fn(T) -> bool,
    max_iter: u32,
) -> Result<(T, T, u32)> {
    for i in 0..max_iter {
        let mid = (lo + hi) * real(0.5);
        let fm = f(mid)?;
        if accept(fm) {
            return Ok((mid, fm, i + 1));
        }
        if (hi - lo).abs() <= mid.abs() * T::epsilon() * real(8.0) {
            return Err(Error::NoConvergence(format!(
                "bisection interval collapsed at {mid:?} with residual {fm:?}"
            )));
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence(format!(
        "bisection did not meet tolerance in {max_iter} iterations"
    )))
}

/// Verify a ratio function is strictly decreasing on a log-spaced grid.
fn check_decreasing_on_grid<T: Real>(
    mut ratio: impl FnMut(T) -> Result<T>,
    lo: T,
    hi: T,
    points: usize,
) -> Result<Vec<(T, T)>> {
    let n = points.max(2);
    let llo = lo.ln();
    let lhi = hi.ln();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let t = real::<T>(i as f64 / (n - 1) as f64);
        let x = (llo + (lhi - llo) * t).exp();
        let r = ratio(x)?;
        if let Some(&(_, prev)) = out.last() {
            if r >= prev {
                return Err(Error::NoBracket(format!(
                    "moment ratio is not strictly decreasing near beta = {x:?}"
                )));
            }
        }
        out.push((x, r));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Auxiliary output density q(r)
// ---------------------------------------------------------------------------

/// Solved parameters of the auxiliary output density at a given `mu`.
///
/// The solve pins unit mass and the second moment `es + sigma_w_sq` — the
/// convention the published parameter tables were computed with (the
/// otherwise-natural `es + 2 sigma_w_sq` does not reproduce them).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxOutputParams<T> {
    pub mu: T,
    pub alpha_u: T,
    pub beta_u: T,
    /// `(unit-mass violation, relative second-moment violation)` re-measured
    /// at tightened quadrature tolerance after the solve.
    pub residuals: (T, T),
    pub iterations: u32,
}

/// The second-moment target of the auxiliary-density solve.
pub fn aux_moment_target<T: Real>(params: &ChannelParams<T>) -> T {
    params.es() + params.sigma_w_sq()
}

/// Options for [`solve_aux_params`].
#[derive(Debug, Clone, Copy)]
pub struct AuxSolveOptions<T> {
    /// Accept when `|ratio - target| / target` drops below this.
    pub ratio_rel_tol: T,
    /// Relative quadrature tolerance per integral.
    pub quad_rel_tol: T,
    pub bracket: (T, T),
    pub bracket_limits: (T, T),
    pub max_iterations: u32,
    /// Points of the pre-bisection monotonicity check.
    pub monotonicity_points: usize,
}

impl<T: Real> Default for AuxSolveOptions<T> {
    fn default() -> Self {
        Self {
            ratio_rel_tol: real(1e-8),
            quad_rel_tol: real(1e-11),
            bracket: (real(1e-6), real(10.0)),
            bracket_limits: (real(1e-9), real(1e3)),
            max_iterations: 200,
            monotonicity_points: 7,
        }
    }
}

/// The auxiliary output density `q(r)` for `r > 0`.
pub fn q_density<T: Real>(
    params: &ChannelParams<T>,
    aux: &AuxOutputParams<T>,
    r: T,
) -> Result<T> {
    if !(r > T::zero()) {
        return Err(Error::DomainError(format!(
            "q(r) is defined for r > 0, got {r:?}"
        )));
    }
    let shape = params.sigma_w_sq() / (r + aux.mu).powi(2) + params.sigma_delta_sq();
    Ok(aux.alpha_u * (-aux.beta_u * r * r).exp() / shape.sqrt())
}

/// Moment ratio and normalization of the unnormalized `q` at a given `beta`.
fn aux_integrals<T: Real>(
    params: &ChannelParams<T>,
    mu: T,
    beta: T,
    quad_rel_tol: T,
) -> Result<(T, T)> {
    let sw2 = params.sigma_w_sq();
    let sd2 = params.sigma_delta_sq();
    let shape = move |r: T| (sw2 / (r + mu).powi(2) + sd2).sqrt().recip();
    let f0 = move |r: T| (-beta * r * r).exp() * shape(r);
    let f2 = move |r: T| r * r * (-beta * r * r).exp() * shape(r);
    let scale = beta.recip().sqrt();
    // Coarse magnitude estimates set the absolute tolerance per integral.
    let c0 = gk15(&f0, T::zero(), scale * real(5.0)).value.abs();
    let c2 = gk15(&f2, T::zero(), scale * real(5.0)).value.abs();
    let tiny = T::min_positive_value().sqrt();
    let (i0, _) = adaptive_half_line(&f0, T::zero(), (c0 + tiny) * quad_rel_tol, scale)?;
    let (i2, _) = adaptive_half_line(&f2, T::zero(), (c2 + tiny) * quad_rel_tol, scale)?;
    Ok((i0, i2))
}

/// Solve `(alpha_u, beta_u)` so that `q` has unit mass and second moment
/// `E_s + 2 sigma_w^2`, bisecting on `beta_u` via the alpha-free moment ratio.
pub fn solve_aux_params<T: Real>(params: &ChannelParams<T>, mu: T) -> Result<AuxOutputParams<T>> {
    solve_aux_params_with(params, mu, &AuxSolveOptions::default())
}

pub fn solve_aux_params_with<T: Real>(
    params: &ChannelParams<T>,
    mu: T,
    opts: &AuxSolveOptions<T>,
) -> Result<AuxOutputParams<T>> {
    if !(mu >= T::zero()) || !mu.is_finite() {
        return Err(Error::InvalidInput(format!(
            "mu must be finite and nonnegative, got {mu:?}"
        )));
    }
    let target = aux_moment_target(params);
    let ratio = |beta: T| -> Result<T> {
        let (i0, i2) = aux_integrals(params, mu, beta, opts.quad_rel_tol)?;
        Ok(i2 / i0)
    };

    let grid = check_decreasing_on_grid(ratio, opts.bracket.0, opts.bracket.1, opts.monotonicity_points)?;
    let (mut lo, mut rlo) = grid[0];
    let (mut hi, mut rhi) = *grid.last().unwrap();

    // Decreasing ratio: need ratio(lo) >= target >= ratio(hi).
    while rlo < target {
        lo = lo * real(0.1);
        if lo < opts.bracket_limits.0 {
            return Err(Error::NoBracket(format!(
                "moment ratio {rlo:?} below target {target:?} at beta = {lo:?}"
            )));
        }
        rlo = ratio(lo)?;
    }
    while rhi > target {
        hi = hi * real(10.0);
        if hi > opts.bracket_limits.1 {
            return Err(Error::NoBracket(format!(
                "moment ratio {rhi:?} above target {target:?} at beta = {hi:?}"
            )));
        }
        rhi = ratio(hi)?;
    }

    let accept = |res: T| res.abs() / target < opts.ratio_rel_tol;
    let (beta_u, _, iterations) = bisect(
        |b| ratio(b).map(|r| r - target),
        lo,
        hi,
        rlo - target,
        accept,
        opts.max_iterations,
    )?;

    let (i0, _) = aux_integrals(params, mu, beta_u, opts.quad_rel_tol)?;
    let alpha_u = i0.recip();

    // Residuals re-measured at 10x tighter quadrature tolerance.
    let (i0r, i2r) = aux_integrals(params, mu, beta_u, opts.quad_rel_tol * real(0.1))?;
    let residuals = (alpha_u * i0r - T::one(), (i2r / i0r - target) / target);

    Ok(AuxOutputParams {
        mu,
        alpha_u,
        beta_u,
        residuals,
        iterations,
    })
}

// ---------------------------------------------------------------------------
// Input density f(R~) for M in {2, 3}
// ---------------------------------------------------------------------------

/// Solved parameters of the block input density `f(R~)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputDistParams<T> {
    pub m: usize,
    pub alpha_l: T,
    pub beta_l: T,
    /// `(unit-mass violation, relative second-moment violation)` from an
    /// independent re-evaluation after the solve.
    pub residuals: (T, T),
    pub iterations: u32,
    /// Monte-Carlo provenance (M = 3 only).
    pub mc_seed: Option<u64>,
    pub mc_samples: Option<usize>,
}

/// Options for [`solve_input_params`].
#[derive(Debug, Clone, Copy)]
pub struct InputSolveOptions<T> {
    pub ratio_rel_tol_quadrature: T,
    pub ratio_rel_tol_mc: T,
    pub quad_rel_tol: T,
    pub mc_samples: usize,
    pub mc_seed: u64,
    /// Largest acceptable relative standard error of either Monte-Carlo
    /// integral at the solved point.
    pub mc_max_rel_se: T,
    pub bracket: (T, T),
    pub bracket_limits: (T, T),
    pub max_iterations: u32,
}

impl<T: Real> Default for InputSolveOptions<T> {
    fn default() -> Self {
        Self {
            ratio_rel_tol_quadrature: real(1e-8),
            ratio_rel_tol_mc: real(1e-4),
            quad_rel_tol: real(1e-10),
            mc_samples: 10_000_000,
            mc_seed: 0x0005_EEDE_D5EE_D001,
            mc_max_rel_se: real(1e-3),
            bracket: (real(1e-6), real(10.0)),
            bracket_limits: (real(1e-9), real(1e3)),
            max_iterations: 200,
        }
    }
}

/// Normalization and second-moment integrals of the unnormalized 2-D input
/// density `g_b^{-1} exp(-beta ||R~||^2)` by nested adaptive quadrature.
/// Both coordinates integrate over `(0, inf)`; the integrand is symmetric,
/// so the second moment uses `2 x^2` weighting of the outer coordinate.
fn input_integrals_m2<T: Real>(
    params: &ChannelParams<T>,
    beta: T,
    quad_rel_tol: T,
) -> Result<(T, T)> {
    let sw2 = params.sigma_w_sq();
    let sd2 = params.sigma_delta_sq();
    let scale = beta.recip().sqrt();
    let tiny = T::min_positive_value().sqrt();
    let inner_rel = quad_rel_tol * real(0.01);

    let inner = move |x: T| -> T {
        let w = move |y: T| {
            let g = sd2 + sw2 * (x.powi(-2) + y.powi(-2));
            (-beta * y * y).exp() / g
        };
        let coarse = gk15(&w, T::zero(), scale * real(5.0)).value.abs();
        match adaptive_half_line(&w, T::zero(), (coarse + tiny) * inner_rel, scale) {
            Ok((v, _)) => v,
            Err(_) => T::nan(),
        }
    };

    let f0 = |x: T| (-beta * x * x).exp() * inner(x);
    let f2 = |x: T| real::<T>(2.0) * x * x * (-beta * x * x).exp() * inner(x);

    let c0 = gk15(&f0, T::zero(), scale * real(5.0)).value.abs();
    let c2 = gk15(&f2, T::zero(), scale * real(5.0)).value.abs();
    let (i0, _) = adaptive_half_line(&f0, T::zero(), (c0 + tiny) * quad_rel_tol, scale)?;
    let (i2, _) = adaptive_half_line(&f2, T::zero(), (c2 + tiny) * quad_rel_tol, scale)?;
    if !i0.is_finite() || !i2.is_finite() {
        return Err(Error::NumericalFailure(
            "inner quadrature failed while solving the 2-D input density".into(),
        ));
    }
    Ok((i0, i2))
}

struct McMoments<T> {
    sum_w: T,
    sum_s2w: T,
    sum_w2: T,
    sum_s2w2: T,
    n: usize,
}

/// Importance-sampled integrals of the unnormalized 3-D input density with a
/// product half-normal proposal of scale `1/sqrt(2 beta)` and common random
/// numbers across `beta` (fixed per-chunk seeds).
fn input_integrals_m3<T: Real>(
    params: &ChannelParams<T>,
    beta: T,
    n_samples: usize,
    seed: u64,
) -> McMoments<T> {
    const CHUNK: usize = 1 << 16;
    let sw2 = params.sigma_w_sq();
    let sd2 = params.sigma_delta_sq();
    let inv = (real::<T>(2.0) * beta).sqrt().recip();
    let n_chunks = n_samples.div_ceil(CHUNK);

    let partials: Vec<(T, T, T, T)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, c as u64));
            let count = CHUNK.min(n_samples - c * CHUNK);
            let mut sw = T::zero();
            let mut ss2w = T::zero();
            let mut sw2_acc = T::zero();
            let mut ss2w2 = T::zero();
            for _ in 0..count {
                let x0 = T::standard_normal(&mut rng).abs() * inv;
                let x1 = T::standard_normal(&mut rng).abs() * inv;
                let x2 = T::standard_normal(&mut rng).abs() * inv;
                // time order (x0, x1, x2); g conditions the newest on the past
                let g = sampler::gb_m3_unchecked(sd2, sw2, x2, x1, x0);
                let w = g.powf(real(-1.5));
                let s2 = x0 * x0 + x1 * x1 + x2 * x2;
                sw += w;
                ss2w += s2 * w;
                sw2_acc += w * w;
                ss2w2 += (s2 * w) * (s2 * w);
            }
            (sw, ss2w, sw2_acc, ss2w2)
        })
        .collect();

    let mut m = McMoments {
        sum_w: T::zero(),
        sum_s2w: T::zero(),
        sum_w2: T::zero(),
        sum_s2w2: T::zero(),
        n: n_samples,
    };
    for (a, b, c, d) in partials {
        m.sum_w += a;
        m.sum_s2w += b;
        m.sum_w2 += c;
        m.sum_s2w2 += d;
    }
    m
}

fn mc_rel_se<T: Real>(sum: T, sum_sq: T, n: usize) -> T {
    let nt = real::<T>(n as f64);
    let mean = sum / nt;
    let var = ((sum_sq - sum * sum / nt) / (nt - T::one())).max(T::zero());
    (var / nt).sqrt() / mean
}

/// Solve `(alpha_l, beta_l)` for the block input density with `m` in `{2, 3}`.
pub fn solve_input_params<T: Real>(
    params: &ChannelParams<T>,
    m: usize,
) -> Result<InputDistParams<T>> {
    solve_input_params_with(params, m, &InputSolveOptions::default())
}

pub fn solve_input_params_with<T: Real>(
    params: &ChannelParams<T>,
    m: usize,
    opts: &InputSolveOptions<T>,
) -> Result<InputDistParams<T>> {
    let target = real::<T>(m as f64) * params.es();
    match m {
        2 => {
            let ratio = |beta: T| -> Result<T> {
                let (i0, i2) = input_integrals_m2(params, beta, opts.quad_rel_tol)?;
                Ok(i2 / i0)
            };
            let (beta_l, iterations) = solve_moment_ratio(
                ratio,
                target,
                opts.bracket,
                opts.bracket_limits,
                opts.ratio_rel_tol_quadrature,
                opts.max_iterations,
            )?;
            let (i0, _) = input_integrals_m2(params, beta_l, opts.quad_rel_tol)?;
            let alpha_l = i0.recip();
            let (i0r, i2r) = input_integrals_m2(params, beta_l, opts.quad_rel_tol * real(0.1))?;
            Ok(InputDistParams {
                m,
                alpha_l,
                beta_l,
                residuals: (alpha_l * i0r - T::one(), (i2r / i0r - target) / target),
                iterations,
                mc_seed: None,
                mc_samples: None,
            })
        }
        3 => {
            let ratio = |beta: T| -> Result<T> {
                let mm = input_integrals_m3(params, beta, opts.mc_samples, opts.mc_seed);
                Ok(mm.sum_s2w / mm.sum_w)
            };
            let (beta_l, iterations) = solve_moment_ratio(
                ratio,
                target,
                opts.bracket,
                opts.bracket_limits,
                opts.ratio_rel_tol_mc,
                opts.max_iterations,
            )?;

            let mm = input_integrals_m3(params, beta_l, opts.mc_samples, opts.mc_seed);
            let se0 = mc_rel_se(mm.sum_w, mm.sum_w2, mm.n);
            let se2 = mc_rel_se(mm.sum_s2w, mm.sum_s2w2, mm.n);
            if se0 > opts.mc_max_rel_se || se2 > opts.mc_max_rel_se {
                return Err(Error::InsufficientPrecision(format!(
                    "Monte-Carlo relative standard errors ({se0:?}, {se2:?}) exceed {:?}; \
                     increase mc_samples",
                    opts.mc_max_rel_se
                )));
            }
            let nt = real::<T>(mm.n as f64);
            // proposal normalization: (2 sqrt(beta/pi))^3
            let c3 = (real::<T>(2.0) * (beta_l / T::PI()).sqrt()).powi(3);
            let i0 = mm.sum_w / nt / c3;
            let alpha_l = i0.recip();

            // Residuals from an independent sample set.
            let fresh = input_integrals_m3(
                params,
                beta_l,
                opts.mc_samples,
                derive_seed(opts.mc_seed, 0xFEED),
            );
            let i0f = fresh.sum_w / nt / c3;
            let ratio_f = fresh.sum_s2w / fresh.sum_w;
            Ok(InputDistParams {
                m,
                alpha_l,
                beta_l,
                residuals: (alpha_l * i0f - T::one(), (ratio_f - target) / target),
                iterations,
                mc_seed: Some(opts.mc_seed),
                mc_samples: Some(opts.mc_samples),
            })
        }
        _ => Err(Error::InvalidInput(format!(
            "block length m must be 2 or 3, got {m}"
        ))),
    }
}

/// Shared bracket-and-bisect driver for a decreasing moment ratio.
fn solve_moment_ratio<T: Real>(
    mut ratio: impl FnMut(T) -> Result<T>,
    target: T,
    bracket: (T, T),
    limits: (T, T),
    rel_tol: T,
    max_iter: u32,
) -> Result<(T, u32)> {
    let (mut lo, mut hi) = bracket;
    let mut rlo = ratio(lo)?;
    let mut rhi = ratio(hi)?;
    while rlo < target {
        lo = lo * real(0.1);
        if lo < limits.0 {
            return Err(Error::NoBracket(format!(
                "moment ratio stays below target {target:?} down to beta = {:?}",
                limits.0
            )));
        }
        rlo = ratio(lo)?;
    }
    while rhi > target {
        hi = hi * real(10.0);
        if hi > limits.1 {
            return Err(Error::NoBracket(format!(
                "moment ratio stays above target {target:?} up to beta = {:?}",
                limits.1
            )));
        }
        rhi = ratio(hi)?;
    }
    let accept = |res: T| res.abs() / target < rel_tol;
    let (beta, _, iters) = bisect(
        |b| ratio(b).map(|r| r - target),
        lo,
        hi,
        rlo - target,
        accept,
        max_iter,
    )?;
    Ok((beta, iters))
}
