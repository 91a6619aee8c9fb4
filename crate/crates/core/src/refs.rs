//! Reference capacity formulas: the AWGN capacity, the high-SNR phase-noise
//! capacity, and their crossover SNR.

use crate::error::{Error, Result};
use crate::model::ChannelParams;
use crate::real::{real, Real};

/// AWGN capacity `log2(1 + es / (2 sigma_w^2))` in bits.
pub fn c_awgn<T: Real>(params: &ChannelParams<T>) -> T {
    (T::one() + params.snr()).log2()
}

/// High-SNR phase-noise capacity
/// `(1/2) log2(1 + es/(4 sigma_w^2)) - (1/2) log2(e sigma_delta^2 / (2 pi))`
/// in bits. Diverges for `sigma_delta_sq = 0`.
pub fn c_lapidoth<T: Real>(params: &ChannelParams<T>) -> Result<T> {
    let sd2 = params.sigma_delta_sq();
    if !(sd2 > T::zero()) {
        return Err(Error::DomainError(
            "the high-SNR capacity formula needs sigma_delta_sq > 0".into(),
        ));
    }
    let half = real::<T>(0.5);
    let amp = (T::one() + params.es() / (real::<T>(4.0) * params.sigma_w_sq())).log2();
    let pen = (T::E() * sd2 / T::TAU()).log2();
    Ok(half * amp - half * pen)
}

/// SNR (dB) where the AWGN capacity meets the high-SNR phase-noise capacity,
/// solved by bisection over `[-20, 80]` dB at fixed `es`. Close to
/// `10 log10(1 / sigma_delta^2)`.
pub fn crossover_snr_db<T: Real>(params: &ChannelParams<T>) -> Result<T> {
    let sd2 = params.sigma_delta_sq();
    if !(sd2 > T::zero() && sd2 < T::one()) {
        return Err(Error::InvalidInput(format!(
            "crossover expects sigma_delta_sq in (0, 1), got {sd2:?}"
        )));
    }
    let es = params.es();
    let diff = |snr_db: T| -> Result<T> {
        let p = ChannelParams::from_snr_db(snr_db, sd2, es)?;
        Ok(c_awgn(&p) - c_lapidoth(&p)?)
    };
    let mut lo = real::<T>(-20.0);
    let mut hi = real::<T>(80.0);
    let flo = diff(lo)?;
    let fhi = diff(hi)?;
    if flo * fhi > T::zero() {
        return Err(Error::NoCrossover(format!(
            "no sign change on [-20, 80] dB (f(-20) = {flo:?}, f(80) = {fhi:?})"
        )));
    }
    for _ in 0..200 {
        let mid = (lo + hi) * real(0.5);
        let fm = diff(mid)?;
        if fm.abs() < real(1e-9) || (hi - lo).abs() < real(1e-7) {
            return Ok(mid);
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence("crossover bisection stalled".into()))
}
