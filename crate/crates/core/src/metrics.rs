//! Relay-side quality measures.

use num_complex::Complex;

use crate::curve::MseCurve;
use crate::error::{check_len, Error, Result};
use crate::scalar::Real;

/// Mean of `|x3[k] - h13 a1[k] - h23 a2[k]|^2` over the packet.
pub fn mse_relay<T: Real>(x3: &[Complex<T>], a1: &[T], a2: &[T], h13: Complex<T>, h23: Complex<T>) -> Result<T> {
    check_len(x3.len(), a1.len())?;
    check_len(x3.len(), a2.len())?;
    if x3.is_empty() {
        return Err(Error::InvalidParameter("empty packet".into()));
    }
    let total: T = x3
        .iter()
        .zip(a1.iter().zip(a2))
        .map(|(&x, (&u1, &u2))| (x - (h13 * u1 + h23 * u2)).norm_sqr())
        .sum();
    Ok(total / T::lit(x3.len() as f64))
}

/// Fraction of wrong bits over both users' decisions.
pub fn relay_ber(hard1: &[u8], hard2: &[u8], x1: &[u8], x2: &[u8]) -> Result<f64> {
    let n = x1.len();
    for len in [hard1.len(), hard2.len(), x2.len()] {
        check_len(n, len)?;
    }
    if n == 0 {
        return Err(Error::InvalidParameter("empty packet".into()));
    }
    let wrong = |a: &[u8], b: &[u8]| a.iter().zip(b).filter(|(p, q)| (*p ^ *q) & 1 == 1).count();
    Ok((wrong(hard1, x1) + wrong(hard2, x2)) as f64 / (2 * n) as f64)
}

/// Lower bound on the SNR gain of a rate-`rate` code: `-10 log10(rate)` dB.
pub fn prop1_bound<T: Real>(rate: T) -> Result<T> {
    if !(rate > T::zero() && rate <= T::one()) {
        return Err(Error::InvalidParameter(format!("code rate {rate} outside (0, 1]")));
    }
    Ok(-T::lit(10.0) * rate.log10())
}

/// SNR gain over the memoryless relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrImprovement<T> {
    pub delta_db: T,
    /// `measured_mse` fell outside the curve and was clipped to its range.
    pub extrapolated: bool,
}

/// Extra SNR the memoryless relay needs to match `measured_mse`:
/// `f1^-1(measured_mse) - own_snr_db`.
pub fn snr_improvement<T: Real>(measured_mse: T, curve: &MseCurve<T>, own_snr_db: T) -> SnrImprovement<T> {
    let inv = curve.inverse(measured_mse);
    SnrImprovement {
        delta_db: inv.snr_db - own_snr_db,
        extrapolated: inv.extrapolated,
    }
}
