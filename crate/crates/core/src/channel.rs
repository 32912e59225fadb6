//! BPSK modulation, the two-user uplink to the relay and the relay downlink.
//!
//! Noise convention: `sigma2` is the total complex noise power, split evenly
//! between the real and imaginary parts. SNR is `1 / sigma2`.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Error, Result};
use crate::scalar::Real;

/// Per-packet channel state: uplink gains, optional downlink gains and noise power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization<T> {
    pub h13: Complex<T>,
    pub h23: Complex<T>,
    pub sigma2: T,
    pub h31: Option<Complex<T>>,
    pub h32: Option<Complex<T>>,
}

impl<T: Real> ChannelRealization<T> {
    /// Uplink-only realization. `sigma2` must be positive and every
    /// coefficient finite.
    pub fn new(h13: Complex<T>, h23: Complex<T>, sigma2: T) -> Result<Self> {
        let ch = Self {
            h13,
            h23,
            sigma2,
            h31: None,
            h32: None,
        };
        ch.validate()?;
        Ok(ch)
    }

    /// Real gains with noise power taken from an SNR in dB.
    pub fn from_snr_db(h13: T, h23: T, snr_db: T) -> Result<Self> {
        Self::new(
            Complex::new(h13, T::zero()),
            Complex::new(h23, T::zero()),
            snr_db_to_sigma2(snr_db),
        )
    }

    pub fn with_downlink(mut self, h31: Complex<T>, h32: Complex<T>) -> Result<Self> {
        self.h31 = Some(h31);
        self.h32 = Some(h32);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma2 > T::zero() && self.sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive and finite, got {}",
                self.sigma2
            )));
        }
        let finite = |c: &Complex<T>| c.re.is_finite() && c.im.is_finite();
        let all = [Some(self.h13), Some(self.h23), self.h31, self.h32];
        if !all.iter().flatten().all(finite) {
            return Err(Error::InvalidParameter("non-finite channel coefficient".into()));
        }
        Ok(())
    }
}

/// `sigma2 = 10^(-snr_db / 10)`.
pub fn snr_db_to_sigma2<T: Real>(snr_db: T) -> T {
    T::lit(10.0).powf(-snr_db / T::lit(10.0))
}

pub fn sigma2_to_snr_db<T: Real>(sigma2: T) -> T {
    -T::lit(10.0) * sigma2.log10()
}

/// Distribution of a channel coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelDist<T> {
    Fixed(Complex<T>),
    /// Circularly symmetric complex Gaussian with the given `E|h|^2`.
    Rayleigh { variance: T },
}

/// Draws one channel coefficient.
pub fn sample_channel<T: Real, R: Rng + ?Sized>(dist: &ChannelDist<T>, rng: &mut R) -> Complex<T> {
    match *dist {
        ChannelDist::Fixed(h) => h,
        ChannelDist::Rayleigh { variance } => complex_gaussian(variance, rng),
    }
}

/// Zero-mean circularly symmetric complex Gaussian with `E|w|^2 = power`.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(power: T, rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let scale = (power / T::lit(2.0)).sqrt();
    Complex::new(T::lit(re) * scale, T::lit(im) * scale)
}

/// `a = 1 - 2x`.
pub fn modulate_bpsk<T: Real>(x: &[u8]) -> Vec<T> {
    x.iter()
        .map(|&b| if b & 1 == 0 { T::one() } else { -T::one() })
        .collect()
}

/// `r = h13 a1 + h23 a2 + w` with `w ~ CN(0, sigma2)`.
pub fn uplink_superpose<T: Real, R: Rng + ?Sized>(
    a1: &[T],
    a2: &[T],
    ch: &ChannelRealization<T>,
    rng: &mut R,
) -> Result<Vec<Complex<T>>> {
    check_len(a1.len(), a2.len())?;
    Ok(a1
        .iter()
        .zip(a2)
        .map(|(&u1, &u2)| ch.h13 * u1 + ch.h23 * u2 + complex_gaussian(ch.sigma2, rng))
        .collect())
}

/// `y = h x3 + w`. A zero `sigma2` gives the noiseless channel.
pub fn downlink<T: Real, R: Rng + ?Sized>(
    x3: &[Complex<T>],
    h: Complex<T>,
    sigma2: T,
    rng: &mut R,
) -> Vec<Complex<T>> {
    x3.iter()
        .map(|&x| {
            let w = if sigma2 > T::zero() {
                complex_gaussian(sigma2, rng)
            } else {
                Complex::new(T::zero(), T::zero())
            };
            h * x + w
        })
        .collect()
}

/// `y - known`, removing an end node's own contribution from the broadcast.
pub fn cancel_self_interference<T: Real>(
    y: &[Complex<T>],
    known: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    check_len(y.len(), known.len())?;
    Ok(y.iter().zip(known).map(|(&a, &b)| a - b).collect())
}
