//! Memoryless relay schemes the joint decoder is compared against.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::message::{init_evidence, posterior_mean};
use crate::scalar::Real;

/// Relay processing scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Packet-level joint belief propagation.
    JointBp,
    /// Symbol-by-symbol posterior mean.
    MemorylessMmse,
    /// Fixed linear scaling of the received signal.
    AmplifyForward,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::JointBp => "joint_bp",
            Scheme::MemorylessMmse => "memoryless_mmse",
            Scheme::AmplifyForward => "amplify_forward",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "joint_bp" => Ok(Scheme::JointBp),
            "memoryless_mmse" => Ok(Scheme::MemorylessMmse),
            "amplify_forward" => Ok(Scheme::AmplifyForward),
            other => Err(Error::Config(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Relay output of a baseline scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutput<T> {
    pub x3: Vec<Complex<T>>,
    pub scheme: Scheme,
}

/// Posterior mean of `h13 u1 + h23 u2` given a single received sample.
pub fn memoryless_mmse<T: Real>(r: Complex<T>, h13: Complex<T>, h23: Complex<T>, sigma2: T) -> Complex<T> {
    posterior_mean(&init_evidence(r, h13, h23, sigma2), h13, h23)
}

/// Symbol-wise MMSE over a whole packet.
pub fn memoryless_mmse_packet<T: Real>(
    r: &[Complex<T>],
    h13: Complex<T>,
    h23: Complex<T>,
    sigma2: T,
) -> BaselineOutput<T> {
    BaselineOutput {
        x3: r.iter().map(|&y| memoryless_mmse(y, h13, h23, sigma2)).collect(),
        scheme: Scheme::MemorylessMmse,
    }
}

/// Power normalization `1 / sqrt(|h13|^2 + |h23|^2 + sigma2)`.
pub fn af_gain<T: Real>(h13: Complex<T>, h23: Complex<T>, sigma2: T) -> T {
    (h13.norm_sqr() + h23.norm_sqr() + sigma2).sqrt().recip()
}

/// Linear MMSE coefficient for estimating `h13 u1 + h23 u2` from `r`.
pub fn lmmse_gain<T: Real>(h13: Complex<T>, h23: Complex<T>, sigma2: T) -> T {
    let p = h13.norm_sqr() + h23.norm_sqr();
    p / (p + sigma2)
}

/// `x3 = alpha r` with unit average output power.
pub fn amplify_forward<T: Real>(r: &[Complex<T>], h13: Complex<T>, h23: Complex<T>, sigma2: T) -> BaselineOutput<T> {
    let alpha = af_gain(h13, h23, sigma2);
    BaselineOutput {
        x3: r.iter().map(|&y| y * alpha).collect(),
        scheme: Scheme::AmplifyForward,
    }
}

/// Samples of a repeat code averaged per group, with their noise variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Combined<T> {
    pub samples: Vec<Complex<T>>,
    pub sigma2: T,
}

/// Maximum ratio combining of consecutive groups of `q` repeated samples.
///
/// All copies share the same channel gains, so MRC reduces to averaging and
/// the noise variance drops to `sigma2 / q`.
pub fn mrc_repeat_combine<T: Real>(r: &[Complex<T>], q: usize, sigma2: T) -> Result<Combined<T>> {
    if q == 0 || !r.len().is_multiple_of(q) {
        return Err(Error::InvalidParameter(format!(
            "repeat factor {q} does not divide packet length {}",
            r.len()
        )));
    }
    let groups: Vec<Vec<usize>> = (0..r.len() / q).map(|g| (g * q..(g + 1) * q).collect()).collect();
    mrc_combine_groups(r, &groups, sigma2)
}

/// Averages the samples of each index group. Groups must share one size.
pub fn mrc_combine_groups<T: Real>(r: &[Complex<T>], groups: &[Vec<usize>], sigma2: T) -> Result<Combined<T>> {
    let q = groups.first().map_or(0, Vec::len);
    if q == 0 || groups.iter().any(|g| g.len() != q) {
        return Err(Error::InvalidParameter("repeat groups must be non-empty and equal-sized".into()));
    }
    if let Some(&bad) = groups.iter().flatten().find(|&&i| i >= r.len()) {
        return Err(Error::InvalidParameter(format!("group index {bad} out of range")));
    }
    let scale = T::lit(q as f64).recip();
    let samples = groups
        .iter()
        .map(|g| g.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &i| acc + r[i]) * scale)
        .collect();
    Ok(Combined {
        samples,
        sigma2: sigma2 * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::message::constellation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn mmse_examples() {
        assert!(memoryless_mmse(c(0.0), c(1.0), c(1.0), 0.7).norm() < 1e-15);
        let out = memoryless_mmse(c(1.3), c(1.0), c(0.3), 1e-30);
        assert!((out - c(1.3)).norm() < 1e-12);
        // Posterior weights exp(-{0, 4, 4, 16}) over points {2, 0, 0, -2}.
        let w = [0.0f64, -4.0, -4.0, -16.0].map(f64::exp);
        let s: f64 = w.iter().sum();
        let expected = (2.0 * w[0] - 2.0 * w[3]) / s;
        assert!((memoryless_mmse(c(2.0), c(1.0), c(1.0), 1.0) - c(expected)).norm() < 1e-14);
    }

    #[test]
    fn mmse_stays_in_convex_hull_and_snaps_at_high_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (h13, h23) = (c(1.0), c(0.4));
        for _ in 0..1000 {
            let r = complex_gaussian(4.0, &mut rng);
            let out = memoryless_mmse(r, h13, h23, 0.5);
            // Real collinear constellation: hull is the interval [-1.4, 1.4].
            assert!(out.re.abs() <= 1.4 + 1e-12 && out.im.abs() < 1e-12);
        }
        for p in constellation(h13, h23) {
            let out = memoryless_mmse(p + C::new(0.05, 0.02), h13, h23, 1e-4);
            assert!((out - p).norm() < 1e-9);
        }
    }

    #[test]
    fn af_examples() {
        assert!((af_gain(c(1.0), c(1.0), 0.0) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        let r = vec![c(1.0), C::new(0.5, -2.0)];
        let a = amplify_forward(&r, c(1.0), c(1.0), 0.5);
        let b = amplify_forward(&r.iter().map(|v| v * 3.0).collect::<Vec<_>>(), c(1.0), c(1.0), 0.5);
        for k in 0..2 {
            assert!((b.x3[k] - a.x3[k] * 3.0).norm() < 1e-14);
        }
        assert_eq!(a.scheme, Scheme::AmplifyForward);
    }

    #[test]
    fn af_output_power_is_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (h13, h23, sigma2) = (C::new(0.6, 0.3), c(-0.9), 0.4);
        let n = 1_000_000;
        let r: Vec<C> = (0..n)
            .map(|_| {
                let u1 = if rand::Rng::random::<bool>(&mut rng) { 1.0 } else { -1.0 };
                let u2 = if rand::Rng::random::<bool>(&mut rng) { 1.0 } else { -1.0 };
                h13 * u1 + h23 * u2 + complex_gaussian(sigma2, &mut rng)
            })
            .collect();
        let out = amplify_forward(&r, h13, h23, sigma2);
        let p = out.x3.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        assert!((p - 1.0).abs() < 0.01, "power {p}");
    }

    #[test]
    fn mrc_examples() {
        let r = vec![c(1.2), c(0.8), c(-0.4), c(0.1)];
        assert_eq!(mrc_repeat_combine(&r, 1, 1.0).unwrap().samples, r);
        let out = mrc_repeat_combine(&r, 2, 1.0).unwrap();
        assert!((out.samples[0] - c(1.0)).norm() < 1e-15);
        assert_eq!(out.sigma2, 0.5);
        assert!(mrc_repeat_combine(&r, 3, 1.0).is_err());
        assert!(mrc_combine_groups(&r, &[vec![0, 1], vec![2]], 1.0).is_err());
    }

    #[test]
    fn mrc_halves_noise_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sigma2 = 0.8;
        let groups = 1_000_000;
        let r: Vec<C> = (0..2 * groups).map(|_| complex_gaussian(sigma2, &mut rng)).collect();
        let out = mrc_repeat_combine(&r, 2, sigma2).unwrap();
        let v = out.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / groups as f64;
        assert!((v / (sigma2 / 2.0) - 1.0).abs() < 0.01);
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [Scheme::JointBp, Scheme::MemorylessMmse, Scheme::AmplifyForward] {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert!("decode_forward".parse::<Scheme>().is_err());
    }
}
