//! The memoryless MSE-versus-SNR reference curve and its inverse.
//!
//! The memoryless relay forwards the per-symbol posterior mean, so its MSE
//! at a fixed channel equals the expected posterior variance of the
//! transmitted constellation point. The Monte Carlo estimator averages that
//! posterior variance over noise draws (exactly averaging over the four
//! equiprobable symbol pairs) in the log domain, reusing the same noise draws
//! at every grid point. Deterministic quadrature of the squared error serves
//! as an independent check.

// Negated comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel::snr_db_to_sigma2;
use crate::error::{Error, Result};
use crate::message::{constellation, evidence_from_points, posterior_mean, JointMessage};
use crate::scalar::Real;

/// How the curve is interpolated between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Linear in `(snr_db, ln mse)`.
    LogLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSource {
    MonteCarlo { samples: usize },
    Quadrature,
}

/// Agreement of one Monte Carlo point with quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCheck<T> {
    pub snr_db: T,
    pub monte_carlo: T,
    pub quadrature: T,
    pub std_err: T,
}

impl<T: Real> CrossCheck<T> {
    /// Within three standard errors.
    pub fn passed(&self) -> bool {
        (self.monte_carlo - self.quadrature).abs() <= T::lit(3.0) * self.std_err
    }
}

/// Tabulated memoryless MSE for fixed `(h13, h23)`, strictly decreasing in SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct MseCurve<T> {
    pub h13: Complex<T>,
    pub h23: Complex<T>,
    snr_db: Vec<T>,
    ln_mse: Vec<T>,
    rel_std_err: Vec<T>,
    pub interpolation: Interpolation,
    pub source: CurveSource,
    cross_checks: Vec<CrossCheck<T>>,
}

/// Inverse lookup on a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inverse<T> {
    pub snr_db: T,
    /// The queried MSE was outside the tabulated range and was clipped.
    pub extrapolated: bool,
}

impl<T: Real> MseCurve<T> {
    /// Builds a curve from tabulated points. SNRs must be strictly
    /// increasing and MSEs positive and strictly decreasing.
    pub fn from_points(h13: Complex<T>, h23: Complex<T>, snr_db: Vec<T>, mse: Vec<T>) -> Result<Self> {
        if snr_db.len() != mse.len() {
            return Err(Error::Curve("snr and mse columns differ in length".into()));
        }
        let n = snr_db.len();
        let curve = Self {
            h13,
            h23,
            snr_db,
            ln_mse: mse.iter().map(|m| m.ln()).collect(),
            rel_std_err: vec![T::zero(); n],
            interpolation: Interpolation::LogLinear,
            source: CurveSource::Quadrature,
            cross_checks: Vec::new(),
        };
        curve.validate()?;
        Ok(curve)
    }

    fn validate(&self) -> Result<()> {
        if self.snr_db.len() < 2 {
            return Err(Error::Curve("need at least two points".into()));
        }
        if self.snr_db.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Curve("snr grid must be strictly increasing".into()));
        }
        if let Some(i) = first_non_decreasing(&self.ln_mse) {
            return Err(Error::Curve(format!(
                "mse not strictly decreasing at {} dB",
                self.snr_db[i]
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.snr_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snr_db.is_empty()
    }

    pub fn snr_db(&self) -> &[T] {
        &self.snr_db
    }

    /// Natural log of the tabulated MSEs.
    pub fn ln_mse(&self) -> &[T] {
        &self.ln_mse
    }

    pub fn mse(&self) -> Vec<T> {
        self.ln_mse.iter().map(|l| l.exp()).collect()
    }

    /// Relative standard error of each point (zero for quadrature).
    pub fn rel_std_err(&self) -> &[T] {
        &self.rel_std_err
    }

    pub fn cross_checks(&self) -> &[CrossCheck<T>] {
        &self.cross_checks
    }

    /// MSE at `snr_db`, interpolated; clipped to the end points outside the grid.
    pub fn mse_at(&self, snr_db: T) -> T {
        let s = &self.snr_db;
        let last = s.len() - 1;
        if snr_db <= s[0] {
            return self.ln_mse[0].exp();
        }
        if snr_db >= s[last] {
            return self.ln_mse[last].exp();
        }
        let i = s.partition_point(|&x| x <= snr_db) - 1;
        let t = (snr_db - s[i]) / (s[i + 1] - s[i]);
        (self.ln_mse[i] + t * (self.ln_mse[i + 1] - self.ln_mse[i])).exp()
    }

    /// SNR at which the memoryless scheme reaches `mse`.
    pub fn inverse(&self, mse: T) -> Inverse<T> {
        let l = mse.ln();
        let last = self.len() - 1;
        if !(l < self.ln_mse[0]) {
            return Inverse {
                snr_db: self.snr_db[0],
                extrapolated: l > self.ln_mse[0],
            };
        }
        if !(l > self.ln_mse[last]) {
            return Inverse {
                snr_db: self.snr_db[last],
                extrapolated: l < self.ln_mse[last] || l.is_nan(),
            };
        }
        // ln_mse is decreasing: first index whose value is below l.
        let j = self.ln_mse.partition_point(|&x| x >= l);
        let i = j - 1;
        let t = (self.ln_mse[i] - l) / (self.ln_mse[i] - self.ln_mse[j]);
        Inverse {
            snr_db: self.snr_db[i] + t * (self.snr_db[j] - self.snr_db[i]),
            extrapolated: false,
        }
    }

    /// Two-column CSV `snr_db,mse`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["snr_db", "mse"])?;
        for (s, l) in self.snr_db.iter().zip(&self.ln_mse) {
            out.write_record([format!("{:.12e}", s.as_f64()), format!("{:.12e}", l.exp().as_f64())])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R, h13: Complex<T>, h23: Complex<T>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let (mut snr, mut mse) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<T> {
                rec.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .map(T::lit)
                    .ok_or_else(|| Error::Curve(format!("bad field {i} in {rec:?}")))
            };
            snr.push(parse(0)?);
            mse.push(parse(1)?);
        }
        Self::from_points(h13, h23, snr, mse)
    }
}

fn first_non_decreasing<T: Real>(ln_mse: &[T]) -> Option<usize> {
    ln_mse
        .iter()
        .position(|l| !l.is_finite())
        .or_else(|| ln_mse.windows(2).position(|w| !(w[1] < w[0])).map(|i| i + 1))
}

/// Streaming `ln sum exp(x)`; `-inf` terms are skipped.
fn log_sum_exp<T: Real>(xs: impl IntoIterator<Item = T>) -> T {
    let (mut max, mut sum) = (T::neg_infinity(), T::zero());
    for x in xs {
        if x == T::neg_infinity() {
            continue;
        }
        if x > max {
            sum = sum * (max - x).exp() + T::one();
            max = x;
        } else {
            sum = sum + (x - max).exp();
        }
    }
    if max == T::neg_infinity() {
        max
    } else {
        max + sum.ln()
    }
}

/// Constellation with the log squared distance of every distinct pair.
struct Geometry<T> {
    points: [Complex<T>; 4],
    pairs: Vec<(usize, usize, T)>,
}

impl<T: Real> Geometry<T> {
    fn new(h13: Complex<T>, h23: Complex<T>) -> Self {
        let points = constellation(h13, h23);
        let mut pairs = Vec::new();
        for k in 0..4 {
            for l in k + 1..4 {
                let d2 = (points[k] - points[l]).norm_sqr();
                if d2 > T::zero() {
                    pairs.push((k, l, d2.ln()));
                }
            }
        }
        Self { points, pairs }
    }

    /// `ln` of the posterior variance `sum_{k<l} p_k p_l |c_k - c_l|^2` at `r`.
    fn ln_posterior_variance(&self, r: Complex<T>, sigma2: T) -> T {
        let ll = self.points.map(|c| -(r - c).norm_sqr() / sigma2);
        let norm = log_sum_exp(ll.iter().copied());
        log_sum_exp(
            self.pairs
                .iter()
                .map(|&(k, l, ln_d2)| ll[k] + ll[l] - norm - norm + ln_d2),
        )
    }

    /// `ln` of the averaged posterior variance over the four transmitted points.
    fn ln_mean_variance(&self, z: Complex<T>, sigma: T, sigma2: T) -> T {
        let quarter = T::lit(0.25).ln();
        quarter + log_sum_exp(self.points.iter().map(|&c| self.ln_posterior_variance(c + z * sigma, sigma2)))
    }

    /// Squared error of the posterior-mean estimate, averaged over the four
    /// transmitted points.
    fn mean_squared_error(&self, z: Complex<T>, sigma: T, sigma2: T, h13: Complex<T>, h23: Complex<T>) -> T {
        self.points
            .iter()
            .map(|&c| {
                let post: JointMessage<T> = evidence_from_points(c + z * sigma, &self.points, sigma2);
                (posterior_mean(&post, h13, h23) - c).norm_sqr()
            })
            .sum::<T>()
            * T::lit(0.25)
    }
}

/// Log-domain Monte Carlo mean and relative standard error.
fn log_mean<T: Real>(values: &[T]) -> (T, T) {
    let n = T::lit(values.len() as f64);
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    let scaled: Vec<T> = values.iter().map(|&v| (v - max).exp()).collect();
    let mean = scaled.iter().copied().sum::<T>() / n;
    let var = scaled.iter().map(|&w| (w - mean) * (w - mean)).sum::<T>() / (n - T::one());
    (max + mean.ln(), (var / n).sqrt() / mean)
}

fn standard_complex_normals<T: Real>(samples: usize, seed: u64, stream: u64) -> Vec<Complex<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..samples)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex::new(T::lit(re * scale), T::lit(im * scale))
        })
        .collect()
}

fn mc_point<T: Real>(geo: &Geometry<T>, noise: &[Complex<T>], snr_db: T) -> (T, T) {
    let sigma2 = snr_db_to_sigma2(snr_db);
    let sigma = sigma2.sqrt();
    let values: Vec<T> = noise.iter().map(|&z| geo.ln_mean_variance(z, sigma, sigma2)).collect();
    log_mean(&values)
}

/// Monte Carlo estimate of the memoryless MSE on an ascending SNR grid.
///
/// Every grid point reuses the same `samples` noise draws. A point that breaks
/// strict monotonicity is re-estimated once with ten times as many fresh draws;
/// if the curve is still not strictly decreasing the estimate is rejected.
/// Three points are cross-checked against quadrature; any disagreement beyond
/// three standard errors is also an error.
pub fn estimate_f1_curve<T: Real>(
    h13: Complex<T>,
    h23: Complex<T>,
    snr_grid_db: &[T],
    samples: usize,
    seed: u64,
) -> Result<MseCurve<T>> {
    if snr_grid_db.len() < 2 {
        return Err(Error::Curve("need at least two grid points".into()));
    }
    if snr_grid_db.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Curve("snr grid must be strictly increasing".into()));
    }
    if samples < 2 {
        return Err(Error::Curve("need at least two samples per point".into()));
    }
    let geo = Geometry::new(h13, h23);
    if geo.pairs.is_empty() {
        return Err(Error::Curve("degenerate constellation".into()));
    }
    let noise = standard_complex_normals::<T>(samples, seed, 0);
    let points: Vec<(T, T)> = snr_grid_db.par_iter().map(|&s| mc_point(&geo, &noise, s)).collect();
    let (mut ln_mse, mut rel_std_err): (Vec<T>, Vec<T>) = points.into_iter().unzip();

    let mut attempt = 1u64;
    while let Some(i) = first_non_decreasing(&ln_mse) {
        if attempt > snr_grid_db.len() as u64 {
            return Err(Error::Curve(format!(
                "mse not monotone at {} dB after resampling; increase samples",
                snr_grid_db[i]
            )));
        }
        let fresh = standard_complex_normals::<T>(samples * 10, seed, attempt);
        let (l, se) = mc_point(&geo, &fresh, snr_grid_db[i]);
        ln_mse[i] = l;
        rel_std_err[i] = se;
        attempt += 1;
        if first_non_decreasing(&ln_mse) == Some(i) {
            return Err(Error::Curve(format!(
                "mse not monotone at {} dB after resampling; increase samples",
                snr_grid_db[i]
            )));
        }
    }

    let rule = if is_real_line(h13, h23) {
        QuadratureRule::fine()
    } else {
        QuadratureRule::fine_plane()
    };
    let mut idx = vec![0, snr_grid_db.len() / 4, snr_grid_db.len() / 2];
    idx.dedup();
    let cross_checks: Vec<CrossCheck<T>> = idx
        .into_iter()
        .map(|i| {
            let mc = ln_mse[i].exp();
            CrossCheck {
                snr_db: snr_grid_db[i],
                monte_carlo: mc,
                quadrature: f1_quadrature(h13, h23, snr_db_to_sigma2(snr_grid_db[i]), &rule),
                std_err: mc * rel_std_err[i],
            }
        })
        .collect();
    if let Some(bad) = cross_checks.iter().find(|c| !c.passed()) {
        return Err(Error::Curve(format!(
            "Monte Carlo {} vs quadrature {} at {} dB exceeds three standard errors ({})",
            bad.monte_carlo, bad.quadrature, bad.snr_db, bad.std_err
        )));
    }

    let curve = MseCurve {
        h13,
        h23,
        snr_db: snr_grid_db.to_vec(),
        ln_mse,
        rel_std_err,
        interpolation: Interpolation::LogLinear,
        source: CurveSource::MonteCarlo { samples },
        cross_checks,
    };
    curve.validate()?;
    Ok(curve)
}

/// Composite Simpson rule over `[-half_width, half_width]` standard deviations
/// per real noise dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    pub half_width: f64,
    /// Nodes per axis; forced odd.
    pub nodes: usize,
}

impl QuadratureRule {
    /// Dense rule for validating Monte Carlo estimates.
    pub fn fine() -> Self {
        Self {
            half_width: 12.0,
            nodes: 20_001,
        }
    }

    /// Cheap rule for per-realization curves.
    pub fn coarse() -> Self {
        Self {
            half_width: 7.0,
            nodes: 57,
        }
    }

    /// Dense rule for validating complex-gain estimates on both axes.
    pub fn fine_plane() -> Self {
        Self {
            half_width: 8.0,
            nodes: 161,
        }
    }

    /// Rule used once per fading draw in the harness.
    pub fn realization() -> Self {
        Self {
            half_width: 6.0,
            nodes: 25,
        }
    }

    /// Nodes and weights for integrating against the standard normal density.
    fn gaussian_nodes<T: Real>(&self) -> Vec<(T, T)> {
        let n = self.nodes.max(3) | 1;
        let h = 2.0 * self.half_width / (n - 1) as f64;
        let norm = (2.0 * std::f64::consts::PI).sqrt();
        (0..n)
            .map(|i| {
                let z = -self.half_width + i as f64 * h;
                let simpson = if i == 0 || i == n - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                (T::lit(z), T::lit(simpson * h / 3.0 * (-0.5 * z * z).exp() / norm))
            })
            .collect()
    }
}

fn is_real_line<T: Real>(h13: Complex<T>, h23: Complex<T>) -> bool {
    h13.im == T::zero() && h23.im == T::zero()
}

/// Memoryless MSE by direct quadrature of the squared estimation error.
///
/// With real gains the imaginary noise component does not affect the
/// estimate and a one-dimensional rule is used; otherwise the rule is applied
/// on both axes.
pub fn f1_quadrature<T: Real>(h13: Complex<T>, h23: Complex<T>, sigma2: T, rule: &QuadratureRule) -> T {
    let geo = Geometry::new(h13, h23);
    let sigma = (sigma2 / T::lit(2.0)).sqrt();
    let nodes = rule.gaussian_nodes::<T>();
    if is_real_line(h13, h23) {
        nodes
            .iter()
            .map(|&(z, w)| w * geo.mean_squared_error(Complex::new(z, T::zero()), sigma, sigma2, h13, h23))
            .sum()
    } else {
        nodes
            .iter()
            .map(|&(zr, wr)| {
                nodes
                    .iter()
                    .map(|&(zi, wi)| wr * wi * geo.mean_squared_error(Complex::new(zr, zi), sigma, sigma2, h13, h23))
                    .sum::<T>()
            })
            .sum()
    }
}

/// `ln` of the memoryless MSE by quadrature of the posterior variance.
fn ln_f1_quadrature_variance<T: Real>(geo: &Geometry<T>, sigma2: T, nodes: &[(T, T)], real_line: bool) -> T {
    let sigma = sigma2.sqrt();
    // Nodes are per-dimension standard deviations; the helper takes unit-power complex noise.
    let unit = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    if real_line {
        log_sum_exp(
            nodes
                .iter()
                .map(|&(z, w)| w.ln() + geo.ln_mean_variance(Complex::new(z * unit, T::zero()), sigma, sigma2)),
        )
    } else {
        log_sum_exp(nodes.iter().flat_map(|&(zr, wr)| {
            nodes.iter().map(move |&(zi, wi)| {
                wr.ln() + wi.ln() + geo.ln_mean_variance(Complex::new(zr * unit, zi * unit), sigma, sigma2)
            })
        }))
    }
}

/// Memoryless MSE curve by quadrature, for a single channel realization.
///
/// Points past the first one where the rule can no longer resolve a strict
/// decrease are dropped.
pub fn f1_curve_quadrature<T: Real>(
    h13: Complex<T>,
    h23: Complex<T>,
    snr_grid_db: &[T],
    rule: &QuadratureRule,
) -> Result<MseCurve<T>> {
    let geo = Geometry::new(h13, h23);
    if geo.pairs.is_empty() {
        return Err(Error::Curve("degenerate constellation".into()));
    }
    let nodes = rule.gaussian_nodes::<T>();
    let real_line = is_real_line(h13, h23);
    let mut snr = Vec::new();
    let mut ln_mse: Vec<T> = Vec::new();
    for &s in snr_grid_db {
        let l = ln_f1_quadrature_variance(&geo, snr_db_to_sigma2(s), &nodes, real_line);
        if !l.is_finite() || ln_mse.last().is_some_and(|&prev| !(l < prev)) {
            break;
        }
        snr.push(s);
        ln_mse.push(l);
    }
    let n = snr.len();
    let curve = MseCurve {
        h13,
        h23,
        snr_db: snr,
        ln_mse,
        rel_std_err: vec![T::zero(); n],
        interpolation: Interpolation::LogLinear,
        source: CurveSource::Quadrature,
        cross_checks: Vec::new(),
    };
    curve.validate()?;
    Ok(curve)
}

/// Ascending grid `start, start + step, ...` up to and including `stop`.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| start + i as f64 * step).collect()
}
