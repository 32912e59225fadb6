use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex;

use crate::baselines::Scheme;
use crate::channel::ChannelDist;
use crate::curve::snr_grid;
use crate::decoder::DEFAULT_MAX_ITERS;
use crate::error::{Error, Result};

/// Column and row degrees of a regular Gallager code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodeSpec {
    pub j: usize,
    pub k: usize,
}

impl CodeSpec {
    pub const fn new(j: usize, k: usize) -> Self {
        Self { j, k }
    }

    /// Design rate `1 - j/k`.
    pub fn design_rate(self) -> f64 {
        1.0 - self.j as f64 / self.k as f64
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.k)
    }
}

impl FromStr for CodeSpec {
    type Err = Error;

    /// Accepts `J,K` with optional surrounding parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("code must be J,K, got {s:?}"));
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (j, k) = inner.split_once(',').ok_or_else(bad)?;
        let j = j.trim().parse().map_err(|_| bad())?;
        let k = k.trim().parse().map_err(|_| bad())?;
        Ok(Self { j, k })
    }
}

/// Uplink channel model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    Fixed { h13: Complex<f64>, h23: Complex<f64> },
    /// Independent Rayleigh coefficients, redrawn for every packet.
    Rayleigh { variance: f64 },
}

impl ChannelModel {
    pub fn fixed(h13: f64, h23: f64) -> Self {
        ChannelModel::Fixed {
            h13: Complex::new(h13, 0.0),
            h23: Complex::new(h23, 0.0),
        }
    }

    pub(crate) fn dists(&self) -> (ChannelDist<f64>, ChannelDist<f64>) {
        match *self {
            ChannelModel::Fixed { h13, h23 } => (ChannelDist::Fixed(h13), ChannelDist::Fixed(h23)),
            ChannelModel::Rayleigh { variance } => {
                (ChannelDist::Rayleigh { variance }, ChannelDist::Rayleigh { variance })
            }
        }
    }
}

impl FromStr for ChannelModel {
    type Err = Error;

    /// `fixed:H13,H23` (real gains) or `rayleigh:VAR`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("channel must be fixed:H13,H23 or rayleigh:VAR, got {s:?}"));
        let (kind, args) = s.trim().split_once(':').ok_or_else(bad)?;
        match kind {
            "fixed" => {
                let (a, b) = args.split_once(',').ok_or_else(bad)?;
                let h13 = a.trim().parse().map_err(|_| bad())?;
                let h23 = b.trim().parse().map_err(|_| bad())?;
                Ok(Self::fixed(h13, h23))
            }
            "rayleigh" => Ok(ChannelModel::Rayleigh {
                variance: args.trim().parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Named reference setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Equal unit gains, 100 packets per point.
    Fig4,
    /// Rayleigh fading, 1000 packets per point.
    Fig5,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            other => Err(Error::Config(format!("unknown preset {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub codes: Vec<CodeSpec>,
    /// Block length.
    pub n: usize,
    pub snr_db: Vec<f64>,
    /// Packets per `(snr, code)` point.
    pub packets: usize,
    pub max_iters: usize,
    pub channel: ChannelModel,
    pub schemes: Vec<Scheme>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Monte Carlo samples per point of the fixed-channel reference curve.
    /// Zero skips ΔSNR entirely.
    pub f1_samples: usize,
    /// Draw a fresh parity-check matrix for every packet.
    pub regenerate_h: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::preset(Preset::Fig4)
    }
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let fig4 = Self {
            codes: vec![CodeSpec::new(1, 2), CodeSpec::new(2, 4), CodeSpec::new(3, 6)],
            n: 1800,
            snr_db: snr_grid(-4.0, 8.0, 1.0),
            packets: 100,
            max_iters: DEFAULT_MAX_ITERS,
            channel: ChannelModel::fixed(1.0, 1.0),
            schemes: vec![Scheme::JointBp, Scheme::MemorylessMmse],
            seed: 1,
            out: None,
            f1_samples: 20_000,
            regenerate_h: true,
        };
        match preset {
            Preset::Fig4 => fig4,
            Preset::Fig5 => Self {
                channel: ChannelModel::Rayleigh { variance: 1.0 },
                packets: 1000,
                ..fig4
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.codes.is_empty() || self.schemes.is_empty() || self.snr_db.is_empty() {
            return fail("need at least one code, scheme and SNR".into());
        }
        if self.codes.len() > 0xfe {
            return fail(format!("at most 254 codes, got {}", self.codes.len()));
        }
        if self.snr_db.len() > 0xfffe {
            return fail("too many SNR points".into());
        }
        for c in &self.codes {
            if c.j == 0 || c.k <= c.j || !self.n.is_multiple_of(c.k) {
                return fail(format!("code {c} invalid for n = {}", self.n));
            }
        }
        if self.packets == 0 || self.max_iters == 0 {
            return fail("packets and max_iters must be positive".into());
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return fail("SNR values must be finite".into());
        }
        let mut sorted = self.snr_db.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return fail("duplicate SNR values".into());
        }
        let mut schemes = self.schemes.clone();
        schemes.sort();
        schemes.dedup();
        if schemes.len() != self.schemes.len() {
            return fail("duplicate schemes".into());
        }
        if let ChannelModel::Rayleigh { variance } = self.channel {
            if !(variance > 0.0 && variance.is_finite()) {
                return fail(format!("Rayleigh variance {variance} must be positive"));
            }
        }
        Ok(())
    }
}
