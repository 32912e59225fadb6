//! Seeded Monte Carlo experiments comparing the relay schemes.
//!
//! A trial is one `(snr, code, packet)` triple. Each trial owns a ChaCha
//! stream derived from the master seed and the trial key, so results do not
//! depend on how trials are scheduled across threads. The channel draw is
//! keyed by `(snr, packet)` only and is shared by every code and scheme;
//! all schemes in a trial see the same received packet.

mod config;
mod report;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use config::{ChannelModel, CodeSpec, ExperimentConfig, Preset};
pub use report::{emit_csv, write_csv, CSV_HEADER};

use crate::baselines::{lmmse_gain, memoryless_mmse_packet, Scheme};
use crate::channel::{modulate_bpsk, sample_channel, snr_db_to_sigma2, uplink_superpose, ChannelRealization};
use crate::curve::{estimate_f1_curve, f1_curve_quadrature, snr_grid, MseCurve, QuadratureRule};
use crate::decoder::decode;
use crate::error::Result;
use crate::ldpc::{build_gallager_h, derive_generator, encode, random_bits, GeneratorMatrix, ParityCheckMatrix};
use crate::message::{hard_decide, init_evidence};
use crate::metrics::{mse_relay, prop1_bound, relay_ber, snr_improvement};

type C64 = Complex<f64>;

const CHANNEL_SLOT: u64 = 0xff;
const FIXED_H_SNR_SLOT: u64 = 0xffff;

/// Stream id of a trial: 16 bits of SNR index, 8 of code slot, 40 of packet.
pub fn trial_stream(snr_idx: usize, code_slot: u64, packet: usize) -> u64 {
    ((snr_idx as u64 & 0xffff) << 48) | ((code_slot & 0xff) << 40) | (packet as u64 & 0xff_ffff_ffff)
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Measurements of one scheme on one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub snr_db: f64,
    pub scheme: Scheme,
    pub code: CodeSpec,
    pub packet: usize,
    pub mse: f64,
    pub ber: f64,
    pub decoded1: bool,
    pub decoded2: bool,
    pub iterations: usize,
    /// Actual rate of the packet's code, `info_len / n`.
    pub rate: f64,
    pub h13: C64,
    pub h23: C64,
    /// ChaCha stream the trial was drawn from under the master seed.
    pub stream: u64,
}

/// Aggregate over the packets of one `(snr, code, scheme)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub snr_db: f64,
    pub scheme: Scheme,
    pub code: CodeSpec,
    pub packets: usize,
    pub mean_mse: f64,
    pub mean_ber: f64,
    /// SNR gain over the memoryless reference curve, when computed.
    pub delta_snr_db: Option<f64>,
    pub prop1_bound_db: f64,
    pub extrapolated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HarnessDiagnostics {
    /// Vanishing variable products across all joint decodes.
    pub contradictions: u64,
    /// Per-user count of joint decodes by the iteration at which the user
    /// first satisfied every check.
    pub success_iterations: BTreeMap<usize, u64>,
    /// Per-user joint decodes that never satisfied every check.
    pub failures: u64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<SummaryRow>,
    /// Memoryless reference curve for fixed channels, if ΔSNR was requested.
    pub curve: Option<MseCurve<f64>>,
    pub diagnostics: HarnessDiagnostics,
}

impl ExperimentOutput {
    pub fn summary(&self, snr_db: f64, code: CodeSpec, scheme: Scheme) -> Option<&SummaryRow> {
        self.summaries
            .iter()
            .find(|s| s.snr_db == snr_db && s.code == code && s.scheme == scheme)
    }
}

struct Code {
    h: ParityCheckMatrix,
    g: GeneratorMatrix,
}

impl Code {
    fn build<R: rand::Rng>(n: usize, degrees: CodeSpec, rng: &mut R) -> Result<Self> {
        let h = build_gallager_h(n, degrees.j, degrees.k, rng)?;
        let g = derive_generator(&h);
        Ok(Self { h, g })
    }
}

struct TrialOutput {
    records: Vec<TrialRecord>,
    contradictions: u64,
    success: [Option<usize>; 2],
    joint_ran: bool,
}

fn run_trial(
    cfg: &ExperimentConfig,
    fixed_codes: &[Option<Arc<Code>>],
    snr_idx: usize,
    code_idx: usize,
    packet: usize,
) -> Result<TrialOutput> {
    let snr_db = cfg.snr_db[snr_idx];
    let degrees = cfg.codes[code_idx];
    let sigma2 = snr_db_to_sigma2(snr_db);

    let (d13, d23) = cfg.channel.dists();
    let mut chan_rng = trial_rng(cfg.seed, trial_stream(snr_idx, CHANNEL_SLOT, packet));
    let h13 = sample_channel(&d13, &mut chan_rng);
    let h23 = sample_channel(&d23, &mut chan_rng);
    let ch = ChannelRealization::new(h13, h23, sigma2)?;

    let stream = trial_stream(snr_idx, code_idx as u64, packet);
    let mut rng = trial_rng(cfg.seed, stream);
    let code = match &fixed_codes[code_idx] {
        Some(code) => Arc::clone(code),
        None => Arc::new(Code::build(cfg.n, degrees, &mut rng)?),
    };
    let x1 = encode(&code.g, &random_bits(code.g.info_len(), &mut rng))?;
    let x2 = encode(&code.g, &random_bits(code.g.info_len(), &mut rng))?;
    let a1 = modulate_bpsk::<f64>(&x1);
    let a2 = modulate_bpsk::<f64>(&x2);
    let r = uplink_superpose(&a1, &a2, &ch, &mut rng)?;

    let symbolwise = || -> Result<(Vec<u8>, Vec<u8>, bool, bool)> {
        let (s1, s2): (Vec<u8>, Vec<u8>) = r
            .iter()
            .map(|&y| hard_decide(&init_evidence(y, h13, h23, sigma2)))
            .unzip();
        let d1 = code.h.is_codeword(&s1)?;
        let d2 = code.h.is_codeword(&s2)?;
        Ok((s1, s2, d1, d2))
    };

    let mut out = TrialOutput {
        records: Vec::with_capacity(cfg.schemes.len()),
        contradictions: 0,
        success: [None, None],
        joint_ran: false,
    };
    for &scheme in &cfg.schemes {
        let (x3, hard1, hard2, decoded1, decoded2, iterations) = match scheme {
            Scheme::JointBp => {
                let res = decode(&code.h, &r, &ch, cfg.max_iters)?;
                out.contradictions += res.diagnostics.contradictions;
                out.success = res.success_iteration;
                out.joint_ran = true;
                (res.relay_out, res.hard1, res.hard2, res.decoded1, res.decoded2, res.iterations)
            }
            Scheme::MemorylessMmse => {
                let (s1, s2, d1, d2) = symbolwise()?;
                (memoryless_mmse_packet(&r, h13, h23, sigma2).x3, s1, s2, d1, d2, 0)
            }
            Scheme::AmplifyForward => {
                // The forwarded signal is a fixed scaling of r; its MSE is
                // measured at the linear MMSE scaling, before power control.
                let beta = lmmse_gain(h13, h23, sigma2);
                let (s1, s2, d1, d2) = symbolwise()?;
                (r.iter().map(|&y| y * beta).collect(), s1, s2, d1, d2, 0)
            }
        };
        out.records.push(TrialRecord {
            snr_db,
            scheme,
            code: degrees,
            packet,
            mse: mse_relay(&x3, &a1, &a2, h13, h23)?,
            ber: relay_ber(&hard1, &hard2, &x1, &x2)?,
            decoded1,
            decoded2,
            iterations,
            rate: code.g.rate(),
            h13,
            h23,
            stream,
        });
    }
    Ok(out)
}

/// Grid of the fixed-channel reference curve: it must reach well past the
/// largest expected gain above the highest simulated SNR.
fn reference_grid(cfg: &ExperimentConfig) -> Vec<f64> {
    let lo = cfg.snr_db.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = cfg.snr_db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    snr_grid(lo - 6.0, hi + 14.0, 0.25)
}

/// Runs every trial of the configuration and aggregates the results.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;

    let fixed_codes: Vec<Option<Arc<Code>>> = cfg
        .codes
        .iter()
        .enumerate()
        .map(|(ci, &degrees)| {
            if cfg.regenerate_h {
                return Ok(None);
            }
            let mut rng = trial_rng(cfg.seed, trial_stream(FIXED_H_SNR_SLOT as usize, ci as u64, 0));
            Code::build(cfg.n, degrees, &mut rng).map(|c| Some(Arc::new(c)))
        })
        .collect::<Result<_>>()?;

    let keys: Vec<(usize, usize, usize)> = (0..cfg.snr_db.len())
        .flat_map(|si| (0..cfg.codes.len()).flat_map(move |ci| (0..cfg.packets).map(move |p| (si, ci, p))))
        .collect();
    let outputs: Vec<TrialOutput> = keys
        .par_iter()
        .map(|&(si, ci, p)| run_trial(cfg, &fixed_codes, si, ci, p))
        .collect::<Result<_>>()?;

    let mut diagnostics = HarnessDiagnostics::default();
    for o in outputs.iter().filter(|o| o.joint_ran) {
        diagnostics.contradictions += o.contradictions;
        for s in o.success {
            match s {
                Some(it) => *diagnostics.success_iterations.entry(it).or_default() += 1,
                None => diagnostics.failures += 1,
            }
        }
    }
    let records: Vec<TrialRecord> = outputs.into_iter().flat_map(|o| o.records).collect();

    let curve = match (&cfg.channel, cfg.f1_samples) {
        (_, 0) | (ChannelModel::Rayleigh { .. }, _) => None,
        (ChannelModel::Fixed { h13, h23 }, samples) => {
            Some(estimate_f1_curve(*h13, *h23, &reference_grid(cfg), samples, cfg.seed)?)
        }
    };
    let per_packet_delta = matches!(cfg.channel, ChannelModel::Rayleigh { .. }) && cfg.f1_samples > 0;
    let realization_curves = if per_packet_delta {
        realization_curves(cfg, &records)?
    } else {
        BTreeMap::new()
    };

    let mut summaries = Vec::new();
    for (si, &snr_db) in cfg.snr_db.iter().enumerate() {
        for &code in &cfg.codes {
            for &scheme in &cfg.schemes {
                let cell: Vec<&TrialRecord> = records
                    .iter()
                    .filter(|r| r.snr_db == snr_db && r.code == code && r.scheme == scheme)
                    .collect();
                let count = cell.len() as f64;
                let mean_mse = cell.iter().map(|r| r.mse).sum::<f64>() / count;
                let mean_ber = cell.iter().map(|r| r.ber).sum::<f64>() / count;
                let mean_rate = cell.iter().map(|r| r.rate).sum::<f64>() / count;
                let (delta_snr_db, extrapolated) = if let Some(curve) = &curve {
                    let d = snr_improvement(mean_mse, curve, snr_db);
                    (Some(d.delta_db), d.extrapolated)
                } else if per_packet_delta {
                    let mut flag = false;
                    let mut total = 0.0;
                    for r in &cell {
                        let d = match realization_curves.get(&(si, r.packet)) {
                            Some(c) => snr_improvement(r.mse, c, snr_db),
                            None => unreachable!("curve computed for every packet"),
                        };
                        flag |= d.extrapolated;
                        total += d.delta_db;
                    }
                    (Some(total / count), flag)
                } else {
                    (None, false)
                };
                summaries.push(SummaryRow {
                    snr_db,
                    scheme,
                    code,
                    packets: cell.len(),
                    mean_mse,
                    mean_ber,
                    delta_snr_db,
                    prop1_bound_db: prop1_bound(mean_rate)?,
                    extrapolated,
                });
            }
        }
    }

    Ok(ExperimentOutput {
        records,
        summaries,
        curve,
        diagnostics,
    })
}

/// One quadrature reference curve per `(snr, packet)` channel draw.
fn realization_curves(
    cfg: &ExperimentConfig,
    records: &[TrialRecord],
) -> Result<BTreeMap<(usize, usize), MseCurve<f64>>> {
    let mut draws: BTreeMap<(usize, usize), (f64, C64, C64)> = BTreeMap::new();
    for r in records {
        let si = cfg.snr_db.iter().position(|&s| s == r.snr_db).unwrap_or(0);
        draws.entry((si, r.packet)).or_insert((r.snr_db, r.h13, r.h23));
    }
    let rule = QuadratureRule::realization();
    let entries: Vec<_> = draws.into_iter().collect();
    entries
        .into_par_iter()
        .map(|(key, (snr, h13, h23))| {
            let grid = snr_grid(snr - 4.0, snr + 12.0, 1.0);
            f1_curve_quadrature(h13, h23, &grid, &rule).map(|c| (key, c))
        })
        .collect()
}
