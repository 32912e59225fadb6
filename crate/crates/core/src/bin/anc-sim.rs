use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use anc_relay::baselines::Scheme;
use anc_relay::sim::{emit_csv, run_experiment, ChannelModel, CodeSpec, ExperimentConfig, Preset};

/// Monte Carlo comparison of joint BP relaying against memoryless baselines.
#[derive(Parser, Debug)]
#[command(name = "anc-sim", version)]
struct Args {
    /// Start from a named setup: fig4 or fig5. Other flags override it.
    #[arg(long)]
    preset: Option<Preset>,

    /// Code degrees `J,K`; repeat for several codes.
    #[arg(long = "code")]
    codes: Vec<CodeSpec>,

    /// Block length.
    #[arg(long)]
    n: Option<usize>,

    /// Comma-separated SNR list in dB, or `START:STOP:STEP`.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<String>,

    /// Packets per (SNR, code) point.
    #[arg(long)]
    packets: Option<usize>,

    #[arg(long)]
    max_iters: Option<usize>,

    /// `fixed:H13,H23` or `rayleigh:VAR`.
    #[arg(long)]
    channel: Option<ChannelModel>,

    /// Comma-separated: joint_bp, memoryless_mmse, amplify_forward.
    #[arg(long)]
    scheme: Option<String>,

    #[arg(long)]
    seed: Option<u64>,

    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Samples per point of the reference curve; 0 disables ΔSNR.
    #[arg(long)]
    f1_samples: Option<usize>,

    /// Keep one parity-check matrix per code instead of one per packet.
    #[arg(long)]
    fixed_h: bool,

    /// Also write the fixed-channel reference curve as CSV.
    #[arg(long)]
    f1_out: Option<PathBuf>,
}

fn parse_snr_list(s: &str) -> Result<Vec<f64>, String> {
    let bad = |_| format!("bad SNR list {s:?}");
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|p| p.trim().parse().map_err(bad)).collect::<Result<_, _>>()?;
        if v[2] <= 0.0 || v[1] < v[0] {
            return Err(format!("bad SNR range {s:?}"));
        }
        return Ok(anc_relay::curve::snr_grid(v[0], v[1], v[2]));
    }
    s.split(',').map(|p| p.trim().parse().map_err(bad)).collect()
}

fn build_config(args: &Args) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::preset(args.preset.unwrap_or(Preset::Fig4));
    if !args.codes.is_empty() {
        cfg.codes = args.codes.clone();
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(s) = &args.snr_db {
        cfg.snr_db = parse_snr_list(s)?;
    }
    if let Some(p) = args.packets {
        cfg.packets = p;
    }
    if let Some(m) = args.max_iters {
        cfg.max_iters = m;
    }
    if let Some(c) = args.channel {
        cfg.channel = c;
    }
    if let Some(s) = &args.scheme {
        cfg.schemes = s
            .split(',')
            .map(|x| x.parse::<Scheme>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(f) = args.f1_samples {
        cfg.f1_samples = f;
    }
    cfg.regenerate_h = !args.fixed_h;
    cfg.out = args.out.clone();
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn run(args: Args) -> Result<(), String> {
    let cfg = build_config(&args)?;
    let out = run_experiment(&cfg).map_err(|e| e.to_string())?;

    println!(
        "{:>7}  {:<16} {:<6} {:>12} {:>10} {:>9} {:>9}",
        "snr_db", "scheme", "code", "mean_mse", "mean_ber", "dsnr_db", "bound_db"
    );
    for s in &out.summaries {
        let delta = match s.delta_snr_db {
            Some(d) if s.extrapolated => format!("{d:.3}*"),
            Some(d) => format!("{d:.3}"),
            None => "-".into(),
        };
        println!(
            "{:>7.2}  {:<16} {:<6} {:>12.4e} {:>10.4} {:>9} {:>9.3}",
            s.snr_db,
            s.scheme.as_str(),
            s.code.to_string(),
            s.mean_mse,
            s.mean_ber,
            delta,
            s.prop1_bound_db
        );
    }
    let d = &out.diagnostics;
    eprintln!(
        "contradictions: {}  undecoded users: {}  success iterations: {:?}",
        d.contradictions, d.failures, d.success_iterations
    );

    if let Some(path) = &cfg.out {
        emit_csv(&out.records, &out.summaries, path).map_err(|e| e.to_string())?;
    }
    if let Some(path) = &args.f1_out {
        let curve = out.curve.as_ref().ok_or("no reference curve: needs a fixed channel and --f1-samples > 0")?;
        let file = File::create(path).map_err(|e| e.to_string())?;
        curve.write_csv(file).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
