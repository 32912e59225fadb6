use std::collections::BTreeMap;

use anc_relay::sim::{run_experiment, write_csv, ChannelModel, CodeSpec, ExperimentConfig, CSV_HEADER};
use anc_relay::Scheme;

fn small() -> ExperimentConfig {
    ExperimentConfig {
        codes: vec![CodeSpec::new(1, 2), CodeSpec::new(2, 4)],
        n: 96,
        snr_db: vec![-1.0, 2.0, 5.0],
        packets: 4,
        max_iters: 20,
        channel: ChannelModel::fixed(1.0, 1.0),
        schemes: vec![Scheme::JointBp, Scheme::MemorylessMmse, Scheme::AmplifyForward],
        seed: 5,
        out: None,
        f1_samples: 2000,
        regenerate_h: true,
    }
}

fn csv_bytes(cfg: &ExperimentConfig) -> Vec<u8> {
    let out = run_experiment(cfg).unwrap();
    let mut buf = Vec::new();
    write_csv(&out.records, &out.summaries, &mut buf).unwrap();
    buf
}

#[test]
fn same_seed_gives_identical_csv() {
    let cfg = small();
    assert_eq!(csv_bytes(&cfg), csv_bytes(&cfg));
    let mut other = cfg.clone();
    other.seed = 6;
    assert_ne!(csv_bytes(&cfg), csv_bytes(&other));
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = small();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| csv_bytes(&cfg))
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn two_records_round_trip() {
    let mut cfg = small();
    cfg.codes = vec![CodeSpec::new(1, 2)];
    cfg.snr_db = vec![3.0];
    cfg.packets = 2;
    cfg.schemes = vec![Scheme::JointBp];
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.records.len(), 2);
    let mut buf = Vec::new();
    write_csv(&out.records, &out.summaries, &mut buf).unwrap();

    let mut reader = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[0][0], "detail");
    assert_eq!(&rows[0][2], "joint_bp");
    assert_eq!(&rows[0][3], "(1,2)");
    assert_eq!(rows[1][5].parse::<f64>().unwrap(), out.records[1].mse);
    assert_eq!(&rows[2][0], "summary");
    assert!(rows[2][18].parse::<f64>().is_ok());
}

#[test]
fn summary_means_match_detail_rows() {
    let cfg = small();
    let out = run_experiment(&cfg).unwrap();
    let mut buf = Vec::new();
    write_csv(&out.records, &out.summaries, &mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let mut sums: BTreeMap<(String, String, String), (f64, f64, usize)> = BTreeMap::new();
    let mut summaries = Vec::new();
    for row in reader.records() {
        let row = row.unwrap();
        let key = (row[1].to_string(), row[2].to_string(), row[3].to_string());
        if &row[0] == "detail" {
            let e = sums.entry(key).or_default();
            e.0 += row[5].parse::<f64>().unwrap();
            e.1 += row[6].parse::<f64>().unwrap();
            e.2 += 1;
        } else {
            summaries.push((key, row[16].parse::<f64>().unwrap(), row[17].parse::<f64>().unwrap()));
        }
    }
    assert_eq!(summaries.len(), 3 * 2 * 3);
    for (key, mean_mse, mean_ber) in summaries {
        let (mse, ber, count) = sums[&key];
        assert_eq!(count, cfg.packets);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-11 * a.abs().max(b.abs()).max(1e-300);
        assert!(close(mse / count as f64, mean_mse), "{key:?}");
        assert!(close(ber / count as f64, mean_ber), "{key:?}");
    }
}

#[test]
fn joint_decoding_never_loses_to_memoryless_on_average() {
    let mut cfg = small();
    cfg.packets = 10;
    cfg.n = 240;
    cfg.codes = vec![CodeSpec::new(1, 2), CodeSpec::new(3, 6)];
    let out = run_experiment(&cfg).unwrap();
    for &snr in &cfg.snr_db {
        for &code in &cfg.codes {
            let joint = out.summary(snr, code, Scheme::JointBp).unwrap();
            let mem = out.summary(snr, code, Scheme::MemorylessMmse).unwrap();
            assert!(joint.mean_mse <= mem.mean_mse, "{snr} dB {code}");
        }
    }
}

#[test]
fn repeat_code_gain_is_near_three_db() {
    let mut cfg = small();
    cfg.codes = vec![CodeSpec::new(1, 2)];
    cfg.schemes = vec![Scheme::JointBp];
    cfg.n = 600;
    cfg.packets = 40;
    cfg.snr_db = vec![0.0];
    cfg.f1_samples = 20_000;
    let out = run_experiment(&cfg).unwrap();
    let d = out.summaries[0].delta_snr_db.unwrap();
    assert!((d - 3.01).abs() < 0.3, "{d}");
}

#[test]
fn emit_csv_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let mut cfg = small();
    cfg.packets = 1;
    let out = run_experiment(&cfg).unwrap();
    anc_relay::sim::emit_csv(&out.records, &out.summaries, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("kind,snr_db,scheme,code,packet,mse"));
    assert_eq!(text.lines().count(), 1 + out.records.len() + out.summaries.len());
    assert!(write_csv(&[], &[], Vec::new()).is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = small();
    cfg.n = 97;
    assert!(run_experiment(&cfg).is_err());
    let mut cfg = small();
    cfg.schemes.clear();
    assert!(run_experiment(&cfg).is_err());
}
