#![allow(dead_code)]

use anc_relay::channel::{modulate_bpsk, uplink_superpose, ChannelRealization};
use anc_relay::ldpc::{derive_generator, encode, random_bits};
use anc_relay::message::{init_evidence, JointMessage};
use anc_relay::{Complex64, ParityCheckMatrix};
use rand::Rng;

pub type C = Complex64;

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Random cycle-free Tanner graph: each new check touches exactly one
/// existing variable and 1 to 3 fresh ones.
pub fn random_tree_code<R: Rng>(n: usize, rng: &mut R) -> ParityCheckMatrix {
    assert!(n >= 2);
    let mut rows = Vec::new();
    let mut count = 1;
    while count < n {
        let fresh = rng.random_range(1..=3).min(n - count);
        let mut row = vec![rng.random_range(0..count)];
        row.extend(count..count + fresh);
        count += fresh;
        rows.push(row);
    }
    ParityCheckMatrix::from_rows(n, rows).unwrap()
}

pub fn codewords(h: &ParityCheckMatrix) -> Vec<Vec<u8>> {
    let n = h.n();
    (0u32..1 << n)
        .map(|w| (0..n).map(|i| ((w >> i) & 1) as u8).collect::<Vec<u8>>())
        .filter(|x| h.is_codeword(x).unwrap())
        .collect()
}

/// Exact per-symbol joint posterior over all codeword pairs.
pub fn brute_force_posterior(h: &ParityCheckMatrix, evidence: &[JointMessage<f64>]) -> Vec<[f64; 4]> {
    let words = codewords(h);
    let n = h.n();
    let mut post = vec![[0.0; 4]; n];
    for a in &words {
        for b in &words {
            let w: f64 = (0..n).map(|v| evidence[v].get(a[v], b[v])).product();
            for v in 0..n {
                post[v][(2 * a[v] + b[v]) as usize] += w;
            }
        }
    }
    for p in &mut post {
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
    }
    post
}

/// Textbook binary sum-product in the probability domain, flooding schedule.
/// `prior[v]` is P(x_v = 1). Returns P(x_v = 1 | all) after each iteration.
pub fn binary_sum_product(h: &ParityCheckMatrix, prior: &[f64], iterations: usize) -> Vec<Vec<f64>> {
    let rows = h.rows();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (c, row) in rows.iter().enumerate() {
        for &v in row {
            edges.push((c, v));
        }
    }
    let mut v2c = vec![0.5; edges.len()];
    let mut c2v = vec![0.5; edges.len()];
    let mut history = Vec::new();
    for _ in 0..iterations {
        for (e, &(_, v)) in edges.iter().enumerate() {
            let (mut p1, mut p0) = (prior[v], 1.0 - prior[v]);
            for (o, &(_, w)) in edges.iter().enumerate() {
                if w == v && o != e {
                    p1 *= c2v[o];
                    p0 *= 1.0 - c2v[o];
                }
            }
            v2c[e] = p1 / (p0 + p1);
        }
        for (e, &(c, _)) in edges.iter().enumerate() {
            // P(odd parity among the other inputs) = (1 - prod(1 - 2p)) / 2.
            let prod: f64 = edges
                .iter()
                .enumerate()
                .filter(|&(o, &(d, _))| d == c && o != e)
                .map(|(o, _)| 1.0 - 2.0 * v2c[o])
                .product();
            c2v[e] = (1.0 - prod) / 2.0;
        }
        let belief = (0..h.n())
            .map(|v| {
                let (mut p1, mut p0) = (prior[v], 1.0 - prior[v]);
                for (o, &(_, w)) in edges.iter().enumerate() {
                    if w == v {
                        p1 *= c2v[o];
                        p0 *= 1.0 - c2v[o];
                    }
                }
                p1 / (p0 + p1)
            })
            .collect();
        history.push(belief);
    }
    history
}

pub struct Packet {
    pub x1: Vec<u8>,
    pub x2: Vec<u8>,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub r: Vec<C>,
}

/// Two random codewords of `h` sent over `ch`.
pub fn send<R: Rng>(h: &ParityCheckMatrix, ch: &ChannelRealization<f64>, rng: &mut R) -> Packet {
    let g = derive_generator(h);
    let x1 = encode(&g, &random_bits(g.info_len(), rng)).unwrap();
    let x2 = encode(&g, &random_bits(g.info_len(), rng)).unwrap();
    let a1 = modulate_bpsk(&x1);
    let a2 = modulate_bpsk(&x2);
    let r = uplink_superpose(&a1, &a2, ch, rng).unwrap();
    Packet { x1, x2, a1, a2, r }
}

pub fn evidence(r: &[C], ch: &ChannelRealization<f64>) -> Vec<JointMessage<f64>> {
    r.iter().map(|&y| init_evidence(y, ch.h13, ch.h23, ch.sigma2)).collect()
}
