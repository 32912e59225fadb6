//! Joint belief propagation over the virtual 4-ary code formed by two
//! codewords of the same LDPC code.
//!
//! Each Tanner graph variable carries the pair `(x1[k], x2[k])`; every check
//! constrains the XOR of both components. Messages live in the linear domain
//! and are renormalized after each update. The schedule is flooding: one
//! iteration updates every variable-to-check message, then every
//! check-to-variable message.
//!
//! When a user's hard decisions satisfy all checks, its decisions are folded
//! into the evidence and every edge message touching each variable, which
//! freezes that user's decisions for the rest of the run.

use num_complex::Complex;

use crate::channel::ChannelRealization;
use crate::error::{check_len, Error, Result};
use crate::ldpc::ParityCheckMatrix;
use crate::message::{chk_update, clamp_user, hard_decide, init_evidence, relay_mmse_output, JointMessage, User};
use crate::scalar::Real;

/// Default iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 20;

/// Counters exposed to the experiment harness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// Variable products that vanished and were replaced by the uniform message.
    pub contradictions: u64,
}

/// Message state of one decoding run.
#[derive(Debug, Clone)]
pub struct JointBpDecoder<'h, T> {
    h: &'h ParityCheckMatrix,
    /// Edge ids of each variable; edges are numbered in check (row) order.
    var_edges: Vec<Vec<usize>>,
    /// First edge id of each check, plus a final sentinel.
    check_offsets: Vec<usize>,
    evidence: Vec<JointMessage<T>>,
    v2c: Vec<JointMessage<T>>,
    c2v: Vec<JointMessage<T>>,
    decided: [Option<Vec<u8>>; 2],
    iterations: usize,
    diagnostics: Diagnostics,
}

impl<'h, T: Real> JointBpDecoder<'h, T> {
    /// Sets up the graph with the given per-symbol evidence and every edge
    /// message uniform.
    pub fn new(h: &'h ParityCheckMatrix, evidence: Vec<JointMessage<T>>) -> Result<Self> {
        check_len(h.n(), evidence.len())?;
        let mut var_edges = vec![Vec::new(); h.n()];
        let mut check_offsets = Vec::with_capacity(h.m() + 1);
        let mut e = 0;
        for row in h.rows() {
            check_offsets.push(e);
            for &v in row {
                var_edges[v].push(e);
                e += 1;
            }
        }
        check_offsets.push(e);
        Ok(Self {
            h,
            var_edges,
            check_offsets,
            evidence,
            v2c: vec![JointMessage::uniform(); e],
            c2v: vec![JointMessage::uniform(); e],
            decided: [None, None],
            iterations: 0,
            diagnostics: Diagnostics::default(),
        })
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }

    pub fn evidence(&self) -> &[JointMessage<T>] {
        &self.evidence
    }

    /// Variable-to-check messages, by edge id.
    pub fn var_to_check(&self) -> &[JointMessage<T>] {
        &self.v2c
    }

    /// Check-to-variable messages, by edge id.
    pub fn check_to_var(&self) -> &[JointMessage<T>] {
        &self.c2v
    }

    /// Decisions frozen for `user`, if it has been clamped.
    pub fn decided(&self, user: User) -> Option<&[u8]> {
        self.decided[user.index()].as_deref()
    }

    fn product_or_uniform(&mut self, acc: JointMessage<T>) -> JointMessage<T> {
        acc.normalized().unwrap_or_else(|| {
            self.diagnostics.contradictions += 1;
            JointMessage::uniform()
        })
    }

    /// One flooding iteration.
    pub fn iterate(&mut self) {
        for v in 0..self.var_edges.len() {
            for i in 0..self.var_edges[v].len() {
                let edges = &self.var_edges[v];
                let out = edges
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .fold(self.evidence[v], |acc, (_, &e)| acc.pointwise_mul(&self.c2v[e]));
                let e = self.var_edges[v][i];
                self.v2c[e] = self.product_or_uniform(out);
            }
        }

        let mut scratch = Vec::with_capacity(self.h.row_degree());
        for c in 0..self.h.m() {
            let (lo, hi) = (self.check_offsets[c], self.check_offsets[c + 1]);
            for e in lo..hi {
                scratch.clear();
                scratch.extend((lo..hi).filter(|&o| o != e).map(|o| self.v2c[o]));
                self.c2v[e] = chk_update(&scratch);
            }
        }
        self.iterations += 1;
    }

    /// Posterior of each symbol: evidence times every incoming check message.
    pub fn beliefs(&mut self) -> Vec<JointMessage<T>> {
        (0..self.var_edges.len())
            .map(|v| {
                let acc = self.var_edges[v]
                    .iter()
                    .fold(self.evidence[v], |acc, &e| acc.pointwise_mul(&self.c2v[e]));
                self.product_or_uniform(acc)
            })
            .collect()
    }

    /// Freezes `user` to the given decisions on the evidence and all edges.
    pub fn clamp(&mut self, user: User, bits: &[u8]) -> Result<()> {
        check_len(self.evidence.len(), bits.len())?;
        for (v, &bit) in bits.iter().enumerate() {
            self.evidence[v] = clamp_user(&self.evidence[v], user, bit);
            for &e in &self.var_edges[v] {
                self.v2c[e] = clamp_user(&self.v2c[e], user, bit);
                self.c2v[e] = clamp_user(&self.c2v[e], user, bit);
            }
        }
        self.decided[user.index()] = Some(bits.to_vec());
        Ok(())
    }
}

/// Outcome of decoding one received packet.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult<T> {
    /// Per-symbol posterior at the final iteration.
    pub beliefs: Vec<JointMessage<T>>,
    pub decoded1: bool,
    pub decoded2: bool,
    pub iterations: usize,
    /// Hard decisions; for a decoded user these are the frozen decisions.
    pub hard1: Vec<u8>,
    pub hard2: Vec<u8>,
    /// Iteration at which each user first satisfied every check.
    pub success_iteration: [Option<usize>; 2],
    /// Broadcast symbols, the posterior mean of `h13 u1 + h23 u2`.
    pub relay_out: Vec<Complex<T>>,
    pub diagnostics: Diagnostics,
}

impl<T> DecodeResult<T> {
    pub fn decoded(&self, user: User) -> bool {
        match user {
            User::One => self.decoded1,
            User::Two => self.decoded2,
        }
    }
}

/// Runs the joint decoder on one received packet.
///
/// After each iteration the beliefs are hard-decided and each undecoded
/// user's decisions are tested against `H`; a user that passes is clamped.
/// Decoding stops once both users pass or after `max_iters` iterations. The
/// relay output is computed from the beliefs of the last iteration.
pub fn decode<T: Real>(
    h: &ParityCheckMatrix,
    r: &[Complex<T>],
    ch: &ChannelRealization<T>,
    max_iters: usize,
) -> Result<DecodeResult<T>> {
    if max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
    }
    check_len(h.n(), r.len())?;
    let evidence = r
        .iter()
        .map(|&y| init_evidence(y, ch.h13, ch.h23, ch.sigma2))
        .collect();
    let mut dec = JointBpDecoder::new(h, evidence)?;
    let mut success_iteration = [None, None];
    let mut beliefs;
    loop {
        dec.iterate();
        beliefs = dec.beliefs();
        let (hard1, hard2): (Vec<u8>, Vec<u8>) = beliefs.iter().map(hard_decide).unzip();
        for (user, hard) in User::BOTH.into_iter().zip([hard1, hard2]) {
            if dec.decided(user).is_none() && h.is_codeword(&hard)? {
                dec.clamp(user, &hard)?;
                success_iteration[user.index()] = Some(dec.iterations());
            }
        }
        let done = User::BOTH.iter().all(|&u| dec.decided(u).is_some());
        if done || dec.iterations() >= max_iters {
            break;
        }
    }

    let (soft1, soft2): (Vec<u8>, Vec<u8>) = beliefs.iter().map(hard_decide).unzip();
    let hard1 = dec.decided(User::One).map_or(soft1, <[u8]>::to_vec);
    let hard2 = dec.decided(User::Two).map_or(soft2, <[u8]>::to_vec);
    let relay_out = relay_mmse_output(&beliefs, ch.h13, ch.h23);
    Ok(DecodeResult {
        decoded1: success_iteration[0].is_some(),
        decoded2: success_iteration[1].is_some(),
        iterations: dec.iterations(),
        hard1,
        hard2,
        success_iteration,
        relay_out,
        diagnostics: dec.diagnostics(),
        beliefs,
    })
}
