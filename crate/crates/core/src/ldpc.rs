//! Regular LDPC codes: Gallager parity-check construction, systematic
//! encoding over GF(2) and syndrome computation.
//!
//! Bits are carried as `u8` values in `{0, 1}`. Codeword positions always
//! follow the column order of the parity-check matrix.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{check_len, Error, Result};

/// Sparse binary parity-check matrix stored as row and column adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
    col_degree: usize,
    row_degree: usize,
}

impl ParityCheckMatrix {
    /// Builds a matrix with `n` columns from the variable indices of each check.
    ///
    /// Row lists are sorted; duplicate entries or out-of-range indices are
    /// rejected. The nominal degrees are the maximum column and row weights.
    pub fn from_rows(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut cols = vec![Vec::new(); n];
        let mut sorted_rows = Vec::with_capacity(rows.len());
        for (c, mut row) in rows.into_iter().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Construction(format!("check {c} repeats a variable")));
            }
            if let Some(&v) = row.iter().find(|&&v| v >= n) {
                return Err(Error::Construction(format!(
                    "check {c} references variable {v} >= n = {n}"
                )));
            }
            for &v in &row {
                cols[v].push(c);
            }
            sorted_rows.push(row);
        }
        let col_degree = cols.iter().map(Vec::len).max().unwrap_or(0);
        let row_degree = sorted_rows.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            n,
            rows: sorted_rows,
            cols,
            col_degree,
            row_degree,
        })
    }

    /// Builds a matrix from dense 0/1 rows.
    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self> {
        let n = dense.first().map_or(0, Vec::len);
        let rows = dense
            .iter()
            .map(|row| {
                check_len(n, row.len())?;
                Ok(row
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b != 0)
                    .map(|(v, _)| v)
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(n, rows)
    }

    /// Codeword length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parity checks.
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    /// Nominal column weight `j` (maximum column weight).
    pub fn col_degree(&self) -> usize {
        self.col_degree
    }

    /// Nominal row weight `k` (maximum row weight).
    pub fn row_degree(&self) -> usize {
        self.row_degree
    }

    /// Number of ones (Tanner graph edges).
    pub fn num_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// True when every column has weight `col_degree` and every row `row_degree`.
    pub fn is_regular(&self) -> bool {
        self.cols.iter().all(|c| c.len() == self.col_degree)
            && self.rows.iter().all(|r| r.len() == self.row_degree)
    }

    /// Parity of `x` over each check.
    pub fn syndrome(&self, x: &[u8]) -> Result<Vec<u8>> {
        check_len(self.n, x.len())?;
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &v| acc ^ (x[v] & 1)))
            .collect())
    }

    /// True if `x` satisfies every check.
    pub fn is_codeword(&self, x: &[u8]) -> Result<bool> {
        check_len(self.n, x.len())?;
        Ok(self
            .rows
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &v| acc ^ (x[v] & 1)) == 0))
    }

    /// Writes the matrix in MacKay's alist format (1-based, zero padded).
    pub fn write_alist<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.n, self.m())?;
        writeln!(w, "{} {}", self.col_degree, self.row_degree)?;
        let join = |it: &mut dyn Iterator<Item = usize>| {
            it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
        };
        writeln!(w, "{}", join(&mut self.cols.iter().map(Vec::len)))?;
        writeln!(w, "{}", join(&mut self.rows.iter().map(Vec::len)))?;
        for (lists, width) in [(&self.cols, self.col_degree), (&self.rows, self.row_degree)] {
            for list in lists {
                let padded = list
                    .iter()
                    .map(|&i| i + 1)
                    .chain(std::iter::repeat(0))
                    .take(width);
                writeln!(w, "{}", join(&mut padded.into_iter()))?;
            }
        }
        Ok(())
    }

    /// Parses an alist file. Column lists are checked against the row lists.
    pub fn read_alist<R: BufRead>(r: R) -> Result<Self> {
        let mut tokens = Vec::new();
        for line in r.lines() {
            for tok in line?.split_whitespace() {
                tokens.push(
                    tok.parse::<usize>()
                        .map_err(|e| Error::Alist(format!("{tok:?}: {e}")))?,
                );
            }
        }
        let mut it = tokens.into_iter();
        let mut next = || it.next().ok_or_else(|| Error::Alist("truncated".into()));
        let (n, m) = (next()?, next()?);
        let (max_col, max_row) = (next()?, next()?);
        let col_w = (0..n).map(|_| next()).collect::<Result<Vec<_>>>()?;
        let row_w = (0..m).map(|_| next()).collect::<Result<Vec<_>>>()?;
        let mut read_lists = |weights: &[usize], width: usize| -> Result<Vec<Vec<usize>>> {
            weights
                .iter()
                .map(|&w| {
                    let entries = (0..width).map(|_| next()).collect::<Result<Vec<_>>>()?;
                    let list: Vec<usize> = entries.into_iter().filter(|&e| e != 0).collect();
                    if list.len() != w {
                        return Err(Error::Alist(format!(
                            "declared weight {w}, found {} entries",
                            list.len()
                        )));
                    }
                    Ok(list.into_iter().map(|e| e - 1).collect())
                })
                .collect()
        };
        let cols = read_lists(&col_w, max_col)?;
        let rows = read_lists(&row_w, max_row)?;
        let h = Self::from_rows(n, rows)?;
        let mut cols_sorted = cols;
        cols_sorted.iter_mut().for_each(|c| c.sort_unstable());
        if cols_sorted != h.cols {
            return Err(Error::Alist("column lists disagree with row lists".into()));
        }
        Ok(h)
    }
}

/// Regular `(j, k)` parity-check matrix by Gallager's construction.
///
/// The first band of `n / k` rows covers consecutive blocks of `k` columns;
/// each further band is an independent random column permutation of the
/// first. No cycle removal is performed. With `j = 1` the result is the
/// repeat code pairing consecutive blocks.
pub fn build_gallager_h<R: Rng + ?Sized>(
    n: usize,
    j: usize,
    k: usize,
    rng: &mut R,
) -> Result<ParityCheckMatrix> {
    if j < 1 {
        return Err(Error::Construction(format!("column weight j = {j} must be >= 1")));
    }
    if k < 2 {
        return Err(Error::Construction(format!("row weight k = {k} must be >= 2")));
    }
    if n == 0 || !n.is_multiple_of(k) {
        return Err(Error::Construction(format!("row weight k = {k} must divide n = {n}")));
    }
    let band = n / k;
    let mut rows = Vec::with_capacity(j * band);
    let mut perm: Vec<usize> = (0..n).collect();
    for b in 0..j {
        if b > 0 {
            perm.shuffle(rng);
        }
        for r in 0..band {
            rows.push(perm[r * k..(r + 1) * k].to_vec());
        }
    }
    let h = ParityCheckMatrix::from_rows(n, rows)?;
    debug_assert!(h.is_regular());
    Ok(h)
}

const WORD: usize = 64;

fn words(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

fn get_bit(row: &[u64], i: usize) -> bool {
    (row[i / WORD] >> (i % WORD)) & 1 == 1
}

fn set_bit(row: &mut [u64], i: usize) {
    row[i / WORD] |= 1 << (i % WORD);
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    dst.iter_mut().zip(src).for_each(|(d, s)| *d ^= s);
}

fn pack(bits: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; words(bits.len())];
    for (i, &b) in bits.iter().enumerate() {
        if b & 1 == 1 {
            set_bit(&mut out, i);
        }
    }
    out
}

/// Dense systematic generator for the null space of a parity-check matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorMatrix {
    n: usize,
    info_len: usize,
    /// Row `i` holds the information bits that sum to codeword bit `i`.
    rows: Vec<Vec<u64>>,
    /// Codeword position of each information bit.
    systematic: Vec<usize>,
}

impl GeneratorMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of information bits, `n - rank(H)`.
    pub fn info_len(&self) -> usize {
        self.info_len
    }

    /// Actual code rate `info_len / n`.
    pub fn rate(&self) -> f64 {
        self.info_len as f64 / self.n as f64
    }

    /// Codeword positions carrying the information bits, in information order.
    pub fn systematic_positions(&self) -> &[usize] {
        &self.systematic
    }

    /// Entry `(i, t)` of the `n x info_len` generator.
    pub fn get(&self, i: usize, t: usize) -> u8 {
        u8::from(get_bit(&self.rows[i], t))
    }

    /// Reads the information bits back out of a codeword.
    pub fn extract_info(&self, x: &[u8]) -> Result<Vec<u8>> {
        check_len(self.n, x.len())?;
        Ok(self.systematic.iter().map(|&p| x[p] & 1).collect())
    }
}

/// Derives a generator by Gaussian elimination of `H` over GF(2).
///
/// `H` is reduced to row echelon form with column pivoting; non-pivot columns
/// carry the information bits. Rank-deficient matrices are accepted and give
/// `info_len > n - m`.
pub fn derive_generator(h: &ParityCheckMatrix) -> GeneratorMatrix {
    let n = h.n();
    let w = words(n);
    let mut dense: Vec<Vec<u64>> = h
        .rows()
        .iter()
        .map(|row| {
            let mut bits = vec![0u64; w];
            row.iter().for_each(|&v| set_bit(&mut bits, v));
            bits
        })
        .collect();

    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..dense.len()).find(|&r| get_bit(&dense[r], col)) else {
            continue;
        };
        dense.swap(rank, p);
        let (head, tail) = dense.split_at_mut(rank + 1);
        let (above, pivot_row) = head.split_at_mut(rank);
        let pivot_row = &pivot_row[0];
        for row in above.iter_mut().chain(tail.iter_mut()) {
            if get_bit(row, col) {
                xor_into(row, pivot_row);
            }
        }
        pivots.push(col);
        rank += 1;
    }

    let mut is_pivot = vec![false; n];
    pivots.iter().for_each(|&c| is_pivot[c] = true);
    let systematic: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    let info_len = systematic.len();
    let iw = words(info_len);

    let mut rows = vec![vec![0u64; iw]; n];
    for (t, &c) in systematic.iter().enumerate() {
        set_bit(&mut rows[c], t);
    }
    // Pivot variable of row r equals the sum of the free variables present in row r.
    for (r, &pc) in pivots.iter().enumerate() {
        for (t, &c) in systematic.iter().enumerate() {
            if get_bit(&dense[r], c) {
                set_bit(&mut rows[pc], t);
            }
        }
    }

    GeneratorMatrix {
        n,
        info_len,
        rows,
        systematic,
    }
}

/// Codeword `x = G s` over GF(2).
pub fn encode(g: &GeneratorMatrix, s: &[u8]) -> Result<Vec<u8>> {
    check_len(g.info_len, s.len())?;
    let packed = pack(s);
    Ok(g.rows
        .iter()
        .map(|row| {
            let ones: u32 = row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
            (ones & 1) as u8
        })
        .collect())
}

/// Uniform i.i.d. bits.
pub fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<u8> {
    (0..len).map(|_| u8::from(rng.random::<bool>())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn repeat_code() -> ParityCheckMatrix {
        ParityCheckMatrix::from_dense(&[vec![1, 1, 0, 0], vec![0, 0, 1, 1]]).unwrap()
    }

    #[test]
    fn full_length_36_code_is_regular() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = build_gallager_h(1800, 3, 6, &mut rng).unwrap();
        assert_eq!((h.m(), h.n()), (900, 1800));
        assert!(h.cols().iter().all(|c| c.len() == 3));
        assert!(h.rows().iter().all(|r| r.len() == 6));
    }

    #[test]
    fn j1_k2_is_the_identity_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = build_gallager_h(4, 1, 2, &mut rng).unwrap();
        assert_eq!(h.rows(), &[vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn degree_counts_by_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = build_gallager_h(12, 2, 4, &mut rng).unwrap();
        assert_eq!(h.m(), 6);
        let mut dense = vec![vec![0u8; 12]; 6];
        for (c, row) in h.rows().iter().enumerate() {
            for &v in row {
                dense[c][v] += 1;
            }
        }
        for row in &dense {
            assert_eq!(row.iter().map(|&b| b as usize).sum::<usize>(), 4);
        }
        for v in 0..12 {
            assert_eq!(dense.iter().map(|row| row[v] as usize).sum::<usize>(), 2);
        }
        // Transposition consistency.
        for (v, col) in h.cols().iter().enumerate() {
            for &c in col {
                assert!(h.rows()[c].contains(&v));
            }
        }
    }

    #[test]
    fn construction_rejects_bad_degrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(build_gallager_h(10, 3, 6, &mut rng).is_err());
        assert!(build_gallager_h(12, 0, 6, &mut rng).is_err());
        assert!(build_gallager_h(12, 2, 1, &mut rng).is_err());
    }

    #[test]
    fn same_seed_same_matrix() {
        let a = build_gallager_h(120, 3, 6, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        let b = build_gallager_h(120, 3, 6, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn repeat_code_generator_enumerates_four_codewords() {
        let h = repeat_code();
        let g = derive_generator(&h);
        assert_eq!(g.info_len(), 2);
        let mut words: Vec<Vec<u8>> = [[0, 0], [0, 1], [1, 0], [1, 1]]
            .iter()
            .map(|s| encode(&g, s).unwrap())
            .collect();
        words.sort();
        assert_eq!(
            words,
            vec![vec![0, 0, 0, 0], vec![0, 0, 1, 1], vec![1, 1, 0, 0], vec![1, 1, 1, 1]]
        );
        // s = (1, 0) sets exactly one of the two repeated pairs.
        let x = encode(&g, &[1, 0]).unwrap();
        assert_eq!(x.iter().filter(|&&b| b == 1).count(), 2);
        assert_eq!(x[0], x[1]);
        assert_eq!(x[2], x[3]);
    }

    #[test]
    fn duplicated_row_raises_info_len() {
        let h = ParityCheckMatrix::from_dense(&[
            vec![1, 1, 0, 1, 0, 0],
            vec![0, 1, 1, 0, 1, 0],
            vec![1, 1, 0, 1, 0, 0],
        ])
        .unwrap();
        let g = derive_generator(&h);
        assert_eq!(g.info_len(), 6 - 3 + 1);
    }

    #[test]
    fn all_zero_encodes_to_all_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = build_gallager_h(60, 3, 6, &mut rng).unwrap();
        let g = derive_generator(&h);
        let x = encode(&g, &vec![0; g.info_len()]).unwrap();
        assert!(x.iter().all(|&b| b == 0));
    }

    #[test]
    fn random_messages_satisfy_all_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = build_gallager_h(240, 3, 6, &mut rng).unwrap();
        let g = derive_generator(&h);
        assert!(g.info_len() >= 240 - h.m());
        for _ in 0..100 {
            let s = random_bits(g.info_len(), &mut rng);
            let x = encode(&g, &s).unwrap();
            assert!(h.syndrome(&x).unwrap().iter().all(|&b| b == 0));
            assert_eq!(g.extract_info(&x).unwrap(), s);
        }
    }

    #[test]
    fn single_flip_trips_j_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = build_gallager_h(120, 3, 6, &mut rng).unwrap();
        let g = derive_generator(&h);
        let mut x = encode(&g, &random_bits(g.info_len(), &mut rng)).unwrap();
        x[17] ^= 1;
        let weight = h.syndrome(&x).unwrap().iter().filter(|&&b| b == 1).count();
        assert_eq!(weight, 3);
    }

    #[test]
    fn length_mismatches_are_errors() {
        let h = repeat_code();
        let g = derive_generator(&h);
        assert!(matches!(
            h.syndrome(&[0, 1]),
            Err(Error::LengthMismatch { expected: 4, actual: 2 })
        ));
        assert!(encode(&g, &[1, 0, 1]).is_err());
    }

    #[test]
    fn alist_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = build_gallager_h(24, 2, 4, &mut rng).unwrap();
        let mut buf = Vec::new();
        h.write_alist(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("24 12\n2 4\n"));
        let back = ParityCheckMatrix::read_alist(buf.as_slice()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn from_rows_rejects_repeats() {
        assert!(ParityCheckMatrix::from_rows(4, vec![vec![1, 1]]).is_err());
        assert!(ParityCheckMatrix::from_rows(4, vec![vec![0, 4]]).is_err());
    }
}
