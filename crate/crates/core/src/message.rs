//! Joint messages over the symbol pair `(x1, x2)` and the local rules of the
//! 4-ary belief propagation decoder.
//!
//! Entries are ordered `p00, p01, p10, p11`, so index `2 * x1 + x2`.

use num_complex::Complex;

use crate::scalar::Real;

/// Which end node a decision refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum User {
    One,
    Two,
}

impl User {
    pub const BOTH: [User; 2] = [User::One, User::Two];

    pub fn index(self) -> usize {
        match self {
            User::One => 0,
            User::Two => 1,
        }
    }
}

/// Probability vector over the four pairs `(x1, x2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointMessage<T>(pub [T; 4]);

impl<T: Real> JointMessage<T> {
    pub fn uniform() -> Self {
        Self([T::lit(0.25); 4])
    }

    /// All mass on `(x1, x2)`.
    pub fn point(x1: u8, x2: u8) -> Self {
        let mut p = [T::zero(); 4];
        p[pair_index(x1, x2)] = T::one();
        Self(p)
    }

    /// Normalizes arbitrary nonnegative weights. `None` when they sum to zero
    /// or are not finite.
    pub fn from_weights(w: [T; 4]) -> Option<Self> {
        Self(w).normalized()
    }

    pub fn probs(&self) -> &[T; 4] {
        &self.0
    }

    pub fn get(&self, x1: u8, x2: u8) -> T {
        self.0[pair_index(x1, x2)]
    }

    pub fn sum(&self) -> T {
        self.0.iter().copied().sum()
    }

    pub fn normalized(self) -> Option<Self> {
        let s = self.sum();
        if s > T::zero() && s.is_finite() {
            Some(Self(self.0.map(|p| p / s)))
        } else {
            None
        }
    }

    /// Componentwise product, not normalized.
    pub fn pointwise_mul(self, other: &Self) -> Self {
        let mut p = self.0;
        p.iter_mut().zip(&other.0).for_each(|(a, &b)| *a = *a * b);
        Self(p)
    }

    /// XOR convolution over GF(2)^2: `g[s] = sum_t p[t] q[t ^ s]`.
    pub fn xor_conv(&self, other: &Self) -> Self {
        let (p, q) = (&self.0, &other.0);
        let mut g = [T::zero(); 4];
        for (s, gs) in g.iter_mut().enumerate() {
            *gs = (0..4).map(|t| p[t] * q[t ^ s]).sum();
        }
        Self(g)
    }

    /// `(P(x1 = 0), P(x1 = 1))`.
    pub fn marginal_user1(&self) -> (T, T) {
        let p = &self.0;
        (p[0] + p[1], p[2] + p[3])
    }

    /// `(P(x2 = 0), P(x2 = 1))`.
    pub fn marginal_user2(&self) -> (T, T) {
        let p = &self.0;
        (p[0] + p[2], p[1] + p[3])
    }

    pub fn marginal(&self, user: User) -> (T, T) {
        match user {
            User::One => self.marginal_user1(),
            User::Two => self.marginal_user2(),
        }
    }

    /// Entries nonnegative and summing to one within `tol`.
    pub fn is_valid(&self, tol: T) -> bool {
        self.0.iter().all(|&p| p >= T::zero() && p.is_finite()) && (self.sum() - T::one()).abs() <= tol
    }
}

#[inline]
fn pair_index(x1: u8, x2: u8) -> usize {
    2 * (x1 & 1) as usize + (x2 & 1) as usize
}

/// The four noiseless received points `h13 (1 - 2 x1) + h23 (1 - 2 x2)` in
/// message order.
pub fn constellation<T: Real>(h13: Complex<T>, h23: Complex<T>) -> [Complex<T>; 4] {
    [h13 + h23, h13 - h23, -h13 + h23, -h13 - h23]
}

/// Channel evidence for one received sample:
/// `p_ij ∝ exp(-|r - c_ij|^2 / sigma2)`.
///
/// Exponents are shifted by their maximum before exponentiation, so at least
/// one entry is exactly representable and the result never underflows to an
/// all-zero vector.
pub fn init_evidence<T: Real>(r: Complex<T>, h13: Complex<T>, h23: Complex<T>, sigma2: T) -> JointMessage<T> {
    evidence_from_points(r, &constellation(h13, h23), sigma2)
}

pub(crate) fn evidence_from_points<T: Real>(r: Complex<T>, points: &[Complex<T>; 4], sigma2: T) -> JointMessage<T> {
    let logl = points.map(|c| -(r - c).norm_sqr() / sigma2);
    let max = logl.iter().copied().fold(T::neg_infinity(), T::max);
    if !max.is_finite() {
        return nearest_point(r, points);
    }
    JointMessage::from_weights(logl.map(|l| (l - max).exp())).unwrap_or_else(|| nearest_point(r, points))
}

fn nearest_point<T: Real>(r: Complex<T>, points: &[Complex<T>; 4]) -> JointMessage<T> {
    let best = (0..4)
        .min_by(|&a, &b| {
            (r - points[a])
                .norm_sqr()
                .partial_cmp(&(r - points[b]).norm_sqr())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    let mut p = [T::zero(); 4];
    p[best] = T::one();
    JointMessage(p)
}

/// Variable node rule: normalized componentwise product of the inputs.
///
/// Returns `None` when the product vanishes (contradictory inputs); the
/// decoder substitutes the uniform message and counts the event.
pub fn var_update<T: Real>(inputs: &[JointMessage<T>]) -> Option<JointMessage<T>> {
    inputs
        .iter()
        .fold(JointMessage([T::one(); 4]), |acc, m| acc.pointwise_mul(m))
        .normalized()
}

/// Check node rule: left fold of the XOR convolution over the inputs.
///
/// An empty input is the point mass at `(0, 0)`, the identity of the fold.
pub fn chk_update<T: Real>(inputs: &[JointMessage<T>]) -> JointMessage<T> {
    let Some((first, rest)) = inputs.split_first() else {
        return JointMessage::point(0, 0);
    };
    let folded = rest.iter().fold(*first, |acc, m| acc.xor_conv(m));
    folded.normalized().unwrap_or(folded)
}

/// Marginal hard decisions; ties resolve to 0.
pub fn hard_decide<T: Real>(belief: &JointMessage<T>) -> (u8, u8) {
    let (a0, a1) = belief.marginal_user1();
    let (b0, b1) = belief.marginal_user2();
    (u8::from(a0 < a1), u8::from(b0 < b1))
}

/// Folds a message onto a decided value for one user.
///
/// The decided user's marginal becomes a point mass on `bit`; the other
/// user's marginal is kept. For user 1 decided 0 this is
/// `(p00 + p10, p01 + p11, 0, 0)`.
pub fn clamp_user<T: Real>(msg: &JointMessage<T>, user: User, bit: u8) -> JointMessage<T> {
    let p = &msg.0;
    let z = T::zero();
    match (user, bit & 1) {
        (User::One, 0) => JointMessage([p[0] + p[2], p[1] + p[3], z, z]),
        (User::One, _) => JointMessage([z, z, p[0] + p[2], p[1] + p[3]]),
        (User::Two, 0) => JointMessage([p[0] + p[1], z, p[2] + p[3], z]),
        (User::Two, _) => JointMessage([z, p[0] + p[1], z, p[2] + p[3]]),
    }
}

/// Posterior mean of `a (1 - 2 x1) + b (1 - 2 x2)` under one belief.
pub fn posterior_mean<T: Real>(belief: &JointMessage<T>, a: Complex<T>, b: Complex<T>) -> Complex<T> {
    let points = constellation(a, b);
    belief
        .0
        .iter()
        .zip(&points)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (&p, &c)| acc + c * p)
}

/// Relay broadcast symbols: the posterior mean of each symbol's constellation
/// point for broadcast coefficients `(a, b)`, normally `(h13, h23)`.
pub fn relay_mmse_output<T: Real>(beliefs: &[JointMessage<T>], a: Complex<T>, b: Complex<T>) -> Vec<Complex<T>> {
    beliefs.iter().map(|m| posterior_mean(m, a, b)).collect()
}
