//! Dense row-major matrices and the seeded random source used everywhere else.
//!
//! Everything downstream (losses, layers, data synthesis) is built on [`Mat`]
//! and [`SeededRng`]. The canonical element type is `f64`; `f32` exists only
//! as an opt-in training precision, so the alias [`Matrix`] is what most of
//! the crate works with.

use std::fmt;
use std::iter::Sum;

use num_traits::Float;

/// Element types a [`Mat`] can hold. Implemented for `f32` and `f64`.
///
/// Verification paths (gradient checks, oracles, diagnostics) always run in
/// `f64`; `f32` is reachable only through the training-precision switch.
pub trait Scalar:
    Float + Sum + fmt::Debug + fmt::Display + Copy + Send + Sync + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

/// Dense matrix, row-major storage.
///
/// Rows and columns are always positive; `data.len() == rows * cols` is
/// checked at construction and preserved by every operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<S = f64> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

/// The canonical 64-bit matrix.
pub type Matrix = Mat<f64>;

impl<S: Scalar> Mat<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dims must be positive, got {rows}x{cols}");
        assert_eq!(
            data.len(),
            rows * cols,
            "data length {} does not match shape {rows}x{cols}",
            data.len()
        );
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![S::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    /// Build from nested slices; test and fixture helper.
    pub fn from_rows(rows: &[&[S]]) -> Self {
        assert!(!rows.is_empty());
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> S {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [S] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self::new(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, a: S) -> Self {
        self.map(|v| v * a)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "add: shape {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        Self::new(self.rows, self.cols, data)
    }

    pub fn add_scaled_assign(&mut self, other: &Self, a: S) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (x, &y) in self.data.iter_mut().zip(&other.data) {
            *x = *x + y * a;
        }
    }

    pub fn frobenius_norm(&self) -> S {
        self.data.iter().map(|&v| v * v).sum::<S>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Panic with `context` if any entry is non-finite. Called at module
    /// boundaries rather than inside the hot kernels.
    pub fn assert_finite(&self, context: &str) {
        assert!(self.is_finite(), "non-finite values in {context}");
    }

    /// Convert element type; used when the training precision differs from
    /// the canonical `f64`.
    pub fn cast<T: Scalar>(&self) -> Mat<T> {
        Mat::new(
            self.rows,
            self.cols,
            self.data.iter().map(|&v| T::from_f64(v.to_f64())).collect(),
        )
    }
}

/// Standard matrix product `a * b`.
///
/// Row-by-row axpy formulation: the inner loop runs over contiguous rows of
/// `b`, which vectorizes well and skips zero multipliers (common after ReLU).
pub fn matmul<S: Scalar>(a: &Mat<S>, b: &Mat<S>) -> Mat<S> {
    assert_eq!(
        a.cols, b.rows,
        "matmul: inner dims differ, lhs {}x{} rhs {}x{}",
        a.rows, a.cols, b.rows, b.cols
    );
    let (m, p, n) = (a.rows, a.cols, b.cols);
    let mut out = Mat::zeros(m, n);
    for i in 0..m {
        let arow = &a.data[i * p..(i + 1) * p];
        let orow = &mut out.data[i * n..(i + 1) * n];
        for (k, &aik) in arow.iter().enumerate() {
            if aik == S::zero() {
                continue;
            }
            let brow = &b.data[k * n..(k + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o = *o + aik * bv;
            }
        }
    }
    out
}

/// `a * b^T` without materializing the transpose.
pub fn matmul_transb<S: Scalar>(a: &Mat<S>, b: &Mat<S>) -> Mat<S> {
    assert_eq!(
        a.cols, b.cols,
        "matmul_transb: inner dims differ, lhs {}x{} rhs^T {}x{}",
        a.rows, a.cols, b.cols, b.rows
    );
    let (m, p, n) = (a.rows, a.cols, b.rows);
    let mut out = Mat::zeros(m, n);
    for i in 0..m {
        let arow = &a.data[i * p..(i + 1) * p];
        let orow = &mut out.data[i * n..(i + 1) * n];
        for (j, o) in orow.iter_mut().enumerate() {
            let brow = &b.data[j * p..(j + 1) * p];
            *o = dot(arow, brow);
        }
    }
    out
}

/// `a^T * b` without materializing the transpose.
pub fn matmul_transa<S: Scalar>(a: &Mat<S>, b: &Mat<S>) -> Mat<S> {
    assert_eq!(
        a.rows, b.rows,
        "matmul_transa: inner dims differ, lhs^T {}x{} rhs {}x{}",
        a.cols, a.rows, b.rows, b.cols
    );
    let (m, p, n) = (a.cols, a.rows, b.cols);
    let mut out = Mat::zeros(m, n);
    for r in 0..p {
        let arow = &a.data[r * m..(r + 1) * m];
        let brow = &b.data[r * n..(r + 1) * n];
        for (k, &ark) in arow.iter().enumerate() {
            if ark == S::zero() {
                continue;
            }
            let orow = &mut out.data[k * n..(k + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o = *o + ark * bv;
            }
        }
    }
    out
}

/// Dot product with four accumulators for instruction-level parallelism.
#[inline]
pub fn dot<S: Scalar>(x: &[S], y: &[S]) -> S {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = [S::zero(); 4];
    let chunks = x.len() / 4;
    for c in 0..chunks {
        let i = c * 4;
        acc[0] = acc[0] + x[i] * y[i];
        acc[1] = acc[1] + x[i + 1] * y[i + 1];
        acc[2] = acc[2] + x[i + 2] * y[i + 2];
        acc[3] = acc[3] + x[i + 3] * y[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in chunks * 4..x.len() {
        s = s + x[i] * y[i];
    }
    s
}

/// Divide each row by `max(‖row‖₂, eps)`.
///
/// The `max` floor (rather than `norm + eps`) keeps rows that already have
/// unit norm exactly unit, so normalization is idempotent.
pub fn row_l2_normalize<S: Scalar>(a: &Mat<S>, eps: S) -> Mat<S> {
    assert!(eps > S::zero(), "eps must be positive");
    let mut out = a.clone();
    for r in 0..out.rows {
        let row = out.row_mut(r);
        let norm = dot(row, row).sqrt();
        let denom = if norm > eps { norm } else { eps };
        let inv = S::one() / denom;
        for v in row {
            *v = *v * inv;
        }
    }
    out
}

/// Euclidean norms of each row, before any flooring.
pub fn row_norms<S: Scalar>(a: &Mat<S>) -> Vec<S> {
    (0..a.rows).map(|r| dot(a.row(r), a.row(r)).sqrt()).collect()
}

// ---------------------------------------------------------------------------
// Seeded random source
// ---------------------------------------------------------------------------

/// Deterministic random generator: xoshiro256++ seeded through SplitMix64.
///
/// The algorithm is fixed so that runs reproduce bit-for-bit across
/// platforms and so that the sequence can be recreated by an independent
/// implementation:
///
/// * State initialization: four rounds of SplitMix64 over the seed
///   (`z = s += 0x9E3779B97F4A7C15; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
///   z = (z ^ z>>27) * 0x94D049BB133111EB; z ^ z>>31`).
/// * Word generation: xoshiro256++ (`rotl(s0 + s3, 23) + s0` followed by the
///   standard state transition).
/// * Uniform doubles: `((word >> 11) + 1) * 2^-53`, i.e. 53 mantissa bits
///   mapped into `(0, 1]` — never zero, so logarithms are safe.
/// * Normals: Box-Muller, `sqrt(-2 ln u1) * cos(2π u2)` from two consecutive
///   uniforms; the sine branch is not used.
/// * Bounded integers: `word % n` (the modulo bias is irrelevant at the
///   ranges used here and keeps the mapping trivial to reproduce).
///
/// `split` hands out an independent stream seeded from the parent's next
/// word; the parent advances by exactly one word.
#[derive(Debug, Clone)]
pub struct SeededRng {
    state: [u64; 4],
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        let mut s = seed;
        let mut state = [0u64; 4];
        for w in &mut state {
            s = s.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            *w = z ^ (z >> 31);
        }
        Self { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in `(0, 1]`.
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One draw from N(mean, std²) via Box-Muller.
    pub fn normal(&mut self, mean: f64, std: f64) -> f64 {
        debug_assert!(std >= 0.0);
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        mean + std * z
    }

    /// Uniform integer in `[0, n)`.
    pub fn next_index(&mut self, n: usize) -> usize {
        assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_index(i + 1);
            items.swap(i, j);
        }
    }

    /// Derive an independent child stream; the parent advances by one word.
    pub fn split(&mut self) -> SeededRng {
        SeededRng::new(self.next_u64())
    }
}

/// Matrix of i.i.d. draws from N(mean, std²), filled row-major.
///
/// Draws happen in `f64` and are then cast, so `f32` and `f64` runs see the
/// same underlying sequence.
pub fn seeded_normal<S: Scalar>(
    rows: usize,
    cols: usize,
    mean: f64,
    std: f64,
    rng: &mut SeededRng,
) -> Mat<S> {
    assert!(std >= 0.0, "std must be non-negative");
    let data = (0..rows * cols)
        .map(|_| S::from_f64(rng.normal(mean, std)))
        .collect();
    Mat::new(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(rows: usize, cols: usize, rng: &mut SeededRng) -> Matrix {
        seeded_normal(rows, cols, 0.0, 1.0, rng)
    }

    #[test]
    fn matmul_identity() {
        let mut rng = SeededRng::new(7);
        let a = random_matrix(3, 3, &mut rng);
        let i3 = Matrix::identity(3);
        assert_eq!(matmul(&i3, &a), a);
        assert_eq!(matmul(&a, &i3), a);
    }

    #[test]
    fn matmul_closed_form() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = Matrix::from_rows(&[&[0.0], &[1.0]]);
        let c = matmul(&a, &b);
        assert_eq!(c.as_slice(), &[2.0, 4.0]);
    }

    #[test]
    fn matmul_matches_triple_loop_oracle() {
        let mut rng = SeededRng::new(11);
        let a = random_matrix(7, 5, &mut rng);
        let b = random_matrix(5, 3, &mut rng);
        let c = matmul(&a, &b);
        // Naive triple loop, no skipping, no reassociation tricks.
        for i in 0..7 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..5 {
                    acc += a.get(i, k) * b.get(k, j);
                }
                assert!((c.get(i, j) - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matmul_transposed_variants_match_explicit_transpose() {
        let mut rng = SeededRng::new(13);
        let a = random_matrix(4, 6, &mut rng);
        let b = random_matrix(5, 6, &mut rng);
        let via_t = matmul(&a, &b.transpose());
        let direct = matmul_transb(&a, &b);
        for (x, y) in via_t.as_slice().iter().zip(direct.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
        let c = random_matrix(4, 3, &mut rng);
        let via_t = matmul(&a.transpose(), &c);
        let direct = matmul_transa(&a, &c);
        for (x, y) in via_t.as_slice().iter().zip(direct.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn matmul_associative_on_random_triples() {
        let mut rng = SeededRng::new(17);
        for _ in 0..20 {
            let a = random_matrix(4, 3, &mut rng);
            let b = random_matrix(3, 5, &mut rng);
            let c = random_matrix(5, 2, &mut rng);
            let left = matmul(&matmul(&a, &b), &c);
            let right = matmul(&a, &matmul(&b, &c));
            for (x, y) in left.as_slice().iter().zip(right.as_slice()) {
                let denom = x.abs().max(y.abs()).max(1.0);
                assert!((x - y).abs() / denom < 1e-10);
            }
        }
    }

    #[test]
    #[should_panic(expected = "matmul: inner dims differ")]
    fn matmul_rejects_dimension_mismatch() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 3);
        matmul(&a, &b);
    }

    #[test]
    fn normalize_closed_form() {
        let a = Matrix::from_rows(&[&[3.0, 4.0]]);
        let n = row_l2_normalize(&a, 1e-12);
        assert!((n.get(0, 0) - 0.6).abs() < 1e-15);
        assert!((n.get(0, 1) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn normalize_zero_row_is_untouched() {
        let a = Matrix::from_rows(&[&[0.0, 0.0]]);
        let n = row_l2_normalize(&a, 1e-12);
        assert_eq!(n.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn normalize_unit_norm_and_idempotent() {
        let mut rng = SeededRng::new(23);
        let a = random_matrix(10, 6, &mut rng);
        let n = row_l2_normalize(&a, 1e-12);
        for r in 0..n.rows() {
            let norm = dot(n.row(r), n.row(r)).sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        let nn = row_l2_normalize(&n, 1e-12);
        for (x, y) in n.as_slice().iter().zip(nn.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_normal_deterministic() {
        let mut r1 = SeededRng::new(42);
        let mut r2 = SeededRng::new(42);
        let a: Matrix = seeded_normal(5, 4, 1.0, 2.0, &mut r1);
        let b: Matrix = seeded_normal(5, 4, 1.0, 2.0, &mut r2);
        assert_eq!(a, b);
    }

    #[test]
    fn seeded_normal_zero_std_is_constant() {
        let mut rng = SeededRng::new(1);
        let a: Matrix = seeded_normal(3, 3, 0.25, 0.0, &mut rng);
        assert!(a.as_slice().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn seeded_normal_sample_mean_converges() {
        let mut rng = SeededRng::new(2024);
        let a: Matrix = seeded_normal(100, 1000, 0.5, 1.0, &mut rng);
        let mean: f64 = a.as_slice().iter().sum::<f64>() / 1e5;
        assert!(
            (mean - 0.5).abs() < 0.02,
            "sample mean {mean} too far from 0.5"
        );
        let var: f64 = a.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 1e5;
        assert!((var - 1.0).abs() < 0.05, "sample variance {var} too far from 1");
    }

    #[test]
    fn split_streams_differ_and_are_deterministic() {
        let mut parent = SeededRng::new(9);
        let mut child_a = parent.split();
        let mut child_b = parent.split();
        assert_ne!(child_a.next_u64(), child_b.next_u64());

        let mut parent2 = SeededRng::new(9);
        let mut child_a2 = parent2.split();
        child_a2.next_u64(); // same position as child_a above
        assert_eq!(child_a.next_u64(), child_a2.next_u64());
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = SeededRng::new(55);
        let mut v: Vec<usize> = (0..100).collect();
        rng.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
        assert_ne!(v, (0..100).collect::<Vec<_>>());
    }
}
