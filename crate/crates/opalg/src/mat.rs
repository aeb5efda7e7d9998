//! Dense complex matrices, the carrier type for every operator in the crate.
//!
//! Storage is row-major `Vec<Complex64>`. Matrices are immutable values in
//! practice: every operation returns a fresh matrix. The JSON wire form is
//! `{"rows": n, "cols": m, "entries": [[re, im], ...]}` row-major, and is
//! shared by every other serialized type.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        CMat { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Matrix unit `E_ij` in `M_n` (zero-based indices).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        m.set(i, j, Complex64::new(1.0, 0.0));
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = CMat::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        assert!(r > 0);
        let c = rows[0].len();
        assert!(c > 0 && rows.iter().all(|row| row.len() == c), "ragged rows");
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend_from_slice(row);
        }
        CMat { rows: r, cols: c, data }
    }

    /// Real entries convenience constructor.
    pub fn from_rows_re(rows: &[Vec<f64>]) -> Self {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        CMat::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in sub");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        let data = self.data.iter().map(|a| a * s).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale_re(&self, s: f64) -> CMat {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn neg(&self) -> CMat {
        self.scale_re(-1.0)
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.add_at(i, j, a * other.get(k, j));
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn transpose(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn kron(&self, other: &CMat) -> CMat {
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        let mut out = CMat::zeros(r1 * r2, c1 * c2);
        for i in 0..r1 {
            for j in 0..c1 {
                let a = self.get(i, j);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..r2 {
                    for l in 0..c2 {
                        out.set(i * r2 + k, j * c2 + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Hilbert–Schmidt inner product `tr(self* other)`, conjugate-linear in `self`.
    pub fn hs_inner(&self, other: &CMat) -> Complex64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in hs_inner");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Entrywise equality within `eps`.
    pub fn approx_eq(&self, other: &CMat, eps: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| (a - b).norm() <= eps)
    }

    pub fn is_hermitian(&self, eps: f64) -> bool {
        self.is_square() && self.approx_eq(&self.adjoint(), eps)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    /// Extract the block of shape `h x w` at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> CMat {
        assert!(r0 + h <= self.rows && c0 + w <= self.cols, "block out of range");
        let mut out = CMat::zeros(h, w);
        for i in 0..h {
            for j in 0..w {
                out.set(i, j, self.get(r0 + i, c0 + j));
            }
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &CMat) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols, "block out of range");
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j));
            }
        }
    }

    /// Place `self` at `(r0, c0)` inside a zero `rows x cols` matrix.
    pub fn embed(&self, rows: usize, cols: usize, r0: usize, c0: usize) -> CMat {
        let mut out = CMat::zeros(rows, cols);
        out.set_block(r0, c0, self);
        out
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &CMat) -> CMat {
        let mut out = CMat::zeros(self.rows + other.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, other);
        out
    }

    /// 0/1 selection matrix of shape `n x keep.len()` whose column `j` is
    /// `e_{keep[j]}`. `S* x S` compresses `x` to the kept coordinates.
    pub fn selection(n: usize, keep: &[usize]) -> CMat {
        let mut s = CMat::zeros(n, keep.len());
        for (j, &i) in keep.iter().enumerate() {
            assert!(i < n, "selection index out of range");
            s.set(i, j, Complex64::new(1.0, 0.0));
        }
        s
    }

    /// Permutation matrix `P` with `P e_j = e_{perm[j]}`.
    pub fn permutation(perm: &[usize]) -> CMat {
        let n = perm.len();
        let mut p = CMat::zeros(n, n);
        for (j, &i) in perm.iter().enumerate() {
            p.set(i, j, Complex64::new(1.0, 0.0));
        }
        p
    }
}

impl Serialize for CMat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("CMat", 3)?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("cols", &self.cols)?;
        let entries: Vec<[f64; 2]> = self.data.iter().map(|z| [z.re, z.im]).collect();
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for CMat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            rows: usize,
            cols: usize,
            entries: Vec<[f64; 2]>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.rows == 0 || raw.cols == 0 {
            return Err(D::Error::custom("matrix dimensions must be positive"));
        }
        if raw.entries.len() != raw.rows * raw.cols {
            return Err(D::Error::custom(format!(
                "expected {} entries, got {}",
                raw.rows * raw.cols,
                raw.entries.len()
            )));
        }
        let data: Vec<Complex64> = raw.entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        let m = CMat { rows: raw.rows, cols: raw.cols, data };
        if !m.all_finite() {
            return Err(D::Error::custom("non-finite matrix entry"));
        }
        Ok(m)
    }
}

/// Numerical tolerances and the RNG seed shared by every search routine.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerances {
    /// Entrywise equality threshold.
    pub eps_eq: f64,
    /// Eigenvalue floor for positive-semidefiniteness tests.
    pub eps_psd: f64,
    /// Norm-estimate convergence threshold.
    pub eps_norm: f64,
    /// Iteration cap for inner solvers.
    pub max_iter: usize,
    /// Base RNG seed; all randomized searches derive their streams from it.
    pub seed: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_eq: 1e-9,
            eps_psd: 1e-8,
            eps_norm: 1e-6,
            max_iter: 10_000,
            seed: 0,
        }
    }
}

impl Tolerances {
    pub fn with_seed(seed: u64) -> Self {
        Tolerances { seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_eq <= 0.0 || self.eps_psd <= 0.0 || self.eps_norm <= 0.0 {
            return Err(Error::Precondition("tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Precondition("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Stable seed derivation for independent deterministic streams
/// (splitmix64 over the base seed and a stream index).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mul_and_adjoint() {
        let a = CMat::from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 0.0), c(2.0, 0.0)]]);
        let b = a.adjoint();
        assert_eq!(b.get(1, 0), c(0.0, -1.0));
        let p = a.mul(&b);
        assert!(p.is_hermitian(1e-14));
        assert_eq!(p.get(0, 0), c(2.0, 0.0));
    }

    #[test]
    fn kron_shapes_and_blocks() {
        let e = CMat::unit(2, 0, 1);
        let b = CMat::from_rows_re(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let k = e.kron(&b);
        assert_eq!((k.rows(), k.cols()), (4, 4));
        assert!(k.block(0, 2, 2, 2).approx_eq(&b, 0.0));
        assert_eq!(k.block(2, 0, 2, 2).max_abs(), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let a = CMat::from_rows(&[vec![c(1.0, -2.0), c(0.5, 0.0)]]);
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.contains("\"rows\":1") && s.contains("\"entries\""));
        let back: CMat = serde_json::from_str(&s).unwrap();
        assert!(a.approx_eq(&back, 0.0));
    }

    #[test]
    fn json_rejects_bad_length() {
        let s = r#"{"rows":2,"cols":2,"entries":[[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<CMat>(s).is_err());
    }

    #[test]
    fn selection_compresses() {
        let x = CMat::from_rows_re(&[
            vec![1.0, 2.0, 3.0],
            vec![4.0, 5.0, 6.0],
            vec![7.0, 8.0, 9.0],
        ]);
        let s = CMat::selection(3, &[0, 2]);
        let y = s.adjoint().mul(&x).mul(&s);
        assert!(y.approx_eq(&CMat::from_rows_re(&[vec![1.0, 3.0], vec![7.0, 9.0]]), 0.0));
    }
}
