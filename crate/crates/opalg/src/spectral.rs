//! Spectral primitives on dense complex matrices.
//!
//! Everything is built on two cyclic-Jacobi kernels with deterministic sweep
//! order: a two-sided rotation scheme for Hermitian eigendecomposition and a
//! one-sided (Hestenes) scheme for the SVD. At the sizes this crate targets
//! (a few hundred rows after amplification) these are accurate and fast
//! enough, and their determinism keeps every downstream report reproducible.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat::{CMat, Tolerances};

const JACOBI_SWEEPS: usize = 60;
const JACOBI_TOL: f64 = 1e-14;

/// Threshold under which a singular value is treated as exactly 1 when
/// extracting the norm-one partial isometry of a contraction.
pub const TRIPOTENT_TAU: f64 = 1e-6;

/// Eigendecomposition of a Hermitian matrix: `h = vectors * diag(values) * vectors^*`,
/// eigenvalues ascending, eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// The input is symmetrized as `(h + h*)/2` first; callers that care whether
/// the input was Hermitian should check separately.
pub fn herm_eig(h: &CMat) -> Result<HermEig> {
    if !h.is_square() {
        return Err(Error::NonSquare { rows: h.rows(), cols: h.cols() });
    }
    let n = h.rows();
    let mut a = h.add(&h.adjoint()).scale_re(0.5);
    let mut v = CMat::identity(n);
    let scale = a.max_abs().max(1e-300);

    for _sweep in 0..JACOBI_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a.get(p, q).norm());
            }
        }
        if off <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let r = apq.norm();
                if r <= JACOBI_TOL * scale {
                    continue;
                }
                let phase = apq / r; // e^{i phi}
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = D R with D = diag(1, conj(phase)) on (p,q) and
                // R = [[c, s], [-s, c]], which zeroes the (p,q) entry of the
                // phase-reduced real block.
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(s, 0.0);
                let uqp = phase.conj() * (-s);
                let uqq = phase.conj() * c;
                // a <- a U (columns), then a <- U* a (rows); v <- v U.
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, aip * upp + aiq * uqp);
                    a.set(i, q, aip * upq + aiq * uqq);
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip * upp + viq * uqp);
                    v.set(i, q, vip * upq + viq * uqq);
                }
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, upp.conj() * apj + uqp.conj() * aqj);
                    a.set(q, j, upq.conj() * apj + uqq.conj() * aqj);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (newcol, &oldcol) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, newcol, v.get(i, oldcol));
        }
    }
    Ok(HermEig { values, vectors })
}

/// Singular value decomposition `x = u * diag(sigma) * v^*` with singular
/// values descending. Columns of `u` corresponding to (numerically) zero
/// singular values are zero, so `u` is a partial isometry on the nonzero part.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

/// One-sided Jacobi SVD. Works on the tall orientation internally.
pub fn svd(x: &CMat) -> Svd {
    if x.rows() < x.cols() {
        let s = svd(&x.adjoint());
        return Svd { u: s.v, sigma: s.sigma, v: s.u };
    }
    let m = x.rows();
    let n = x.cols();
    let mut w = x.clone();
    let mut v = CMat::identity(n);
    let scale2 = w.data().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max).max(1e-300);

    for _sweep in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0f64;
                let mut aqq = 0.0f64;
                let mut apq = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let wp = w.get(i, p);
                    let wq = w.get(i, q);
                    app += wp.norm_sqr();
                    aqq += wq.norm_sqr();
                    apq += wp.conj() * wq;
                }
                let r = apq.norm();
                if r <= JACOBI_TOL * (app.sqrt() * aqq.sqrt()).max(JACOBI_TOL * scale2) {
                    continue;
                }
                rotated = true;
                let phase = apq / r;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(s, 0.0);
                let uqp = phase.conj() * (-s);
                let uqq = phase.conj() * c;
                for i in 0..m {
                    let wp = w.get(i, p);
                    let wq = w.get(i, q);
                    w.set(i, p, wp * upp + wq * uqp);
                    w.set(i, q, wp * upq + wq * uqq);
                }
                for i in 0..n {
                    let vp = v.get(i, p);
                    let vq = v.get(i, q);
                    v.set(i, p, vp * upp + vq * uqp);
                    v.set(i, q, vp * upq + vq * uqq);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w.get(i, j).norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let mut u = CMat::zeros(m, n);
    let mut vv = CMat::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (newcol, &old) in order.iter().enumerate() {
        let s = norms[old];
        sigma.push(s);
        if s > 0.0 {
            for i in 0..m {
                u.set(i, newcol, w.get(i, old) / s);
            }
        }
        for i in 0..n {
            vv.set(i, newcol, v.get(i, old));
        }
    }
    norms.clear();
    Svd { u, sigma, v: vv }
}

/// Largest singular value; 0 for the zero matrix.
pub fn op_norm(x: &CMat) -> f64 {
    if x.max_abs() == 0.0 {
        return 0.0;
    }
    if x.rows() == 1 && x.cols() == 1 {
        return x.get(0, 0).norm();
    }
    // Gram route: the largest eigenvalue of x* x. The top of the spectrum is
    // what we need, and the Hermitian Jacobi kernel resolves it to full
    // relative accuracy.
    let g = if x.rows() >= x.cols() {
        x.adjoint().mul(x)
    } else {
        x.mul(&x.adjoint())
    };
    let eig = herm_eig(&g).expect("gram matrix is square");
    eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// True iff `h` is Hermitian within `eps_eq` and its minimum eigenvalue is
/// at least `-eps_psd`.
pub fn is_psd(h: &CMat, tol: &Tolerances) -> Result<bool> {
    if !h.is_square() {
        return Err(Error::NonSquare { rows: h.rows(), cols: h.cols() });
    }
    let herm_tol = tol.eps_eq * h.max_abs().max(1.0);
    if !h.is_hermitian(herm_tol) {
        return Ok(false);
    }
    let eig = herm_eig(h)?;
    Ok(eig.values.first().map_or(true, |&v| v >= -tol.eps_psd))
}

/// Hermitian/skew decomposition `x = a + ib` together with the positive and
/// negative parts of both Hermitian pieces.
#[derive(Clone, Debug)]
pub struct HermParts {
    pub a: CMat,
    pub b: CMat,
    pub a_plus: CMat,
    pub a_minus: CMat,
    pub b_plus: CMat,
    pub b_minus: CMat,
}

fn psd_parts(h: &CMat) -> Result<(CMat, CMat)> {
    let eig = herm_eig(h)?;
    let n = h.rows();
    let mut plus = CMat::zeros(n, n);
    let mut minus = CMat::zeros(n, n);
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam == 0.0 {
            continue;
        }
        let col = eig.vectors.block(0, k, n, 1);
        let proj = col.mul(&col.adjoint());
        if lam > 0.0 {
            plus = plus.add(&proj.scale_re(lam));
        } else {
            minus = minus.add(&proj.scale_re(-lam));
        }
    }
    Ok((plus, minus))
}

/// Decompose `x = a + ib` with `a, b` Hermitian, and split both into
/// positive parts: `a = a_plus - a_minus`, `a_plus a_minus = 0`, both PSD.
pub fn herm_decompose(x: &CMat) -> Result<HermParts> {
    if !x.is_square() {
        return Err(Error::NonSquare { rows: x.rows(), cols: x.cols() });
    }
    let a = x.add(&x.adjoint()).scale_re(0.5);
    let b = x.sub(&x.adjoint()).scale(Complex64::new(0.0, -0.5));
    let (a_plus, a_minus) = psd_parts(&a)?;
    let (b_plus, b_minus) = psd_parts(&b)?;
    Ok(HermParts { a, b, a_plus, a_minus, b_plus, b_minus })
}

/// The norm-one partial isometry part of a contraction: with `x = sum sigma_i u_i v_i^*`,
/// returns `sum_{sigma_i >= 1 - tau} u_i v_i^*`. In finite dimensions this is
/// the limit of the iterates `x (x^* x)^n`.
pub fn tripotent_u(x: &CMat, tol: &Tolerances) -> Result<CMat> {
    if !x.is_square() {
        return Err(Error::NonSquare { rows: x.rows(), cols: x.cols() });
    }
    let norm = op_norm(x);
    if norm > 1.0 + tol.eps_norm {
        return Err(Error::Precondition(format!(
            "tripotent_u requires a contraction, got norm {norm:.6}"
        )));
    }
    let n = x.rows();
    let mut w = CMat::zeros(n, n);
    if norm < 1.0 - TRIPOTENT_TAU {
        return Ok(w);
    }
    let s = svd(x);
    for (k, &sig) in s.sigma.iter().enumerate() {
        if sig >= 1.0 - TRIPOTENT_TAU {
            let u = s.u.block(0, k, n, 1);
            let v = s.v.block(0, k, n, 1);
            w = w.add(&u.mul(&v.adjoint()));
        }
    }
    Ok(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportSide {
    Left,
    Right,
}

/// Orthogonal projection onto the span of the column spaces (left) or row
/// spaces (right) of the given matrices. Numerical rank is cut at singular
/// values `> eps_psd * sigma_max`.
pub fn support(elems: &[CMat], side: SupportSide, tol: &Tolerances) -> Result<CMat> {
    let first = elems
        .first()
        .ok_or_else(|| Error::Precondition("support of an empty family: supply the dimension by including a zero matrix".into()))?;
    if !first.is_square() {
        return Err(Error::NonSquare { rows: first.rows(), cols: first.cols() });
    }
    let n = first.rows();
    let mut gram = CMat::zeros(n, n);
    for z in elems {
        if z.rows() != n || z.cols() != n {
            return Err(Error::Dimension(format!(
                "support family mixes dimensions {}x{} and {}x{}",
                n, n, z.rows(), z.cols()
            )));
        }
        let term = match side {
            SupportSide::Left => z.mul(&z.adjoint()),
            SupportSide::Right => z.adjoint().mul(z),
        };
        gram = gram.add(&term);
    }
    let eig = herm_eig(&gram)?;
    let lam_max = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    if lam_max <= 0.0 {
        return Ok(CMat::zeros(n, n));
    }
    // sigma > eps_psd * sigma_max translates to lambda > eps_psd^2 * lambda_max.
    let cut = tol.eps_psd * tol.eps_psd * lam_max;
    let mut p = CMat::zeros(n, n);
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam > cut {
            let col = eig.vectors.block(0, k, n, 1);
            p = p.add(&col.mul(&col.adjoint()));
        }
    }
    Ok(p)
}

/// Projection of a Hermitian matrix onto the PSD cone (negative eigenvalues
/// clipped to zero).
pub fn psd_projection(h: &CMat) -> Result<CMat> {
    let (plus, _) = psd_parts(&h.add(&h.adjoint()).scale_re(0.5))?;
    Ok(plus)
}

/// Clip the singular values of `x` at 1: the HS-nearest point of the
/// operator-norm unit ball.
pub fn clip_to_unit_ball(x: &CMat) -> CMat {
    let nrm = op_norm(x);
    if nrm <= 1.0 {
        return x.clone();
    }
    let s = svd(x);
    let n = x.rows().min(x.cols());
    let mut out = CMat::zeros(x.rows(), x.cols());
    for k in 0..n {
        let sig = s.sigma[k];
        if sig == 0.0 {
            break;
        }
        let u = s.u.block(0, k, x.rows(), 1);
        let v = s.v.block(0, k, x.cols(), 1);
        out = out.add(&u.mul(&v.adjoint()).scale_re(sig.min(1.0)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eig_of_diagonal() {
        let h = CMat::diag(&[c(3.0, 0.0), c(-1.0, 0.0), c(0.5, 0.0)]);
        let e = herm_eig(&h).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-12);
        assert!((e.values[1] - 0.5).abs() < 1e-12);
        assert!((e.values[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eig_reconstructs_complex_hermitian() {
        let h = CMat::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, 1.0), c(0.0, -0.5)],
            vec![c(1.0, -1.0), c(0.0, 0.0), c(2.0, 0.0)],
            vec![c(0.0, 0.5), c(2.0, 0.0), c(-1.0, 0.0)],
        ]);
        let e = herm_eig(&h).unwrap();
        let mut rec = CMat::zeros(3, 3);
        for k in 0..3 {
            let v = e.vectors.block(0, k, 3, 1);
            rec = rec.add(&v.mul(&v.adjoint()).scale_re(e.values[k]));
        }
        assert!(rec.approx_eq(&h, 1e-10));
    }

    #[test]
    fn op_norm_examples() {
        assert!((op_norm(&CMat::identity(4)) - 1.0).abs() < 1e-12);
        let x = CMat::from_rows_re(&[vec![0.0, 2.0], vec![0.0, 0.0]]);
        assert!((op_norm(&x) - 2.0).abs() < 1e-12);
        assert_eq!(op_norm(&CMat::zeros(3, 3)), 0.0);
    }

    #[test]
    fn svd_reconstructs() {
        let x = CMat::from_rows(&[
            vec![c(1.0, 2.0), c(0.0, 0.0), c(3.0, 0.0)],
            vec![c(0.0, -1.0), c(4.0, 0.0), c(0.0, 0.0)],
        ]);
        let s = svd(&x);
        let mut rec = CMat::zeros(2, 3);
        for k in 0..s.sigma.len() {
            let u = s.u.block(0, k, 2, 1);
            let v = s.v.block(0, k, 3, 1);
            rec = rec.add(&u.mul(&v.adjoint()).scale_re(s.sigma[k]));
        }
        assert!(rec.approx_eq(&x, 1e-10));
        assert!(s.sigma.windows(2).all(|w| w[0] >= w[1] - 1e-14));
    }

    #[test]
    fn is_psd_examples() {
        let tol = Tolerances::default();
        assert!(is_psd(&CMat::identity(2), &tol).unwrap());
        let m = CMat::from_rows_re(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(!is_psd(&m, &tol).unwrap());
        let d = CMat::diag(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(is_psd(&d, &tol).unwrap());
    }

    #[test]
    fn herm_decompose_identity() {
        let parts = herm_decompose(&CMat::identity(2)).unwrap();
        assert!(parts.a.approx_eq(&CMat::identity(2), 1e-14));
        assert_eq!(parts.b.max_abs(), 0.0);
        assert!(parts.a_plus.approx_eq(&CMat::identity(2), 1e-12));
        assert_eq!(parts.a_minus.max_abs(), 0.0);
    }

    #[test]
    fn herm_decompose_corner_unit() {
        // x = E_13 in M_5: Re(x) has eigenvalues +-1/2.
        let x = CMat::unit(5, 0, 2);
        let p = herm_decompose(&x).unwrap();
        assert!((op_norm(&p.a_plus) - 0.5).abs() < 1e-12);
        assert!((op_norm(&p.a_minus) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn herm_decompose_nilpotent() {
        let x = CMat::from_rows_re(&[vec![0.0, 2.0], vec![0.0, 0.0]]);
        let p = herm_decompose(&x).unwrap();
        let a_expect = CMat::from_rows_re(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let b_expect = CMat::from_rows(&[vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]);
        assert!(p.a.approx_eq(&a_expect, 1e-12));
        assert!(p.b.approx_eq(&b_expect, 1e-12));
        for m in [&p.a_plus, &p.a_minus, &p.b_plus, &p.b_minus] {
            assert!((op_norm(m) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tripotent_of_projection_is_projection() {
        let tol = Tolerances::default();
        let q = CMat::diag(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let u = tripotent_u(&q, &tol).unwrap();
        assert!(u.approx_eq(&q, 1e-9));
    }

    #[test]
    fn tripotent_drops_small_singular_values() {
        let tol = Tolerances::default();
        let x = CMat::diag(&[c(1.0, 0.0), c(0.5, 0.0)]);
        let u = tripotent_u(&x, &tol).unwrap();
        assert!(u.approx_eq(&CMat::unit(2, 0, 0), 1e-9));
        // Brute-force iterate x (x*x)^n at n = 200 agrees.
        let mut it = x.clone();
        let g = x.adjoint().mul(&x);
        for _ in 0..200 {
            it = it.mul(&g);
        }
        assert!(u.approx_eq(&it, 1e-6));
    }

    #[test]
    fn tripotent_of_corner_unit_squares_to_zero() {
        let tol = Tolerances::default();
        let x = CMat::unit(5, 0, 2);
        let u = tripotent_u(&x, &tol).unwrap();
        assert!(u.approx_eq(&x, 1e-9));
        assert!(u.mul(&u).max_abs() < 1e-12);
    }

    #[test]
    fn tripotent_rejects_expansions() {
        let tol = Tolerances::default();
        let x = CMat::diag(&[c(2.0, 0.0)]);
        assert!(tripotent_u(&x, &tol).is_err());
    }

    #[test]
    fn support_examples() {
        let tol = Tolerances::default();
        let e13 = CMat::unit(5, 0, 2);
        let left = support(&[e13.clone()], SupportSide::Left, &tol).unwrap();
        let right = support(&[e13], SupportSide::Right, &tol).unwrap();
        assert!(left.approx_eq(&CMat::unit(5, 0, 0), 1e-10));
        assert!(right.approx_eq(&CMat::unit(5, 2, 2), 1e-10));

        let i3 = CMat::identity(3);
        assert!(support(&[i3.clone()], SupportSide::Left, &tol).unwrap().approx_eq(&i3, 1e-10));

        let fam = [CMat::unit(3, 0, 1), CMat::unit(3, 0, 2)];
        let l = support(&fam, SupportSide::Left, &tol).unwrap();
        let r = support(&fam, SupportSide::Right, &tol).unwrap();
        assert!(l.approx_eq(&CMat::unit(3, 0, 0), 1e-10));
        let e22e33 = CMat::unit(3, 1, 1).add(&CMat::unit(3, 2, 2));
        assert!(r.approx_eq(&e22e33, 1e-10));
    }

    #[test]
    fn support_rejects_empty_and_mixed() {
        let tol = Tolerances::default();
        assert!(support(&[], SupportSide::Left, &tol).is_err());
        let fam = [CMat::identity(2), CMat::identity(3)];
        assert!(support(&fam, SupportSide::Left, &tol).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn herm_decompose_reassembles(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 2 + (seed % 4) as usize;
            let mut x = CMat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    x.set(i, j, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                }
            }
            let p = herm_decompose(&x).unwrap();
            let i_b = p.b.scale(c(0.0, 1.0));
            let rec = p.a.add(&i_b);
            prop_assert!(rec.approx_eq(&x, 1e-10));
            // a_+ a_- = 0 and both PSD
            prop_assert!(p.a_plus.mul(&p.a_minus).max_abs() < 1e-9);
            let tol = Tolerances::default();
            prop_assert!(is_psd(&p.a_plus, &tol).unwrap());
            prop_assert!(is_psd(&p.a_minus, &tol).unwrap());
            // reassemble a
            prop_assert!(p.a_plus.sub(&p.a_minus).approx_eq(&p.a, 1e-9));
        }

        #[test]
        fn op_norm_stable_under_identity_tensor(seed in 0u64..200) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 2 + (seed % 3) as usize;
            let k = 1 + (seed % 4) as usize;
            let mut x = CMat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    x.set(i, j, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                }
            }
            let amped = x.kron(&CMat::identity(k));
            prop_assert!((op_norm(&x) - op_norm(&amped)).abs() < 1e-6);
        }

        #[test]
        fn tripotent_matches_power_iteration(seed in 0u64..200) {
            use rand::{Rng, SeedableRng};
            let tol = Tolerances::default();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed_for_test(seed));
            let n = 2 + (seed % 3) as usize;
            let mut x = CMat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    x.set(i, j, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                }
            }
            // Rescale so the top singular value is exactly 1 and insist on a
            // spectral gap below it, so the power iterates converge quickly.
            let s = svd(&x);
            let top = s.sigma[0];
            prop_assume!(top > 1e-6);
            let x = x.scale_re(1.0 / top);
            let s = svd(&x);
            prop_assume!(s.sigma.len() < 2 || s.sigma[1] < 0.95);
            let u = tripotent_u(&x, &tol).unwrap();
            // w w* w = w
            prop_assert!(u.mul(&u.adjoint()).mul(&u).approx_eq(&u, 1e-8));
            let g = x.adjoint().mul(&x);
            let mut it = x.clone();
            for _ in 0..200 {
                it = it.mul(&g);
            }
            prop_assert!(u.approx_eq(&it, 1e-6));
        }
    }

    fn derive_seed_for_test(seed: u64) -> u64 {
        crate::mat::derive_seed(0xabcdef, seed)
    }
}
