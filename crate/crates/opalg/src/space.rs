//! Operator subspaces of `M_n` presented by explicit bases.
//!
//! An [`OpSpace`] keeps the user's basis together with a derived
//! Hilbert–Schmidt orthonormal basis. Membership, structure flags
//! (subalgebra, Jordan subalgebra, unitality, ...), matrix amplification,
//! unitization and the accretive "good part" search all live here.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{derive_seed, CMat, Tolerances};
use crate::spectral::{herm_eig, op_norm, psd_projection};

/// Default cap on the ambient dimension after amplification.
pub const AMPLIFY_SIZE_CAP: usize = 512;

/// An operator subspace of `M_n` with a distinguished basis.
#[derive(Clone, Debug)]
pub struct OpSpace {
    name: String,
    ambient_dim: usize,
    basis: Vec<CMat>,
    /// HS-orthonormal basis spanning the same space.
    onb: Vec<CMat>,
    /// `basis_to_onb[i][j]`: coefficient of `basis[i]` in `onb[j]`.
    basis_to_onb: Vec<Vec<Complex64>>,
}

/// Structural booleans of an operator space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureFlags {
    pub is_subalgebra: bool,
    pub is_jordan_subalgebra: bool,
    pub is_unital: bool,
    pub is_selfadjoint: bool,
    pub square_zero: bool,
}

impl OpSpace {
    /// Build a space from a linearly independent basis. Rejects dependent
    /// bases (minimum Gram eigenvalue below `eps_psd`) and dimension
    /// mismatches.
    pub fn new(ambient_dim: usize, basis: Vec<CMat>, name: &str, tol: &Tolerances) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Precondition(format!("space '{name}' needs a nonempty basis")));
        }
        for b in &basis {
            if b.rows() != ambient_dim || b.cols() != ambient_dim {
                return Err(Error::Dimension(format!(
                    "basis element is {}x{}, ambient is {}",
                    b.rows(),
                    b.cols(),
                    ambient_dim
                )));
            }
            if !b.all_finite() {
                return Err(Error::Precondition("non-finite basis entry".into()));
            }
        }
        // Gram matrix of the normalized basis detects dependence at scale.
        let d = basis.len();
        let mut gram = CMat::zeros(d, d);
        let norms: Vec<f64> = basis.iter().map(|b| b.hs_norm().max(1e-300)).collect();
        for i in 0..d {
            for j in 0..d {
                gram.set(i, j, basis[i].hs_inner(&basis[j]) / (norms[i] * norms[j]));
            }
        }
        let eig = herm_eig(&gram)?;
        let min_eig = eig.values.first().copied().unwrap_or(0.0);
        if min_eig < tol.eps_psd {
            return Err(Error::DependentBasis { min_eig });
        }

        // Modified Gram-Schmidt over the HS inner product, tracking the
        // change of basis so apply() can translate onb coefficients back.
        let mut onb: Vec<CMat> = Vec::with_capacity(d);
        let mut b2o: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); d]; d];
        for (j, b) in basis.iter().enumerate() {
            let mut v = b.clone();
            let mut coeffs = vec![Complex64::new(0.0, 0.0); d];
            coeffs[j] = Complex64::new(1.0, 0.0);
            for (k, q) in onb.iter().enumerate() {
                let c = q.hs_inner(&v);
                v = v.sub(&q.scale(c));
                for i in 0..d {
                    let adj = b2o[i][k] * c;
                    coeffs[i] -= adj;
                }
            }
            let nrm = v.hs_norm();
            if nrm < 1e-12 * b.hs_norm().max(1.0) {
                return Err(Error::DependentBasis { min_eig });
            }
            let v = v.scale_re(1.0 / nrm);
            for c in coeffs.iter_mut() {
                *c /= Complex64::new(nrm, 0.0);
            }
            for i in 0..d {
                b2o[i][j] = coeffs[i];
            }
            onb.push(v);
        }
        Ok(OpSpace {
            name: name.to_string(),
            ambient_dim,
            basis,
            onb,
            basis_to_onb: b2o,
        })
    }

    /// Span of a generating family: dependent generators are dropped instead
    /// of rejected. The zero span is represented with an empty basis-free
    /// sentinel and is not constructible; callers get `None` when all
    /// generators vanish.
    pub fn span(ambient_dim: usize, gens: &[CMat], name: &str, tol: &Tolerances) -> Result<Option<Self>> {
        let mut kept: Vec<CMat> = Vec::new();
        let mut onb: Vec<CMat> = Vec::new();
        for g in gens {
            if g.rows() != ambient_dim || g.cols() != ambient_dim {
                return Err(Error::Dimension(format!(
                    "generator is {}x{}, ambient is {}",
                    g.rows(),
                    g.cols(),
                    ambient_dim
                )));
            }
            let mut v = g.clone();
            for q in &onb {
                let c = q.hs_inner(&v);
                v = v.sub(&q.scale(c));
            }
            let nrm = v.hs_norm();
            if nrm > tol.eps_eq.sqrt() * g.hs_norm().max(1.0) {
                onb.push(v.scale_re(1.0 / nrm));
                kept.push(g.clone());
            }
        }
        if kept.is_empty() {
            return Ok(None);
        }
        OpSpace::new(ambient_dim, kept, name, tol).map(Some)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn onb(&self) -> &[CMat] {
        &self.onb
    }

    /// Coefficients of `x` in the orthonormal basis, together with the
    /// residual of the projection.
    pub fn onb_coeffs(&self, x: &CMat) -> (Vec<Complex64>, f64) {
        let coeffs: Vec<Complex64> = self.onb.iter().map(|q| q.hs_inner(x)).collect();
        let mut rec = CMat::zeros(self.ambient_dim, self.ambient_dim);
        for (c, q) in coeffs.iter().zip(&self.onb) {
            rec = rec.add(&q.scale(*c));
        }
        let residual = rec.sub(x).hs_norm();
        (coeffs, residual)
    }

    /// HS-orthogonal projection of `x` onto the space.
    pub fn project(&self, x: &CMat) -> CMat {
        let mut rec = CMat::zeros(self.ambient_dim, self.ambient_dim);
        for q in &self.onb {
            rec = rec.add(&q.scale(q.hs_inner(x)));
        }
        rec
    }

    /// Membership residual threshold is scale-invariant:
    /// `eps_eq * max(1, ||x||_HS)`.
    pub fn contains(&self, x: &CMat, tol: &Tolerances) -> bool {
        if x.rows() != self.ambient_dim || x.cols() != self.ambient_dim {
            return false;
        }
        let (_, residual) = self.onb_coeffs(x);
        residual <= tol.eps_eq * x.hs_norm().max(1.0)
    }

    /// Coefficients of `x` in the ORIGINAL basis; errors when `x` lies
    /// outside the span.
    pub fn basis_coeffs(&self, x: &CMat, tol: &Tolerances) -> Result<Vec<Complex64>> {
        if x.rows() != self.ambient_dim || x.cols() != self.ambient_dim {
            return Err(Error::Dimension(format!(
                "element is {}x{}, ambient is {}",
                x.rows(),
                x.cols(),
                self.ambient_dim
            )));
        }
        let (onb_c, residual) = self.onb_coeffs(x);
        if residual > tol.eps_eq * x.hs_norm().max(1.0) {
            return Err(Error::OutsideDomain { residual });
        }
        let d = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        for i in 0..d {
            for (j, c) in onb_c.iter().enumerate() {
                out[i] += self.basis_to_onb[i][j] * c;
            }
        }
        Ok(out)
    }

    pub fn contains_identity(&self, tol: &Tolerances) -> bool {
        self.contains(&CMat::identity(self.ambient_dim), tol)
    }

    /// Structure flags computed on the orthonormal basis. Span-membership
    /// uses the scale-invariant residual threshold.
    pub fn structure_flags(&self, tol: &Tolerances) -> StructureFlags {
        let mut is_subalgebra = true;
        let mut is_jordan = true;
        let mut square_zero = true;
        for x in &self.onb {
            for y in &self.onb {
                let xy = x.mul(y);
                if op_norm(&xy) >= tol.eps_eq {
                    square_zero = false;
                }
                if !self.contains(&xy, tol) {
                    is_subalgebra = false;
                }
                let yx = y.mul(x);
                let sym = xy.add(&yx).scale_re(0.5);
                if !self.contains(&sym, tol) {
                    is_jordan = false;
                }
            }
        }
        let is_selfadjoint = self.onb.iter().all(|x| self.contains(&x.adjoint(), tol));
        StructureFlags {
            is_subalgebra,
            is_jordan_subalgebra: is_jordan,
            is_unital: self.contains_identity(tol),
            is_selfadjoint,
            square_zero,
        }
    }

    /// The matrix amplification `M_k(S)` inside `M_{kn}`. Basis ordering is
    /// block index `(i, j)` outer, original basis element inner; certificates
    /// and witnesses reference amplified basis indices under this convention.
    pub fn amplify(&self, k: usize, tol: &Tolerances) -> Result<OpSpace> {
        if k == 0 {
            return Err(Error::Precondition("amplification level must be >= 1".into()));
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let n = self.ambient_dim;
        if k * n > AMPLIFY_SIZE_CAP {
            return Err(Error::SizeCap { level: k, ambient: n, size: k * n, cap: AMPLIFY_SIZE_CAP });
        }
        let mut basis = Vec::with_capacity(k * k * self.dim());
        for i in 0..k {
            for j in 0..k {
                for b in &self.basis {
                    basis.push(b.embed(k * n, k * n, i * n, j * n));
                }
            }
        }
        OpSpace::new(k * n, basis, &format!("M_{k}({})", self.name), tol)
    }

    /// Span of the space together with the identity; returns a clone when the
    /// space is already unital.
    pub fn unitize(&self, tol: &Tolerances) -> OpSpace {
        if self.contains_identity(tol) {
            return self.clone();
        }
        let mut basis = self.basis.clone();
        basis.push(CMat::identity(self.ambient_dim));
        OpSpace::new(self.ambient_dim, basis, &format!("{}^1", self.name), tol)
            .expect("identity independent of a span not containing it")
    }

    /// Span of the accretive cone `{x in S : x + x* >= 0}`, found by cyclic
    /// Dykstra projections between the span, the accretive cone, and a probe
    /// half-space forcing mass in unexplored directions. Best effort: the
    /// result is certified from below (it is spanned by accretive elements
    /// actually found) and the search stops after 64 consecutive failures.
    pub fn good_part(&self, tol: &Tolerances) -> Result<Option<OpSpace>> {
        if !self.structure_flags(tol).is_subalgebra {
            return Err(Error::Precondition("good_part requires a subalgebra".into()));
        }
        let n = self.ambient_dim;
        let mut found: Vec<CMat> = Vec::new();
        let mut found_onb: Vec<CMat> = Vec::new();
        let mut failures = 0usize;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(tol.seed, 0x600d));

        // Deterministic probe directions first: each onb element and its
        // Hermitian shadow, then seeded random directions.
        let mut starts: Vec<CMat> = Vec::new();
        for q in &self.onb {
            starts.push(q.clone());
            starts.push(q.neg());
            starts.push(q.add(&q.adjoint()).scale_re(0.5).add(q));
        }
        let max_random = 96usize;
        let mut random_drawn = 0usize;
        let mut idx = 0usize;
        while failures < 64 {
            let start = if idx < starts.len() {
                idx += 1;
                starts[idx - 1].clone()
            } else if random_drawn < max_random {
                random_drawn += 1;
                let mut g = CMat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        g.set(i, j, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                    }
                }
                self.project(&g)
            } else {
                break;
            };
            match self.accretive_dykstra(&start, &found_onb, tol) {
                Some(x) => {
                    // Keep only genuinely new directions.
                    let mut v = x.clone();
                    for q in &found_onb {
                        let c = q.hs_inner(&v);
                        v = v.sub(&q.scale(c));
                    }
                    let nrm = v.hs_norm();
                    if nrm > 1e-7 * x.hs_norm().max(1.0) {
                        found_onb.push(v.scale_re(1.0 / nrm));
                        found.push(x);
                        failures = 0;
                        if found.len() == self.dim() {
                            break;
                        }
                    } else {
                        failures += 1;
                    }
                }
                None => failures += 1,
            }
        }
        if found.is_empty() {
            return Ok(None);
        }
        OpSpace::span(n, &found, &format!("good({})", self.name), tol)
    }

    /// One Dykstra run between the span, the accretive cone, and the
    /// half-space `Re<x - offset, probe-dir> >= delta` that pushes away from
    /// the already-found span. Returns an accretive element of the span, or
    /// None when the run does not converge.
    fn accretive_dykstra(&self, start: &CMat, found_onb: &[CMat], tol: &Tolerances) -> Option<CMat> {
        let n = self.ambient_dim;
        let delta = 0.25f64;
        // Probe direction: the component of the start orthogonal to what we
        // already have, so convergence forces something new.
        let mut dir = start.clone();
        for q in found_onb {
            let c = q.hs_inner(&dir);
            dir = dir.sub(&q.scale(c));
        }
        let dn = dir.hs_norm();
        if dn < 1e-9 {
            return None;
        }
        let dir = dir.scale_re(1.0 / dn);

        let mut x = start.clone();
        let zero = CMat::zeros(n, n);
        let mut p = [zero.clone(), zero.clone(), zero.clone()];
        let iters = 400usize.min(tol.max_iter);
        for it in 0..iters {
            let mut max_move = 0.0f64;
            for (set, corr) in p.iter_mut().enumerate() {
                let y = x.add(corr);
                let proj = match set {
                    0 => self.project(&y),
                    1 => {
                        // accretive cone: replace the Hermitian part by its PSD part
                        let h = y.add(&y.adjoint()).scale_re(0.5);
                        let k = y.sub(&h);
                        let hp = psd_projection(&h).ok()?;
                        k.add(&hp)
                    }
                    _ => {
                        // half-space Re<dir, y> >= delta
                        let v = dir.hs_inner(&y).re;
                        if v >= delta {
                            y.clone()
                        } else {
                            y.add(&dir.scale_re(delta - v))
                        }
                    }
                };
                *corr = y.sub(&proj);
                max_move = max_move.max(x.sub(&proj).hs_norm());
                x = proj;
            }
            if max_move < 1e-11 && it > 3 {
                break;
            }
        }
        // Accept only if x is simultaneously in the span, accretive, and
        // carries probe mass.
        let in_span = self.project(&x).sub(&x).hs_norm() <= 1e-8 * x.hs_norm().max(1.0);
        let h = x.add(&x.adjoint()).scale_re(0.5);
        let accretive = herm_eig(&h).ok()?.values.first().copied().unwrap_or(0.0) >= -1e-8;
        let mass = dir.hs_inner(&x).re >= delta * 0.5;
        if in_span && accretive && mass && x.hs_norm() > 1e-6 {
            Some(x)
        } else {
            None
        }
    }
}

/// Wire form; the onb is never serialized and is recomputed on load.
#[derive(Serialize, Deserialize)]
pub struct OpSpaceWire {
    pub name: String,
    pub ambient_dim: usize,
    pub basis: Vec<CMat>,
}

impl Serialize for OpSpace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OpSpaceWire {
            name: self.name.clone(),
            ambient_dim: self.ambient_dim,
            basis: self.basis.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OpSpace {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = OpSpaceWire::deserialize(deserializer)?;
        OpSpace::new(wire.ambient_dim, wire.basis, &wire.name, &Tolerances::default())
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// The 3-dimensional subalgebra of M_5 spanned by I, E12+E23+2E45, E13.
    pub fn five_by_five_space() -> OpSpace {
        let n5 = CMat::unit(5, 0, 1)
            .add(&CMat::unit(5, 1, 2))
            .add(&CMat::unit(5, 3, 4).scale_re(2.0));
        OpSpace::new(5, vec![CMat::identity(5), n5, CMat::unit(5, 0, 2)], "A5", &tol()).unwrap()
    }

    #[test]
    fn five_by_five_is_valid_and_unital_subalgebra() {
        let s = five_by_five_space();
        assert_eq!(s.dim(), 3);
        let f = s.structure_flags(&tol());
        assert!(f.is_subalgebra);
        assert!(f.is_jordan_subalgebra);
        assert!(f.is_unital);
        assert!(!f.is_selfadjoint);
        assert!(!f.square_zero);
    }

    #[test]
    fn dependent_basis_rejected() {
        let b = vec![CMat::unit(2, 0, 0), CMat::unit(2, 0, 0)];
        assert!(matches!(
            OpSpace::new(2, b, "dep", &tol()),
            Err(Error::DependentBasis { .. })
        ));
    }

    #[test]
    fn projection_range_of_five_by_five_is_not_subalgebra() {
        let n5 = CMat::unit(5, 0, 1)
            .add(&CMat::unit(5, 1, 2))
            .add(&CMat::unit(5, 3, 4).scale_re(2.0));
        let s = OpSpace::new(5, vec![CMat::identity(5), n5], "ran(P5)", &tol()).unwrap();
        let f = s.structure_flags(&tol());
        assert!(!f.is_subalgebra);
        assert!(!f.is_jordan_subalgebra);
    }

    #[test]
    fn flags_are_basis_independent() {
        let s = five_by_five_space();
        // recombine the basis by an invertible matrix
        let b0 = s.basis()[0].add(&s.basis()[1].scale_re(2.0));
        let b1 = s.basis()[1].sub(&s.basis()[2].scale(Complex64::new(0.0, 1.5)));
        let b2 = s.basis()[2].add(&s.basis()[0].scale_re(-0.5));
        let s2 = OpSpace::new(5, vec![b0, b1, b2], "A5'", &tol()).unwrap();
        assert_eq!(s.structure_flags(&tol()), s2.structure_flags(&tol()));
    }

    #[test]
    fn amplify_dims_and_flags() {
        let s = five_by_five_space();
        let a = s.amplify(2, &tol()).unwrap();
        assert_eq!(a.ambient_dim(), 10);
        assert_eq!(a.dim(), 12);
        assert!(a.structure_flags(&tol()).is_subalgebra);
        let a1 = s.amplify(1, &tol()).unwrap();
        assert_eq!(a1.dim(), s.dim());
    }

    #[test]
    fn unitize_is_idempotent() {
        let s = OpSpace::new(2, vec![CMat::unit(2, 0, 1)], "X", &tol()).unwrap();
        let u = s.unitize(&tol());
        assert_eq!(u.dim(), 2);
        assert!(u.contains_identity(&tol()));
        let uu = u.unitize(&tol());
        assert_eq!(uu.dim(), u.dim());
        let s5 = five_by_five_space();
        assert_eq!(s5.unitize(&tol()).dim(), 3);
    }

    #[test]
    fn basis_coeffs_round_trip() {
        let s = five_by_five_space();
        let x = s.basis()[0]
            .scale(Complex64::new(0.3, -1.0))
            .add(&s.basis()[2].scale(Complex64::new(0.0, 2.0)));
        let c = s.basis_coeffs(&x, &tol()).unwrap();
        assert!((c[0] - Complex64::new(0.3, -1.0)).norm() < 1e-10);
        assert!(c[1].norm() < 1e-10);
        assert!((c[2] - Complex64::new(0.0, 2.0)).norm() < 1e-10);
        // outside the span
        assert!(s.basis_coeffs(&CMat::unit(5, 4, 0), &tol()).is_err());
    }

    #[test]
    fn good_part_of_nilpotent_span_is_zero() {
        let s = OpSpace::new(2, vec![CMat::unit(2, 0, 1)], "E12", &tol()).unwrap();
        // not a subalgebra? E12*E12 = 0 which IS in the span... it is a subalgebra.
        let g = s.good_part(&tol()).unwrap();
        assert!(g.is_none());
    }

    #[test]
    fn good_part_of_corner_is_itself() {
        let s = OpSpace::new(2, vec![CMat::unit(2, 0, 0)], "E11", &tol()).unwrap();
        let g = s.good_part(&tol()).unwrap().expect("nonzero good part");
        assert_eq!(g.dim(), 1);
        assert!(g.contains(&CMat::unit(2, 0, 0), &tol()));
    }

    #[test]
    fn good_part_of_unital_algebra_is_everything() {
        let s = five_by_five_space();
        let g = s.good_part(&tol()).unwrap().expect("unital algebra has full good part");
        assert_eq!(g.dim(), s.dim());
        // idempotent
        let gg = g.good_part(&tol()).unwrap().unwrap();
        assert_eq!(gg.dim(), g.dim());
    }

    #[test]
    fn good_part_is_hereditary_on_gallery_algebra() {
        // D A D subset D for the good part of a unital algebra (trivially the
        // whole algebra here, so this checks the product closure numerically).
        let s = five_by_five_space();
        let g = s.good_part(&tol()).unwrap().unwrap();
        for a in g.onb() {
            for b in s.onb() {
                for c in g.onb() {
                    let prod = a.mul(b).mul(c);
                    assert!(s.contains(&prod, &tol()));
                }
            }
        }
    }

    #[test]
    fn space_json_round_trip() {
        let s = five_by_five_space();
        let j = serde_json::to_string(&s).unwrap();
        let back: OpSpace = serde_json::from_str(&j).unwrap();
        assert_eq!(back.dim(), 3);
        assert_eq!(back.ambient_dim(), 5);
        assert_eq!(back.name(), "A5");
    }
}
