//! Linear maps between operator spaces, given by images of the domain basis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{CMat, Tolerances};
use crate::space::OpSpace;

/// A linear map `S -> M_m` determined by the images of the domain basis.
#[derive(Clone, Debug)]
pub struct OpMap {
    name: String,
    domain: OpSpace,
    codomain_dim: usize,
    images: Vec<CMat>,
    /// Images of the orthonormal basis, derived once.
    onb_images: Vec<CMat>,
}

impl OpMap {
    pub fn new(name: &str, domain: OpSpace, codomain_dim: usize, images: Vec<CMat>) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::Dimension(format!(
                "map '{name}': {} images for a domain of dimension {}",
                images.len(),
                domain.dim()
            )));
        }
        for img in &images {
            if img.rows() != codomain_dim || img.cols() != codomain_dim {
                return Err(Error::Dimension(format!(
                    "map '{name}': image is {}x{}, codomain is {}",
                    img.rows(),
                    img.cols(),
                    codomain_dim
                )));
            }
        }
        let onb_images = derive_onb_images(&domain, codomain_dim, &images);
        Ok(OpMap { name: name.to_string(), domain, codomain_dim, images, onb_images })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &OpSpace {
        &self.domain
    }

    pub fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    pub fn images(&self) -> &[CMat] {
        &self.images
    }

    pub fn onb_images(&self) -> &[CMat] {
        &self.onb_images
    }

    pub fn is_endomap(&self) -> bool {
        self.codomain_dim == self.domain.ambient_dim()
    }

    /// Evaluate on an element of the domain span.
    pub fn apply(&self, x: &CMat, tol: &Tolerances) -> Result<CMat> {
        let coeffs = self.domain.basis_coeffs(x, tol)?;
        let mut out = CMat::zeros(self.codomain_dim, self.codomain_dim);
        for (c, img) in coeffs.iter().zip(&self.images) {
            if c.norm_sqr() > 0.0 {
                out = out.add(&img.scale(*c));
            }
        }
        Ok(out)
    }

    /// Fast evaluation assuming `x` already lies in the span: HS-projection
    /// coefficients against the onb, no residual check.
    pub fn apply_unchecked(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.codomain_dim, self.codomain_dim);
        for (q, img) in self.domain.onb().iter().zip(&self.onb_images) {
            let c = q.hs_inner(x);
            if c.norm_sqr() > 0.0 {
                out = out.add(&img.scale(c));
            }
        }
        out
    }

    /// Evaluate the amplification `phi (x) id_k` blockwise on `X in M_k(S)`.
    pub fn apply_amplified(&self, x: &CMat, k: usize) -> CMat {
        let n = self.domain.ambient_dim();
        let m = self.codomain_dim;
        assert_eq!(x.rows(), k * n, "amplified input has wrong size");
        let mut out = CMat::zeros(k * m, k * m);
        for i in 0..k {
            for j in 0..k {
                let blk = x.block(i * n, j * n, n, n);
                let img = self.apply_unchecked(&blk);
                out.set_block(i * m, j * m, &img);
            }
        }
        out
    }

    /// HS-adjoint of the amplification applied to `W in M_{km}`: lands in
    /// `M_k(S)` by construction. This is the ascent direction for the norm
    /// search.
    pub fn adjoint_amplified(&self, w: &CMat, k: usize) -> CMat {
        let n = self.domain.ambient_dim();
        let m = self.codomain_dim;
        assert_eq!(w.rows(), k * m, "adjoint input has wrong size");
        let mut out = CMat::zeros(k * n, k * n);
        for i in 0..k {
            for j in 0..k {
                let blk = w.block(i * m, j * m, m, m);
                let mut g = CMat::zeros(n, n);
                for (q, img) in self.domain.onb().iter().zip(&self.onb_images) {
                    let c = img.hs_inner(&blk);
                    if c.norm_sqr() > 0.0 {
                        g = g.add(&q.scale(c));
                    }
                }
                out.set_block(i * n, j * n, &g);
            }
        }
        out
    }

    /// Identity map on a space (requires the space to live in `M_n` with
    /// codomain `M_n`).
    pub fn identity(space: &OpSpace) -> OpMap {
        let images = space.basis().to_vec();
        OpMap::new(&format!("id[{}]", space.name()), space.clone(), space.ambient_dim(), images)
            .expect("identity images match by construction")
    }

    pub fn zero(space: &OpSpace, codomain_dim: usize) -> OpMap {
        let images = vec![CMat::zeros(codomain_dim, codomain_dim); space.dim()];
        OpMap::new(&format!("0[{}]", space.name()), space.clone(), codomain_dim, images)
            .expect("zero images match by construction")
    }

    /// `I - self` for endomaps.
    pub fn complement(&self) -> Result<OpMap> {
        if !self.is_endomap() {
            return Err(Error::Precondition("complement needs an endomap".into()));
        }
        let images: Vec<CMat> = self
            .domain
            .basis()
            .iter()
            .zip(&self.images)
            .map(|(b, img)| b.sub(img))
            .collect();
        OpMap::new(&format!("I-{}", self.name), self.domain.clone(), self.codomain_dim, images)
    }

    /// `2 self - I` for endomaps.
    pub fn reflection(&self) -> Result<OpMap> {
        if !self.is_endomap() {
            return Err(Error::Precondition("reflection needs an endomap".into()));
        }
        let images: Vec<CMat> = self
            .domain
            .basis()
            .iter()
            .zip(&self.images)
            .map(|(b, img)| img.scale_re(2.0).sub(b))
            .collect();
        OpMap::new(&format!("2{}-I", self.name), self.domain.clone(), self.codomain_dim, images)
    }

    /// `I - self + e^{it} self` for endomaps.
    pub fn phase_mix(&self, t: f64) -> Result<OpMap> {
        if !self.is_endomap() {
            return Err(Error::Precondition("phase_mix needs an endomap".into()));
        }
        let w = Complex64::new(t.cos() - 1.0, t.sin());
        let images: Vec<CMat> = self
            .domain
            .basis()
            .iter()
            .zip(&self.images)
            .map(|(b, img)| b.add(&img.scale(w)))
            .collect();
        OpMap::new(
            &format!("I-{0}+e^it {0}", self.name),
            self.domain.clone(),
            self.codomain_dim,
            images,
        )
    }

    /// Composition `self . other` (other applied first). The images of
    /// `other` must land in the domain span of `self`.
    pub fn compose(&self, other: &OpMap, tol: &Tolerances) -> Result<OpMap> {
        let images: Result<Vec<CMat>> = other.images.iter().map(|img| self.apply(img, tol)).collect();
        OpMap::new(
            &format!("{}.{}", self.name, other.name),
            other.domain.clone(),
            self.codomain_dim,
            images?,
        )
    }

    /// Max residual of `P(P(b)) - P(b)` over the basis, in operator norm.
    pub fn idempotent_residual(&self, tol: &Tolerances) -> Result<f64> {
        if !self.is_endomap() {
            return Err(Error::Precondition("idempotency needs an endomap".into()));
        }
        let mut worst = 0.0f64;
        for img in &self.images {
            let twice = self.apply(img, tol)?;
            worst = worst.max(crate::spectral::op_norm(&twice.sub(img)));
        }
        Ok(worst)
    }

    /// Range of the map as a subspace of the codomain; None when the map is
    /// zero.
    pub fn range_space(&self, tol: &Tolerances) -> Result<Option<OpSpace>> {
        OpSpace::span(self.codomain_dim, &self.images, &format!("ran({})", self.name), tol)
    }

    /// Kernel of the map inside the domain; None when the map is injective.
    /// Basis vectors of the kernel are returned as matrices in the domain.
    pub fn kernel_space(&self, tol: &Tolerances) -> Result<Option<OpSpace>> {
        let d = self.domain.dim();
        let m2 = self.codomain_dim * self.codomain_dim;
        // Columns are the vectorized onb images; the kernel in coefficient
        // space comes from the small singular values.
        let mut mat = CMat::zeros(m2.max(1), d);
        for (j, img) in self.onb_images.iter().enumerate() {
            for (idx, z) in img.data().iter().enumerate() {
                mat.set(idx, j, *z);
            }
        }
        let svd = crate::spectral::svd(&mat);
        let sig_max = svd.sigma.first().copied().unwrap_or(0.0);
        let cut = (tol.eps_psd * sig_max.max(1.0)).max(1e-12);
        let mut gens: Vec<CMat> = Vec::new();
        for j in 0..d {
            let sig = svd.sigma.get(j).copied().unwrap_or(0.0);
            if sig <= cut {
                let mut g = CMat::zeros(self.domain.ambient_dim(), self.domain.ambient_dim());
                for (i, q) in self.domain.onb().iter().enumerate() {
                    g = g.add(&q.scale(svd.v.get(i, j)));
                }
                gens.push(g);
            }
        }
        if gens.is_empty() {
            return Ok(None);
        }
        OpSpace::span(self.domain.ambient_dim(), &gens, &format!("ker({})", self.name), tol)
    }

    /// Restriction of an endomap to a subspace of its domain; the images stay
    /// whatever they were.
    pub fn restrict(&self, sub: &OpSpace, tol: &Tolerances) -> Result<OpMap> {
        let images: Result<Vec<CMat>> = sub.basis().iter().map(|b| self.apply(b, tol)).collect();
        OpMap::new(&format!("{}|{}", self.name, sub.name()), sub.clone(), self.codomain_dim, images?)
    }
}

#[derive(Serialize, Deserialize)]
struct OpMapWire {
    name: String,
    domain: OpSpace,
    codomain_dim: usize,
    images: Vec<CMat>,
}

impl Serialize for OpMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OpMapWire {
            name: self.name.clone(),
            domain: self.domain.clone(),
            codomain_dim: self.codomain_dim,
            images: self.images.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OpMap {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = OpMapWire::deserialize(deserializer)?;
        OpMap::new(&wire.name, wire.domain, wire.codomain_dim, wire.images)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

fn derive_onb_images(domain: &OpSpace, codomain_dim: usize, images: &[CMat]) -> Vec<CMat> {
    // onb_j = sum_i b2o[i][j] basis_i, so the onb image is the same
    // combination of the basis images. Recover b2o through basis_coeffs of
    // each onb element (exact by construction).
    let tol = Tolerances::default();
    domain
        .onb()
        .iter()
        .map(|q| {
            let coeffs = domain
                .basis_coeffs(q, &tol)
                .expect("onb element lies in its own span");
            let mut img = CMat::zeros(codomain_dim, codomain_dim);
            for (c, bimg) in coeffs.iter().zip(images) {
                if c.norm_sqr() > 0.0 {
                    img = img.add(&bimg.scale(*c));
                }
            }
            img
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn five_space() -> OpSpace {
        let n5 = CMat::unit(5, 0, 1)
            .add(&CMat::unit(5, 1, 2))
            .add(&CMat::unit(5, 3, 4).scale_re(2.0));
        OpSpace::new(5, vec![CMat::identity(5), n5, CMat::unit(5, 0, 2)], "A5", &tol()).unwrap()
    }

    fn p5() -> OpMap {
        let s = five_space();
        let images = vec![s.basis()[0].clone(), s.basis()[1].clone(), CMat::zeros(5, 5)];
        OpMap::new("P5", s, 5, images).unwrap()
    }

    #[test]
    fn apply_kills_corner_entry() {
        let p = p5();
        let out = p.apply(&CMat::unit(5, 0, 2), &tol()).unwrap();
        assert_eq!(out.max_abs(), 0.0);
        let id = p.apply(&CMat::identity(5), &tol()).unwrap();
        assert!(id.approx_eq(&CMat::identity(5), 1e-10));
    }

    #[test]
    fn apply_is_basis_independent() {
        let p = p5();
        let x = p.domain().basis()[1]
            .scale(Complex64::new(0.3, 1.0))
            .add(&p.domain().basis()[2].scale(Complex64::new(-2.0, 0.25)));
        let via_basis = p.apply(&x, &tol()).unwrap();
        let via_onb = p.apply_unchecked(&x);
        assert!(via_basis.approx_eq(&via_onb, 1e-10));
    }

    #[test]
    fn apply_rejects_outside_span() {
        let p = p5();
        assert!(matches!(
            p.apply(&CMat::unit(5, 4, 0), &tol()),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn idempotent_and_kernel() {
        let p = p5();
        assert!(p.idempotent_residual(&tol()).unwrap() < 1e-12);
        let k = p.kernel_space(&tol()).unwrap().expect("P5 has a kernel");
        assert_eq!(k.dim(), 1);
        assert!(k.contains(&CMat::unit(5, 0, 2), &tol()));
        let id = OpMap::identity(&five_space());
        assert!(id.kernel_space(&tol()).unwrap().is_none());
    }

    #[test]
    fn amplified_apply_matches_blockwise() {
        let p = p5();
        let x = CMat::unit(5, 0, 2)
            .embed(10, 10, 0, 5)
            .add(&CMat::identity(5).embed(10, 10, 5, 5));
        let y = p.apply_amplified(&x, 2);
        assert_eq!(y.block(0, 5, 5, 5).max_abs(), 0.0);
        assert!(y.block(5, 5, 5, 5).approx_eq(&CMat::identity(5), 1e-12));
    }

    #[test]
    fn adjoint_is_hs_adjoint() {
        let p = p5();
        // <phi(x), w> = <x, phi^*(w)> for x in the span
        let x = p.domain().basis()[1].clone();
        let mut w = CMat::zeros(5, 5);
        w.set(0, 1, Complex64::new(0.5, 1.0));
        w.set(3, 4, Complex64::new(-1.0, 0.25));
        let lhs = p.apply_unchecked(&x).hs_inner(&w);
        let rhs = x.hs_inner(&p.adjoint_amplified(&w, 1));
        assert!((lhs - rhs.conj()).norm() < 1e-10 || (lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn complement_and_reflection() {
        let p = p5();
        let c = p.complement().unwrap();
        let e13 = CMat::unit(5, 0, 2);
        assert!(c.apply(&e13, &tol()).unwrap().approx_eq(&e13, 1e-12));
        let r = p.reflection().unwrap();
        assert!(r.apply(&e13, &tol()).unwrap().approx_eq(&e13.neg(), 1e-12));
        let pm = p.phase_mix(std::f64::consts::PI).unwrap();
        // I - P + e^{i pi} P = I - 2P
        let direct = r.apply(&e13, &tol()).unwrap().neg();
        assert!(pm.apply(&e13, &tol()).unwrap().approx_eq(&direct, 1e-12));
    }

    #[test]
    fn map_json_round_trip() {
        let p = p5();
        let j = serde_json::to_string(&p).unwrap();
        let back: OpMap = serde_json::from_str(&j).unwrap();
        assert_eq!(back.codomain_dim(), 5);
        assert_eq!(back.domain().dim(), 3);
        let out = back.apply(&CMat::unit(5, 0, 2), &tol()).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }
}
