//! The nilpotency/decay suite for the kernel ideal of a unital projection
//! whose complement is contractive on Hermitian parts.
//!
//! For each normalized element `x` of `C = (I-P)(D)` the suite checks the
//! part-norm equalities of the Hermitian/skew decomposition, the tripotent
//! identities (`u(a)^2 = u(b)^2`, `u(x)^2 = 0`, orthogonal splitting
//! `x = u(x) + y`), `||Re x|| = 1/2`, nilpotency, and the decay bounds
//! `||x^{2^n}|| <= 2 / 2^{2^n}`. Quasi-regularity of each element is
//! reported but never asserted.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::OpMap;
use crate::mat::{derive_seed, CMat, Tolerances};
use crate::projlab::structure::generated_algebra;
use crate::spectral::{herm_decompose, op_norm, svd, tripotent_u};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementReport {
    /// Max deviation among the four part norms `||a+||, ||a-||, ||b+||, ||b-||`.
    pub m1_residual: f64,
    /// `||u(a)^2 - u(b)^2||` after scaling the Hermitian part to norm 1;
    /// None when the Hermitian part vanishes.
    pub m2_residual: Option<f64>,
    /// `||Re x||` for `||x|| = 1`.
    pub re_norm: f64,
    /// `||u(x)^2||`.
    pub u_sq_norm: f64,
    /// Max norm among `u y, u y*, y u, y* u` for `y = x - u(x)`.
    pub orth_residual: f64,
    pub nilpotent: bool,
    /// `(n, ||x^{2^n}||, 2/2^{2^n})` for n = 1..4.
    pub slow_bounds: Vec<(usize, f64, f64)>,
    /// `1 - x` invertible (smallest singular value above the PSD floor).
    pub quasi_regular: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Section5Report {
    /// Sampled contractivity of `I - P` on Hermitian parts: the hypothesis
    /// under which the per-element facts are guaranteed.
    pub re_contractive_sampled: bool,
    pub re_contractive_worst_ratio: f64,
    /// Support projection supplied by the caller (from the selfadjoint
    /// extension when one exists); consistency `e z = z e = 0` on the kernel
    /// ideal is recorded in `e_consistency`.
    pub e: Option<CMat>,
    pub e_consistency: Option<f64>,
    /// One record per orthonormal basis element of the kernel ideal;
    /// empty when the ideal vanishes (a vacuous pass).
    pub elements: Vec<ElementReport>,
}

impl Section5Report {
    pub fn all_slow_bounds_hold(&self, eps: f64) -> bool {
        self.elements
            .iter()
            .all(|e| e.slow_bounds.iter().all(|(_, v, b)| *v <= *b + eps))
    }
}

/// Run the suite for a unital projection. `e_hint` is the support projection
/// of a selfadjoint extension when the caller has one.
pub fn section5_suite(map: &OpMap, e_hint: Option<&CMat>, tol: &Tolerances) -> Result<Section5Report> {
    let n = map.domain().ambient_dim();
    let unit_img = map.apply(&CMat::identity(n), tol).map_err(|_| {
        Error::Precondition("the suite needs a unital projection".into())
    })?;
    if !unit_img.approx_eq(&CMat::identity(n), tol.eps_eq * 10.0) {
        return Err(Error::Precondition("the suite needs a unital projection".into()));
    }

    // Hypothesis test: I - P contractive on Hermitian parts, sampled.
    let complement = map.complement()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(tol.seed, 0x5ec5));
    let mut worst_ratio = 0.0f64;
    for _ in 0..64 {
        let mut g = CMat::zeros(n, n);
        for q in map.domain().onb() {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            g = g.add(&q.scale(c));
        }
        let re_in = g.add(&g.adjoint()).scale_re(0.5);
        let nin = op_norm(&re_in);
        if nin < 1e-9 {
            continue;
        }
        let img = complement.apply_unchecked(&g);
        let re_out = img.add(&img.adjoint()).scale_re(0.5);
        worst_ratio = worst_ratio.max(op_norm(&re_out) / nin);
    }
    let re_contractive_sampled = worst_ratio <= 1.0 + tol.eps_norm;

    // Kernel ideal C = (I-P)(D).
    let range = map
        .range_space(tol)?
        .ok_or_else(|| Error::Precondition("zero projection".into()))?;
    let d = generated_algebra(&range, tol)?;
    let restricted = map.restrict(&d, tol)?;
    let c = restricted.complement()?.range_space(tol)?;

    let mut elements = Vec::new();
    let mut e_consistency = None;
    if let Some(cspace) = &c {
        if let Some(e) = e_hint {
            let mut worst = 0.0f64;
            for z in cspace.onb() {
                worst = worst.max(op_norm(&e.mul(z)));
                worst = worst.max(op_norm(&z.mul(e)));
            }
            e_consistency = Some(worst);
        }
        for z in cspace.onb() {
            let nrm = op_norm(z);
            if nrm < tol.eps_eq {
                continue;
            }
            let x = z.scale_re(1.0 / nrm);
            elements.push(element_report(&x, n, tol)?);
        }
    }

    Ok(Section5Report {
        re_contractive_sampled,
        re_contractive_worst_ratio: worst_ratio,
        e: e_hint.cloned(),
        e_consistency,
        elements,
    })
}

fn element_report(x: &CMat, ambient: usize, tol: &Tolerances) -> Result<ElementReport> {
    let parts = herm_decompose(x)?;
    let norms = [
        op_norm(&parts.a_plus),
        op_norm(&parts.a_minus),
        op_norm(&parts.b_plus),
        op_norm(&parts.b_minus),
    ];
    let m1_residual = norms.iter().cloned().fold(f64::MIN, f64::max)
        - norms.iter().cloned().fold(f64::MAX, f64::min);

    let a_norm = op_norm(&parts.a);
    let m2_residual = if a_norm > 1e-9 {
        let a1 = parts.a.scale_re(1.0 / a_norm);
        let mut b1 = parts.b.scale_re(1.0 / a_norm);
        let bn = op_norm(&b1);
        if bn > 1.0 {
            b1 = b1.scale_re(1.0 / bn);
        }
        let ua = tripotent_u(&a1, tol)?;
        let ub = tripotent_u(&b1, tol)?;
        Some(op_norm(&ua.mul(&ua).sub(&ub.mul(&ub))))
    } else {
        None
    };

    let re_norm = a_norm;
    let u = tripotent_u(x, tol)?;
    let u_sq_norm = op_norm(&u.mul(&u));
    let y = x.sub(&u);
    let orth_residual = [
        op_norm(&u.mul(&y)),
        op_norm(&u.mul(&y.adjoint())),
        op_norm(&y.mul(&u)),
        op_norm(&y.adjoint().mul(&u)),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let mut nilpotent = false;
    let mut power = x.clone();
    for _ in 1..ambient {
        power = power.mul(x);
        if op_norm(&power) < tol.eps_eq {
            nilpotent = true;
            break;
        }
    }

    let mut slow_bounds = Vec::with_capacity(4);
    let mut sq = x.clone();
    for nexp in 1..=4usize {
        sq = sq.mul(&sq);
        let bound = 2.0 / 2f64.powi(1 << nexp);
        slow_bounds.push((nexp, op_norm(&sq), bound));
    }

    // quasi-regularity: 1 - x invertible
    let one_minus = CMat::identity(ambient_of(x)).sub(x);
    let s = svd(&one_minus);
    let quasi_regular = s.sigma.last().copied().unwrap_or(0.0) > tol.eps_psd;

    Ok(ElementReport {
        m1_residual,
        m2_residual,
        re_norm,
        u_sq_norm,
        orth_residual,
        nilpotent,
        slow_bounds,
        quasi_regular,
    })
}

fn ambient_of(x: &CMat) -> usize {
    x.rows()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::OpSpace;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn p5() -> OpMap {
        let n5 = CMat::unit(5, 0, 1)
            .add(&CMat::unit(5, 1, 2))
            .add(&CMat::unit(5, 3, 4).scale_re(2.0));
        let s = OpSpace::new(5, vec![CMat::identity(5), n5.clone(), CMat::unit(5, 0, 2)], "A5", &tol()).unwrap();
        let images = vec![CMat::identity(5), n5, CMat::zeros(5, 5)];
        OpMap::new("P5", s, 5, images).unwrap()
    }

    #[test]
    fn corner_ideal_element_has_the_expected_profile() {
        let rep = section5_suite(&p5(), None, &tol()).unwrap();
        assert!(rep.re_contractive_sampled, "worst ratio {}", rep.re_contractive_worst_ratio);
        assert_eq!(rep.elements.len(), 1);
        let e = &rep.elements[0];
        assert!((e.re_norm - 0.5).abs() < 1e-9);
        assert!(e.u_sq_norm < 1e-9);
        assert!(e.m1_residual < 1e-9);
        assert!(e.m2_residual.unwrap() < 1e-9);
        assert!(e.orth_residual < 1e-9);
        assert!(e.nilpotent);
        for (nexp, val, bound) in &e.slow_bounds {
            assert!(val <= &(bound + 1e-9), "power 2^{nexp}: {val} > {bound}");
        }
        assert!(e.quasi_regular);
    }

    #[test]
    fn empty_ideal_gives_vacuous_report() {
        // diagonal expectation on M2: the generated algebra equals the range
        let s = OpSpace::new(
            2,
            vec![CMat::unit(2, 0, 0), CMat::unit(2, 0, 1), CMat::unit(2, 1, 0), CMat::unit(2, 1, 1)],
            "M2",
            &tol(),
        )
        .unwrap();
        let images = vec![CMat::unit(2, 0, 0), CMat::zeros(2, 2), CMat::zeros(2, 2), CMat::unit(2, 1, 1)];
        let p = OpMap::new("diag-exp", s, 2, images).unwrap();
        let rep = section5_suite(&p, None, &tol()).unwrap();
        assert!(rep.elements.is_empty());
        assert!(rep.all_slow_bounds_hold(1e-9));
    }
}
