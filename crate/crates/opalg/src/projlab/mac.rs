//! Support-projection conditions for ranges of bicontractive projections,
//! and the Effros–Stormer style support projection of a unital projection on
//! a selfadjoint block algebra.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::OpMap;
use crate::mat::{derive_seed, CMat, Tolerances};
use crate::projlab::structure::generated_algebra;
use crate::space::OpSpace;
use crate::spectral::{herm_eig, op_norm, support, SupportSide};

/// Support-condition report: `p1` and `p2` are the left and right support
/// projections of the kernel ideal `C = (I-P)(D)`, and the two conditions
/// test whether the products of `C` with the range stay inside the ideal
/// generated by `C` on the corresponding side.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MacReport {
    pub p1: CMat,
    pub p2: CMat,
    pub p: CMat,
    pub left_condition: bool,
    pub right_condition: bool,
    /// `p1 p2 = 0` residual; the two supports are orthogonal for a
    /// square-zero ideal.
    pub orth_residual: f64,
}

/// Compute the support-condition report for a unital idempotent on its
/// domain algebra. The caller is expected to have applied the standard
/// reductions (compress to `qAq`, restrict to the generated algebra);
/// [`crate::projlab::classify_projection`] does this automatically.
pub fn mac_check(map: &OpMap, tol: &Tolerances) -> Result<MacReport> {
    let n = map.domain().ambient_dim();
    if !map.domain().contains_identity(tol) {
        return Err(Error::Precondition("support conditions need a unital projection".into()));
    }
    let unit_img = map.apply(&CMat::identity(n), tol)?;
    if !unit_img.approx_eq(&CMat::identity(n), tol.eps_eq * 10.0) {
        return Err(Error::Precondition("support conditions need a unital projection".into()));
    }
    let range = map
        .range_space(tol)?
        .ok_or_else(|| Error::Precondition("zero projection".into()))?;
    let d = generated_algebra(&range, tol)?;
    let restricted = map.restrict(&d, tol)?;
    let c = restricted.complement()?.range_space(tol)?;

    match c {
        None => {
            let zero = CMat::zeros(n, n);
            Ok(MacReport {
                p1: zero.clone(),
                p2: zero.clone(),
                p: zero,
                left_condition: true,
                right_condition: true,
                orth_residual: 0.0,
            })
        }
        Some(cspace) => {
            let p1 = support(cspace.onb(), SupportSide::Left, tol)?;
            let p2 = support(cspace.onb(), SupportSide::Right, tol)?;
            let p = p1.add(&p2);
            let orth_residual = op_norm(&p1.mul(&p2));
            let one = CMat::identity(n);
            let one_minus_p2 = one.sub(&p2);
            let one_minus_p1 = one.sub(&p1);
            let mut left = true;
            let mut right = true;
            for z in cspace.onb() {
                for y in range.onb() {
                    let zy = z.mul(&y.adjoint());
                    if op_norm(&zy.mul(&one_minus_p2)) > tol.eps_eq * zy.max_abs().max(1.0) {
                        left = false;
                    }
                    let yz = y.adjoint().mul(z);
                    if op_norm(&one_minus_p1.mul(&yz)) > tol.eps_eq * yz.max_abs().max(1.0) {
                        right = false;
                    }
                }
            }
            Ok(MacReport { p1, p2, p, left_condition: left, right_condition: right, orth_residual })
        }
    }
}

/// Support projection of a unital projection on a selfadjoint block algebra:
/// the perp of the supremum of the supports of positive kernel elements.
///
/// The supremum is accumulated by Dykstra alternation between the Hermitian
/// part of the kernel (with a trace probe forcing mass off the current
/// support) and the PSD cone. Postconditions `P(xe) = P(x)` and
/// `P(x) e = x e` on the algebra generated by the range are verified;
/// violations are reported as accumulation failures, not silently accepted.
pub fn support_e(map: &OpMap, tol: &Tolerances) -> Result<CMat> {
    let n = map.domain().ambient_dim();
    let flags = map.domain().structure_flags(tol);
    if !(flags.is_subalgebra && flags.is_selfadjoint && flags.is_unital) {
        return Err(Error::Precondition(
            "support projection needs a selfadjoint unital algebra domain".into(),
        ));
    }
    let unit_img = map.apply(&CMat::identity(n), tol)?;
    if !unit_img.approx_eq(&CMat::identity(n), tol.eps_eq * 10.0) {
        return Err(Error::Precondition("support projection needs a unital projection".into()));
    }

    let kernel = map.kernel_space(tol)?;
    let herm_basis = kernel.as_ref().map(hermitian_real_basis).unwrap_or_default();

    let mut s = CMat::zeros(n, n);
    if !herm_basis.is_empty() {
        let mut consecutive_failures = 0usize;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(tol.seed, 0x5e)); // probe stream
        while consecutive_failures < 32 {
            let perp = CMat::identity(n).sub(&s);
            if op_norm(&perp) < 0.5 {
                break; // s is already everything
            }
            // Probe: (1-s) itself first, then random PSD probes supported on
            // the complement.
            let probe = if consecutive_failures == 0 && s.max_abs() == 0.0 {
                perp.clone()
            } else {
                let mut g = CMat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        g.set(i, j, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                    }
                }
                let pg = perp.mul(&g);
                pg.mul(&pg.adjoint())
            };
            let probe_norm = probe.hs_norm();
            if probe_norm < 1e-12 {
                consecutive_failures += 1;
                continue;
            }
            match psd_kernel_element(&herm_basis, &probe, tol) {
                Some(h) => {
                    let joined = support(&[s.clone(), h], SupportSide::Left, tol)?;
                    if op_norm(&joined.sub(&s)) > 1e-7 {
                        s = joined;
                        consecutive_failures = 0;
                    } else {
                        consecutive_failures += 1;
                    }
                }
                None => consecutive_failures += 1,
            }
        }
    }
    let e = CMat::identity(n).sub(&s);

    // Postconditions on the algebra generated by the range.
    let range = map
        .range_space(tol)?
        .ok_or_else(|| Error::Precondition("zero projection".into()))?;
    let alg = generated_algebra(&range, tol)?;
    for x in alg.onb() {
        let xe = x.mul(&e);
        let px = map.apply(x, tol)?;
        let lhs = map.apply(&xe, tol).map_err(|_| {
            Error::NoConvergence("support accumulation: x e leaves the domain".into())
        })?;
        if op_norm(&lhs.sub(&px)) > 1e-7 * px.max_abs().max(1.0) {
            return Err(Error::NoConvergence(
                "support accumulation: P(x e) differs from P(x) on the generated algebra".into(),
            ));
        }
        if op_norm(&px.mul(&e).sub(&xe)) > 1e-7 * xe.max_abs().max(1.0) {
            return Err(Error::NoConvergence(
                "support accumulation: P(x) e differs from x e on the generated algebra".into(),
            ));
        }
    }
    Ok(e)
}

/// Real basis of the Hermitian elements of a complex matrix space.
fn hermitian_real_basis(space: &OpSpace) -> Vec<CMat> {
    let n = space.ambient_dim();
    let mut gens: Vec<CMat> = Vec::new();
    for b in space.onb() {
        gens.push(b.add(&b.adjoint()).scale_re(0.5));
        gens.push(b.scale(Complex64::new(0.0, 1.0)).add(&b.scale(Complex64::new(0.0, 1.0)).adjoint()).scale_re(0.5));
    }
    // keep the ones that stay inside the space and are independent over R
    let tol = Tolerances::default();
    let mut kept: Vec<CMat> = Vec::new();
    for g in gens {
        if g.hs_norm() < 1e-12 || !space.contains(&g, &tol) {
            continue;
        }
        // real Gram-Schmidt against kept
        let mut v = g.clone();
        for k in &kept {
            let c = k.hs_inner(&v).re / k.hs_inner(k).re;
            v = v.sub(&k.scale_re(c));
        }
        if v.hs_norm() > 1e-9 {
            kept.push(v.scale_re(1.0 / v.hs_norm()));
        }
        let _ = n;
    }
    kept
}

/// Dykstra between the affine slice
/// `{h in span_R(herm_basis) : Re<probe, h> = 1}` and the PSD cone.
fn psd_kernel_element(herm_basis: &[CMat], probe: &CMat, tol: &Tolerances) -> Option<CMat> {
    if herm_basis.is_empty() {
        return None;
    }
    let n = probe.rows();
    // Feasibility of the affine slice: the functional must be nonzero on the
    // subspace.
    let lin: Vec<f64> = herm_basis.iter().map(|h| probe.hs_inner(h).re).collect();
    let lin_norm2: f64 = lin.iter().map(|v| v * v).sum();
    if lin_norm2 < 1e-18 {
        return None;
    }
    let project_affine = |x: &CMat| -> CMat {
        // project onto the real span, then correct the affine constraint
        let coeffs: Vec<f64> = herm_basis.iter().map(|h| h.hs_inner(x).re).collect();
        let mut y = CMat::zeros(n, n);
        for (c, h) in coeffs.iter().zip(herm_basis) {
            y = y.add(&h.scale_re(*c));
        }
        let val: f64 = coeffs.iter().zip(&lin).map(|(c, l)| c * l).sum();
        let shift = (1.0 - val) / lin_norm2;
        for (l, h) in lin.iter().zip(herm_basis) {
            y = y.add(&h.scale_re(shift * l));
        }
        y
    };

    let mut x = project_affine(probe);
    let zero = CMat::zeros(n, n);
    let mut p = zero.clone();
    let mut q = zero;
    let iters = 300usize.min(tol.max_iter);
    for _ in 0..iters {
        let y = project_affine(&x.add(&p));
        p = x.add(&p).sub(&y);
        let yq = y.add(&q);
        let z = crate::spectral::psd_projection(&yq).ok()?;
        q = yq.sub(&z);
        let delta = z.sub(&x).hs_norm();
        x = z;
        if delta < 1e-12 {
            break;
        }
    }
    // Verify both memberships.
    let back = project_affine(&x);
    if back.sub(&x).hs_norm() > 1e-7 * x.hs_norm().max(1.0) {
        return None;
    }
    let lam_min = herm_eig(&x).ok()?.values.first().copied().unwrap_or(0.0);
    if lam_min < -1e-8 || x.hs_norm() < 1e-8 {
        return None;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn full_m2() -> OpSpace {
        OpSpace::new(
            2,
            vec![CMat::unit(2, 0, 0), CMat::unit(2, 0, 1), CMat::unit(2, 1, 0), CMat::unit(2, 1, 1)],
            "M2",
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn support_of_identity_map_is_full() {
        let id = OpMap::identity(&full_m2());
        let e = support_e(&id, &tol()).unwrap();
        assert!(e.approx_eq(&CMat::identity(2), 1e-8));
    }

    #[test]
    fn parity_kernel_has_no_positive_elements() {
        // P = (I + swap)/2 on the diagonal algebra: kernel spans diag(1,-1),
        // which contains no nonzero PSD element, so e = I.
        let d2 = OpSpace::new(2, vec![CMat::unit(2, 0, 0), CMat::unit(2, 1, 1)], "D2", &tol()).unwrap();
        let half = CMat::identity(2).scale_re(0.5);
        let p = OpMap::new("parity", d2, 2, vec![half.clone(), half]).unwrap();
        let e = support_e(&p, &tol()).unwrap();
        assert!(e.approx_eq(&CMat::identity(2), 1e-8));
    }

    #[test]
    fn diagonal_expectation_mac_is_vacuous() {
        let s = full_m2();
        let images = vec![CMat::unit(2, 0, 0), CMat::zeros(2, 2), CMat::zeros(2, 2), CMat::unit(2, 1, 1)];
        let p = OpMap::new("diag-exp", s, 2, images).unwrap();
        // restrict to the generated algebra of the range = the diagonal
        let d2 = OpSpace::new(2, vec![CMat::unit(2, 0, 0), CMat::unit(2, 1, 1)], "D2", &tol()).unwrap();
        let restricted = p.restrict(&d2, &tol()).unwrap();
        let rep = mac_check(&restricted, &tol()).unwrap();
        assert!(rep.left_condition && rep.right_condition);
        assert_eq!(rep.p.max_abs(), 0.0);
    }
}
