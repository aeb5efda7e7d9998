//! Range/kernel structure of idempotents and the symmetric-projection
//! pipeline.

use serde::{Deserialize, Serialize};

use crate::cert::{check_certificate, Certificate};
use crate::error::{Error, Result};
use crate::map::OpMap;
use crate::mat::{CMat, Tolerances};
use crate::norms::{norm_lower, smith_level, SearchParams, DEFAULT_LEVEL_SIDE};
use crate::space::OpSpace;
use crate::spectral::op_norm;

/// The algebra generated by a space: product-span saturation, which
/// terminates because dimensions are bounded by the square of the ambient
/// dimension.
pub fn generated_algebra(space: &OpSpace, tol: &Tolerances) -> Result<OpSpace> {
    let n = space.ambient_dim();
    let mut gens: Vec<CMat> = space.basis().to_vec();
    let mut current = OpSpace::span(n, &gens, &format!("alg({})", space.name()), tol)?
        .ok_or_else(|| Error::Precondition("generated algebra of the zero space".into()))?;
    loop {
        let mut new_gens: Vec<CMat> = Vec::new();
        for x in current.onb() {
            for y in current.onb() {
                let xy = x.mul(y);
                if xy.hs_norm() > tol.eps_eq && !current.contains(&xy, tol) {
                    new_gens.push(xy);
                }
            }
        }
        if new_gens.is_empty() {
            return Ok(current);
        }
        gens.extend(new_gens);
        let next = OpSpace::span(n, &gens, &format!("alg({})", space.name()), tol)?
            .expect("nonempty generating family");
        if next.dim() == current.dim() {
            return Ok(next);
        }
        current = next;
        if current.dim() >= n * n {
            return Ok(current);
        }
    }
}

/// Structure report for the range and kernel ideal of an idempotent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RangeKernelReport {
    /// `C^2 subset Ran(P)` where `C = (I-P)(D)`.
    pub c2_in_range: bool,
    /// `Ran(P) C + C Ran(P) subset C`.
    pub range_module_over_c: bool,
    /// All pairwise products in `C` vanish.
    pub squarezero: bool,
    /// Max deviation in `P(P(a)b) = P(P(a)P(b)) = P(aP(b))` over basis pairs.
    pub condexp_residual: f64,
    /// Max associativity defect of the product `(x, y) -> P(xy)` on the range.
    pub choi_effros_assoc: f64,
    /// Dimension of `C` (0 when the kernel ideal vanishes).
    pub kernel_ideal_dim: usize,
}

/// Conditional-expectation residual of the two module identities, over all
/// basis pairs of the domain.
pub fn condexp_residual(map: &OpMap, tol: &Tolerances) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in map.domain().onb() {
        let pa = map.apply_unchecked(a);
        for b in map.domain().onb() {
            let pb = map.apply_unchecked(b);
            let lhs1 = map.apply(&pa.mul(b), tol)?;
            let mid = map.apply(&pa.mul(&pb), tol)?;
            let lhs2 = map.apply(&a.mul(&pb), tol)?;
            worst = worst.max(op_norm(&lhs1.sub(&mid)));
            worst = worst.max(op_norm(&lhs2.sub(&mid)));
        }
    }
    Ok(worst)
}

/// Range/kernel structure of an idempotent on an algebra domain: computes
/// `D` (algebra generated by the range), `C = (I-P)(D)`, and the inclusion
/// chain.
pub fn range_kernel_structure(map: &OpMap, tol: &Tolerances) -> Result<RangeKernelReport> {
    let residual = map.idempotent_residual(tol)?;
    if residual > tol.eps_eq.max(1e-9) {
        return Err(Error::NotIdempotent { residual });
    }
    let range = map
        .range_space(tol)?
        .ok_or_else(|| Error::Precondition("zero projection has no structure to report".into()))?;
    let d = generated_algebra(&range, tol)?;
    for b in d.basis() {
        if !map.domain().contains(b, tol) {
            return Err(Error::Precondition(
                "the algebra generated by the range leaves the domain".into(),
            ));
        }
    }
    let restricted = map.restrict(&d, tol)?;
    let c = restricted.complement()?.range_space(tol)?;

    let condexp = condexp_residual(map, tol)?;

    // associativity of P(xy) on the range
    let mut assoc = 0.0f64;
    for x in range.onb() {
        for y in range.onb() {
            for z in range.onb() {
                let p_xy = map.apply(&x.mul(y), tol)?;
                let p_yz = map.apply(&y.mul(z), tol)?;
                let left = map.apply(&p_xy.mul(z), tol)?;
                let right = map.apply(&x.mul(&p_yz), tol)?;
                assoc = assoc.max(op_norm(&left.sub(&right)));
            }
        }
    }

    let (c2_in_range, range_module_over_c, squarezero, cdim) = match &c {
        None => (true, true, true, 0),
        Some(cspace) => {
            let mut c2_in = true;
            let mut module = true;
            let mut sq = true;
            for z in cspace.onb() {
                for w in cspace.onb() {
                    let zw = z.mul(w);
                    if op_norm(&zw) >= tol.eps_eq {
                        sq = false;
                    }
                    if !range.contains(&zw, tol) && op_norm(&zw) >= tol.eps_eq {
                        c2_in = false;
                    }
                }
                for y in range.onb() {
                    for prod in [y.mul(z), z.mul(y)] {
                        if op_norm(&prod) >= tol.eps_eq && !cspace.contains(&prod, tol) {
                            module = false;
                        }
                    }
                }
            }
            (c2_in, module, sq, cspace.dim())
        }
    };

    Ok(RangeKernelReport {
        c2_in_range,
        range_module_over_c,
        squarezero,
        condexp_residual: condexp,
        choi_effros_assoc: assoc,
        kernel_ideal_dim: cdim,
    })
}

/// Result of the symmetric decomposition `P(a) = (a + theta(a)(2q - 1)) / 2`.
#[derive(Clone, Debug)]
pub enum SymmetricOutcome {
    Symmetric {
        theta: OpMap,
        q: CMat,
        formula_residual: f64,
    },
    /// Some check failed: the reflection is not contractive at a tested
    /// level, or the algebraic identities break. Carries the witness.
    Failed {
        reason: String,
        witness: Option<CMat>,
        lower_bound: Option<f64>,
    },
}

impl SymmetricOutcome {
    pub fn is_symmetric(&self) -> bool {
        matches!(self, SymmetricOutcome::Symmetric { .. })
    }
}

/// Try to decompose an idempotent as a symmetric projection. Symmetry
/// evidence is a certificate for `2P - I` when supplied, otherwise lower
/// bounds at the effective level must stay at or below 1.
pub fn symmetric_decompose(
    map: &OpMap,
    reflection_cert: Option<&Certificate>,
    tol: &Tolerances,
    params: &SearchParams,
) -> Result<SymmetricOutcome> {
    let residual = map.idempotent_residual(tol)?;
    if residual > tol.eps_eq.max(1e-9) {
        return Err(Error::NotIdempotent { residual });
    }
    let theta = map.reflection()?;
    let level = smith_level(map, DEFAULT_LEVEL_SIDE);
    let report = norm_lower(&theta, level, tol, params)?;
    if report.lower_bound > 1.0 + tol.eps_norm {
        return Ok(SymmetricOutcome::Failed {
            reason: format!(
                "reflection has norm at least {:.9} at level {}",
                report.lower_bound, report.level
            ),
            witness: Some(report.witness),
            lower_bound: Some(report.lower_bound),
        });
    }
    if let Some(c) = reflection_cert {
        let chk = check_certificate(c, &theta, tol);
        if !chk.valid {
            return Ok(SymmetricOutcome::Failed {
                reason: format!("reflection certificate invalid: {}", chk.failure.unwrap_or_default()),
                witness: None,
                lower_bound: Some(report.lower_bound),
            });
        }
    }
    let n = map.domain().ambient_dim();
    if !map.domain().contains_identity(tol) {
        return Ok(SymmetricOutcome::Failed {
            reason: "domain has no identity, so q = P(1) is undefined".into(),
            witness: None,
            lower_bound: None,
        });
    }
    let q = map.apply(&CMat::identity(n), tol)?;
    let scale = q.max_abs().max(1.0);
    if !(q.is_hermitian(tol.eps_eq * scale) && q.mul(&q).approx_eq(&q, tol.eps_eq * scale)) {
        return Ok(SymmetricOutcome::Failed {
            reason: "q = P(1) is not an orthogonal projection".into(),
            witness: Some(q),
            lower_bound: None,
        });
    }
    // theta . theta = I
    for b in map.domain().basis() {
        let tt = theta.apply(&theta.apply(b, tol)?, tol)?;
        if op_norm(&tt.sub(b)) > 1e-8 * op_norm(b).max(1.0) {
            return Ok(SymmetricOutcome::Failed {
                reason: "reflection is not an involution".into(),
                witness: Some(b.clone()),
                lower_bound: None,
            });
        }
    }
    // theta multiplicative on the basis
    for x in map.domain().onb() {
        for y in map.domain().onb() {
            let xy = x.mul(y);
            let lhs = match theta.apply(&xy, tol) {
                Ok(v) => v,
                Err(_) => {
                    return Ok(SymmetricOutcome::Failed {
                        reason: "domain is not closed under products".into(),
                        witness: Some(xy),
                        lower_bound: None,
                    })
                }
            };
            let rhs = theta.apply_unchecked(x).mul(&theta.apply_unchecked(y));
            if op_norm(&lhs.sub(&rhs)) > 1e-8 * op_norm(&xy).max(1.0) {
                return Ok(SymmetricOutcome::Failed {
                    reason: "reflection is not multiplicative".into(),
                    witness: Some(xy),
                    lower_bound: None,
                });
            }
        }
    }
    // theta(q) = q
    let tq = theta.apply(&q, tol)?;
    if op_norm(&tq.sub(&q)) > 1e-8 {
        return Ok(SymmetricOutcome::Failed {
            reason: "reflection does not fix q".into(),
            witness: Some(q),
            lower_bound: None,
        });
    }
    // displayed formula
    let two_q_minus_1 = q.scale_re(2.0).sub(&CMat::identity(n));
    let mut formula_residual = 0.0f64;
    for b in map.domain().basis() {
        let lhs = map.apply(b, tol)?;
        let rhs = b.add(&theta.apply(b, tol)?.mul(&two_q_minus_1)).scale_re(0.5);
        formula_residual = formula_residual.max(op_norm(&lhs.sub(&rhs)));
    }
    Ok(SymmetricOutcome::Symmetric { theta, q, formula_residual })
}

/// Build the projection `P(a) = (a + theta(a)(2q - 1)) / 2` from a period-2
/// multiplicative map and a fixed projection. Preconditions are checked and
/// reported by name.
pub fn symmetric_build(theta: &OpMap, q: &CMat, tol: &Tolerances) -> Result<OpMap> {
    if !theta.is_endomap() {
        return Err(Error::Precondition("theta must be an endomap".into()));
    }
    let n = theta.domain().ambient_dim();
    if q.rows() != n || q.cols() != n {
        return Err(Error::Dimension("q has the wrong dimension".into()));
    }
    let scale = q.max_abs().max(1.0);
    if !(q.is_hermitian(tol.eps_eq * scale) && q.mul(q).approx_eq(q, tol.eps_eq * scale)) {
        return Err(Error::Precondition("q is not an orthogonal projection".into()));
    }
    for b in theta.domain().basis() {
        let tt = theta.apply(&theta.apply(b, tol)?, tol)?;
        if op_norm(&tt.sub(b)) > 1e-8 * op_norm(b).max(1.0) {
            return Err(Error::Precondition("theta is not an involution".into()));
        }
    }
    for x in theta.domain().onb() {
        for y in theta.domain().onb() {
            let xy = x.mul(y);
            let lhs = theta
                .apply(&xy, tol)
                .map_err(|_| Error::Precondition("domain is not closed under products".into()))?;
            let rhs = theta.apply_unchecked(x).mul(&theta.apply_unchecked(y));
            if op_norm(&lhs.sub(&rhs)) > 1e-8 * op_norm(&xy).max(1.0) {
                return Err(Error::Precondition("theta is not multiplicative".into()));
            }
        }
    }
    let tq = theta.apply(q, tol).map_err(|_| Error::Precondition("q is not in the domain".into()))?;
    if op_norm(&tq.sub(q)) > 1e-8 {
        return Err(Error::Precondition("theta does not fix q".into()));
    }
    let two_q_minus_1 = q.scale_re(2.0).sub(&CMat::identity(n));
    let images: Result<Vec<CMat>> = theta
        .domain()
        .basis()
        .iter()
        .map(|b| Ok(b.add(&theta.apply(b, tol)?.mul(&two_q_minus_1)).scale_re(0.5)))
        .collect();
    OpMap::new(
        &format!("sym[{}]", theta.name()),
        theta.domain().clone(),
        n,
        images?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn d2() -> OpSpace {
        OpSpace::new(2, vec![CMat::unit(2, 0, 0), CMat::unit(2, 1, 1)], "D2", &tol()).unwrap()
    }

    fn swap_map() -> OpMap {
        let s = d2();
        OpMap::new("swap", s, 2, vec![CMat::unit(2, 1, 1), CMat::unit(2, 0, 0)]).unwrap()
    }

    #[test]
    fn generated_algebra_saturates() {
        // span{I, N} with N^2 = E13 generates the full 3-dim algebra.
        let n5 = CMat::unit(5, 0, 1)
            .add(&CMat::unit(5, 1, 2))
            .add(&CMat::unit(5, 3, 4).scale_re(2.0));
        let s = OpSpace::new(5, vec![CMat::identity(5), n5], "ranP5", &tol()).unwrap();
        let d = generated_algebra(&s, &tol()).unwrap();
        assert_eq!(d.dim(), 3);
        assert!(d.contains(&CMat::unit(5, 0, 2), &tol()));
    }

    #[test]
    fn symmetric_build_round_trips_through_decompose() {
        let p = symmetric_build(&swap_map(), &CMat::identity(2), &tol()).unwrap();
        // the parity projection onto scalars
        let x = CMat::diag(&[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        assert!(p.apply(&x, &tol()).unwrap().max_abs() < 1e-12);
        assert!(p.idempotent_residual(&tol()).unwrap() < 1e-12);
        match symmetric_decompose(&p, None, &tol(), &SearchParams::quick()).unwrap() {
            SymmetricOutcome::Symmetric { theta, q, formula_residual } => {
                assert!(formula_residual < 1e-10);
                assert!(q.approx_eq(&CMat::identity(2), 1e-10));
                let e11 = CMat::unit(2, 0, 0);
                assert!(theta.apply(&e11, &tol()).unwrap().approx_eq(&CMat::unit(2, 1, 1), 1e-10));
            }
            SymmetricOutcome::Failed { reason, .. } => panic!("expected symmetric: {reason}"),
        }
    }

    #[test]
    fn symmetric_build_with_corner_q() {
        // theta = id, q = E11 on D2: the E11-cut, idempotent.
        let s = d2();
        let id = OpMap::identity(&s);
        let p = symmetric_build(&id, &CMat::unit(2, 0, 0), &tol()).unwrap();
        assert!(p.idempotent_residual(&tol()).unwrap() < 1e-12);
        let x = CMat::diag(&[Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)]);
        let px = p.apply(&x, &tol()).unwrap();
        assert!(px.approx_eq(&CMat::diag(&[Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)]), 1e-12));
    }

    #[test]
    fn symmetric_build_rejects_bad_q() {
        let badq = CMat::from_rows_re(&[vec![0.5, 0.0], vec![0.0, 0.0]]);
        assert!(symmetric_build(&swap_map(), &badq, &tol()).is_err());
    }

    #[test]
    fn range_kernel_on_diagonal_expectation() {
        let s = OpSpace::new(
            2,
            vec![CMat::unit(2, 0, 0), CMat::unit(2, 0, 1), CMat::unit(2, 1, 0), CMat::unit(2, 1, 1)],
            "M2",
            &tol(),
        )
        .unwrap();
        let images = vec![CMat::unit(2, 0, 0), CMat::zeros(2, 2), CMat::zeros(2, 2), CMat::unit(2, 1, 1)];
        let p = OpMap::new("diag-exp", s, 2, images).unwrap();
        let rep = range_kernel_structure(&p, &tol()).unwrap();
        assert!(rep.c2_in_range);
        assert!(rep.condexp_residual < 1e-10);
        assert!(rep.choi_effros_assoc < 1e-10);
        assert_eq!(rep.kernel_ideal_dim, 0);
    }
}
