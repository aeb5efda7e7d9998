//! The projection laboratory: classification of idempotent maps and the
//! structural facts attached to each class.
//!
//! [`classify_projection`] fills a [`ProjectionReport`]: norm lower bounds
//! per level for `P`, `I-P` and `2P-I` (with certified uppers when
//! certificates are supplied), the hermitian grid sup, the `q = P(1)`
//! splitting, structure flags of the range, conditional-expectation
//! residuals, the support-condition report and the nilpotency suite.
//! Structural checks whose hypotheses fail numerically are recorded as
//! SKIPPED entries with the hypothesis name and witness, so counterexamples
//! and hypothesis failures stay distinguishable.

mod mac;
mod morphism;
mod section5;
mod structure;

pub use mac::{mac_check, support_e, MacReport};
pub use morphism::{morphism_check, MorphismReport};
pub use section5::{section5_suite, ElementReport, Section5Report};
pub use structure::{
    generated_algebra, range_kernel_structure, symmetric_build, symmetric_decompose,
    RangeKernelReport, SymmetricOutcome,
};

use serde::{Deserialize, Serialize};

use crate::cert::{check_certificate, Certificate};
use crate::cp::{rcp_check, RcpReport};
use crate::error::{Error, Result};
use crate::map::OpMap;
use crate::mat::{CMat, Tolerances};
use crate::norms::{norm_lower_sweep, smith_level, NormReport, SearchParams, DEFAULT_LEVEL_SIDE};
use crate::space::{OpSpace, StructureFlags};
use crate::spectral::op_norm;

/// Number of grid points for the hermitian sup over `t`.
pub const HERMITIAN_GRID: usize = 16;

/// A structural check that was skipped because its hypothesis failed, with
/// the witness that broke it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SkippedRecord {
    pub hypothesis: String,
    pub witness: Option<CMat>,
}

/// Certificates to attach while classifying: for the map itself, its
/// complement `I-P`, and its reflection `2P-I`.
#[derive(Clone, Debug, Default)]
pub struct ClassifyCerts {
    pub map: Option<Certificate>,
    pub complement: Option<Certificate>,
    pub reflection: Option<Certificate>,
}

/// Full classification record of an idempotent map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub idempotent_residual: f64,
    pub unital: bool,
    /// Lower-bound reports per level (1-indexed by position+1) for `P`.
    pub p_levels: Vec<NormReport>,
    /// Reports for `I - P`.
    pub complement_levels: Vec<NormReport>,
    /// Reports for `2P - I`.
    pub reflection_levels: Vec<NormReport>,
    /// Max over the 16-point grid of `norm_lower(I - P + e^{it} P)`; a lower
    /// bound for the sup over all `t`.
    pub hermitian_sup: f64,
    pub q: Option<CMat>,
    pub q_is_projection: bool,
    /// Max over the basis of `||P(a) - P(q a q)||`, when `q` is a projection
    /// and the compressions stay inside the domain.
    pub split_residual: Option<f64>,
    pub range_flags: Option<StructureFlags>,
    /// Conditional-expectation residual of `P(P(a)b) = P(P(a)P(b)) = P(aP(b))`.
    pub condexp_residual: Option<f64>,
    /// `(I-P)(D)` for `D` the algebra generated by the range.
    pub kernel_of_d: Option<OpSpace>,
    pub rcp: Option<RcpReport>,
    pub mac: Option<MacReport>,
    pub section5: Option<Section5Report>,
    pub skipped: Vec<SkippedRecord>,
}

impl ProjectionReport {
    pub fn lower_at(&self, which: ProjectionMapKind, level: usize) -> Option<f64> {
        let v = match which {
            ProjectionMapKind::Map => &self.p_levels,
            ProjectionMapKind::Complement => &self.complement_levels,
            ProjectionMapKind::Reflection => &self.reflection_levels,
        };
        v.get(level.checked_sub(1)?).map(|r| r.lower_bound)
    }

    pub fn certified_upper(&self, which: ProjectionMapKind) -> Option<f64> {
        let v = match which {
            ProjectionMapKind::Map => &self.p_levels,
            ProjectionMapKind::Complement => &self.complement_levels,
            ProjectionMapKind::Reflection => &self.reflection_levels,
        };
        v.first().and_then(|r| r.certified_upper)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectionMapKind {
    Map,
    Complement,
    Reflection,
}

/// Classify an idempotent endomap. `level` caps the amplification level
/// (clipped by the runtime size guard); pass `None` for the codomain
/// dimension.
pub fn classify_projection(
    map: &OpMap,
    level: Option<usize>,
    tol: &Tolerances,
    params: &SearchParams,
    certs: &ClassifyCerts,
) -> Result<ProjectionReport> {
    if !map.is_endomap() {
        return Err(Error::Precondition("classification needs an endomap".into()));
    }
    let residual = map.idempotent_residual(tol)?;
    if residual > tol.eps_eq.max(1e-9) {
        return Err(Error::NotIdempotent { residual });
    }
    let mut skipped: Vec<SkippedRecord> = Vec::new();

    let n = map.domain().ambient_dim();
    let eff_level = level
        .unwrap_or_else(|| smith_level(map, DEFAULT_LEVEL_SIDE))
        .min((crate::norms::SEARCH_SIZE_CAP / n).max(1));

    let complement = map.complement()?;
    let reflection = map.reflection()?;

    let attach = |reports: &mut Vec<NormReport>, cert: &Option<Certificate>, target: &OpMap| {
        if let Some(c) = cert {
            let chk = check_certificate(c, target, tol);
            if chk.valid {
                for r in reports.iter_mut() {
                    r.certified_upper = Some(chk.certified_upper);
                }
            }
        }
    };

    let mut p_levels = norm_lower_sweep(map, eff_level, tol, params)?;
    attach(&mut p_levels, &certs.map, map);
    let mut complement_levels = norm_lower_sweep(&complement, eff_level, tol, params)?;
    attach(&mut complement_levels, &certs.complement, &complement);
    let mut reflection_levels = norm_lower_sweep(&reflection, eff_level, tol, params)?;
    attach(&mut reflection_levels, &certs.reflection, &reflection);

    // Hermitian grid; the sup is a lower bound over the 16-point grid.
    let quick = SearchParams {
        restarts: (params.restarts / 8).max(4),
        max_steps: params.max_steps.min(40),
        dykstra_iters: params.dykstra_iters.min(120),
    };
    let mut hermitian_sup = 0.0f64;
    for j in 0..HERMITIAN_GRID {
        let t = 2.0 * std::f64::consts::PI * (j as f64) / (HERMITIAN_GRID as f64);
        let mt = map.phase_mix(t)?;
        let rep = norm_lower_sweep(&mt, eff_level, tol, &quick)?;
        let top = rep.last().map(|r| r.lower_bound).unwrap_or(0.0);
        hermitian_sup = hermitian_sup.max(top);
    }

    let unital_domain = map.domain().contains_identity(tol);
    let identity = CMat::identity(n);
    let q = if unital_domain { Some(map.apply(&identity, tol)?) } else { None };
    let unital = q
        .as_ref()
        .map(|qq| qq.approx_eq(&identity, tol.eps_eq * 10.0))
        .unwrap_or(false);
    let q_is_projection = q.as_ref().map_or(false, |qq| {
        qq.is_hermitian(tol.eps_eq * qq.max_abs().max(1.0))
            && qq.mul(qq).approx_eq(qq, tol.eps_eq * qq.max_abs().max(1.0))
    });
    if !unital_domain {
        skipped.push(SkippedRecord {
            hypothesis: "domain contains the identity (q-splitting)".into(),
            witness: None,
        });
    }

    // q-splitting residual: P(a) = P(q a q).
    let split_residual = if q_is_projection {
        let qq = q.as_ref().unwrap();
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for b in map.domain().basis() {
            let qaq = qq.mul(b).mul(qq);
            match map.apply(&qaq, tol) {
                Ok(img) => worst = worst.max(op_norm(&img.sub(&map.apply(b, tol)?)))
,
                Err(_) => {
                    skipped.push(SkippedRecord {
                        hypothesis: "q a q stays in the domain (splitting residual)".into(),
                        witness: Some(qaq),
                    });
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            Some(worst)
        } else {
            None
        }
    } else {
        None
    };

    let range = map.range_space(tol)?;
    let range_flags = range.as_ref().map(|r| r.structure_flags(tol));

    // Standard position: compress to qAq when q is a proper projection, then
    // restrict to the algebra generated by the range.
    let standard = standard_position(map, q.as_ref(), q_is_projection, tol)?;

    let mut condexp_residual = None;
    let mut kernel_of_d = None;
    let mut mac = None;
    let mut section5 = None;
    if let Some(sp) = &standard {
        if sp.domain_is_algebra {
            condexp_residual = Some(structure::condexp_residual(&sp.map, tol)?);
            let d = generated_algebra(
                sp.map
                    .range_space(tol)?
                    .as_ref()
                    .ok_or_else(|| Error::Precondition("projection with zero range".into()))?,
                tol,
            )?;
            if d.basis().iter().all(|b| sp.map.domain().contains(b, tol)) {
                let restricted = sp.map.restrict(&d, tol)?;
                kernel_of_d = restricted.complement()?.range_space(tol)?;
                if restricted.domain().contains_identity(tol) {
                    mac = Some(mac_check(&restricted, tol)?);
                    section5 = Some(section5_suite(&restricted, None, tol)?);
                } else {
                    skipped.push(SkippedRecord {
                        hypothesis: "restriction to the generated algebra is unital (support conditions)"
                            .into(),
                        witness: None,
                    });
                }
            } else {
                skipped.push(SkippedRecord {
                    hypothesis: "generated algebra stays inside the domain".into(),
                    witness: None,
                });
            }
        } else {
            skipped.push(SkippedRecord {
                hypothesis: "domain is a subalgebra (conditional expectation identities)".into(),
                witness: None,
            });
        }
    }

    let rcp = Some(rcp_check(map, tol, params, certs.map.as_ref())?);

    Ok(ProjectionReport {
        idempotent_residual: residual,
        unital,
        p_levels,
        complement_levels,
        reflection_levels,
        hermitian_sup,
        q,
        q_is_projection,
        split_residual,
        range_flags,
        condexp_residual,
        kernel_of_d,
        rcp,
        mac,
        section5,
        skipped,
    })
}

struct StandardPosition {
    map: OpMap,
    domain_is_algebra: bool,
}

/// Reduce to a unital projection: compress to `qAq` when `q = P(1)` is a
/// proper projection (the map splits as zero off `qAq` plus a unital
/// projection on `qAq`).
fn standard_position(
    map: &OpMap,
    q: Option<&CMat>,
    q_is_projection: bool,
    tol: &Tolerances,
) -> Result<Option<StandardPosition>> {
    let n = map.domain().ambient_dim();
    let compressed = match q {
        Some(qq) if q_is_projection && !qq.approx_eq(&CMat::identity(n), tol.eps_eq * 10.0) => {
            let gens: Vec<CMat> = map.domain().basis().iter().map(|b| qq.mul(b).mul(qq)).collect();
            match OpSpace::span(n, &gens, &format!("q{}q", map.domain().name()), tol)? {
                Some(sub) => {
                    if sub.basis().iter().all(|b| map.domain().contains(b, tol)) {
                        Some(map.restrict(&sub, tol)?)
                    } else {
                        None
                    }
                }
                None => None,
            }
        }
        Some(_) => Some(map.clone()),
        None => None,
    };
    Ok(compressed.map(|m| {
        let domain_is_algebra = m.domain().structure_flags(tol).is_subalgebra;
        StandardPosition { map: m, domain_is_algebra }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn diag_expectation_m2() -> OpMap {
        let s = OpSpace::new(
            2,
            vec![CMat::unit(2, 0, 0), CMat::unit(2, 0, 1), CMat::unit(2, 1, 0), CMat::unit(2, 1, 1)],
            "M2",
            &tol(),
        )
        .unwrap();
        let images = vec![
            CMat::unit(2, 0, 0),
            CMat::zeros(2, 2),
            CMat::zeros(2, 2),
            CMat::unit(2, 1, 1),
        ];
        OpMap::new("diag-exp", s, 2, images).unwrap()
    }

    #[test]
    fn diagonal_expectation_classifies_clean() {
        let p = diag_expectation_m2();
        let rep = classify_projection(&p, Some(2), &tol(), &SearchParams::quick(), &ClassifyCerts::default())
            .unwrap();
        assert!(rep.idempotent_residual < 1e-12);
        assert!(rep.unital);
        assert!(rep.q_is_projection);
        assert!(rep.lower_at(ProjectionMapKind::Map, 2).unwrap() <= 1.0 + 1e-6);
        assert!(rep.range_flags.unwrap().is_subalgebra);
        assert!(rep.condexp_residual.unwrap() < 1e-10);
        // kernel of D is the off-diagonal corner... D = range here, so the
        // restricted complement vanishes.
        assert!(rep.kernel_of_d.is_none());
        let r = rep.rcp.unwrap();
        assert!(r.sampled_accretive);
    }

    #[test]
    fn non_idempotent_is_rejected() {
        let s = OpSpace::new(2, vec![CMat::unit(2, 0, 1)], "X", &tol()).unwrap();
        let half = OpMap::new("half", s, 2, vec![CMat::unit(2, 0, 1).scale_re(0.5)]).unwrap();
        assert!(matches!(
            classify_projection(&half, Some(1), &tol(), &SearchParams::quick(), &ClassifyCerts::default()),
            Err(Error::NotIdempotent { .. })
        ));
    }
}
