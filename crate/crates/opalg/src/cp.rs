//! Complete positivity and real complete positivity checks.
//!
//! For maps whose domain is a full matrix algebra, complete positivity is
//! equivalent to positivity of the Choi matrix, and a contractive completely
//! positive map is automatically completely contractive. Real complete
//! positivity (preservation of accretive elements at every matrix level) has
//! no finite witness in general; [`rcp_check`] reports two computable
//! proxies instead: the unital-extension route and seeded accretive
//! sampling. For gallery maps the unital route is backed by a certificate
//! and is proof; for arbitrary maps a `true` is evidence, not proof.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cert::{check_certificate, Certificate};
use crate::error::{Error, Result};
use crate::map::OpMap;
use crate::mat::{derive_seed, CMat, Tolerances};
use crate::norms::{norm_lower, smith_level, SearchParams, DEFAULT_LEVEL_SIDE};
use crate::space::OpSpace;
use crate::spectral::{herm_eig, is_psd, op_norm};

/// `sum_ij E_ij (x) phi(E_ij)`. Requires the domain to be a full matrix
/// algebra.
pub fn choi_matrix(map: &OpMap, tol: &Tolerances) -> Result<CMat> {
    let n = map.domain().ambient_dim();
    if map.domain().dim() != n * n {
        return Err(Error::Precondition(format!(
            "choi matrix needs a full matrix algebra domain (dim {} in M_{n})",
            map.domain().dim()
        )));
    }
    let m = map.codomain_dim();
    let mut choi = CMat::zeros(n * m, n * m);
    for i in 0..n {
        for j in 0..n {
            let img = map.apply(&CMat::unit(n, i, j), tol)?;
            for a in 0..m {
                for b in 0..m {
                    let v = img.get(a, b);
                    if v.norm_sqr() > 0.0 {
                        choi.add_at(i * m + a, j * m + b, v);
                    }
                }
            }
        }
    }
    Ok(choi)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChoiReport {
    pub choi: CMat,
    pub is_cp: bool,
    pub is_contractive_cp: bool,
}

/// Choi-matrix CP test for maps on full matrix algebras.
pub fn choi_cp_check(map: &OpMap, tol: &Tolerances) -> Result<ChoiReport> {
    let choi = choi_matrix(map, tol)?;
    let is_cp = is_psd(&choi, tol)?;
    let n = map.domain().ambient_dim();
    let is_contractive_cp = is_cp && {
        let unit = map.apply(&CMat::identity(n), tol)?;
        op_norm(&unit) <= 1.0 + tol.eps_norm
    };
    Ok(ChoiReport { choi, is_cp, is_contractive_cp })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RcpReport {
    /// The canonical unital extension is completely contractive as far as the
    /// lower-bound search can tell, and any supplied certificate validates.
    pub unital_route: bool,
    /// Every sampled accretive element (levels 1..3) maps to an accretive
    /// element.
    pub sampled_accretive: bool,
}

/// Build the canonical unital extension of `map`.
///
/// * Non-unital domain: extend within the ambient by `x + l I -> phi(x) + l I`.
/// * Unital domain with `phi(I) = I`: the map itself.
/// * Unital domain with `phi(I) != I`: adjoin an external one-dimensional
///   block and send it to `I - phi(I)`.
pub fn unital_extension(map: &OpMap, tol: &Tolerances) -> Result<OpMap> {
    let dom = map.domain();
    let n = dom.ambient_dim();
    let m = map.codomain_dim();
    if !dom.contains_identity(tol) {
        let uni = dom.unitize(tol);
        let mut images = map.images().to_vec();
        images.push(CMat::identity(m));
        return OpMap::new(&format!("{}^1", map.name()), uni, m, images);
    }
    let unit_img = map.apply(&CMat::identity(n), tol)?;
    if unit_img.approx_eq(&CMat::identity(m), tol.eps_eq) {
        return Ok(map.clone());
    }
    // external unitization: domain {x (+) l} in M_{n+1}
    let mut basis: Vec<CMat> = dom.basis().iter().map(|b| b.embed(n + 1, n + 1, 0, 0)).collect();
    basis.push(CMat::unit(n + 1, n, n));
    let space = OpSpace::new(n + 1, basis, &format!("{}^1", dom.name()), tol)?;
    let mut images = map.images().to_vec();
    images.push(CMat::identity(m).sub(&unit_img));
    OpMap::new(&format!("{}^1", map.name()), space, m, images)
}

/// Draw a seeded accretive element of the space: Gaussian + identity shift
/// when the space is unital, Dykstra projection onto the accretive cone
/// otherwise. Returns None when the draw collapses to zero.
fn sample_accretive(space: &OpSpace, rng: &mut ChaCha8Rng, tol: &Tolerances) -> Option<CMat> {
    let n = space.ambient_dim();
    let mut g = CMat::zeros(n, n);
    for q in space.onb() {
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        g = g.add(&q.scale(c));
    }
    if space.contains_identity(tol) {
        let h = g.add(&g.adjoint());
        let lam_min = herm_eig(&h).ok()?.values.first().copied().unwrap_or(0.0);
        let t = (-lam_min / 2.0).max(0.0);
        return Some(g.add(&CMat::identity(n).scale_re(t)));
    }
    // Dykstra between the span and the accretive cone.
    let mut x = g.clone();
    let mut p = CMat::zeros(n, n);
    let mut q = CMat::zeros(n, n);
    for _ in 0..200 {
        let y = space.project(&x.add(&p));
        p = x.add(&p).sub(&y);
        let yq = y.add(&q);
        let h = yq.add(&yq.adjoint()).scale_re(0.5);
        let k = yq.sub(&h);
        let hp = crate::spectral::psd_projection(&h).ok()?;
        let z = k.add(&hp);
        q = yq.sub(&z);
        let delta = z.sub(&x).hs_norm();
        x = z;
        if delta < 1e-12 {
            break;
        }
    }
    let x = space.project(&x);
    let h = x.add(&x.adjoint()).scale_re(0.5);
    let ok = herm_eig(&h).ok()?.values.first().copied().unwrap_or(0.0) >= -1e-9;
    if ok && x.hs_norm() > 1e-6 {
        Some(x)
    } else {
        None
    }
}

/// Two-proxy real-complete-positivity verdict. `cert`, when supplied, must
/// certify the canonical unital extension (which is the map itself for
/// unital maps).
pub fn rcp_check(
    map: &OpMap,
    tol: &Tolerances,
    params: &SearchParams,
    cert: Option<&Certificate>,
) -> Result<RcpReport> {
    // Route 1: unital extension completely contractive.
    let ext = unital_extension(map, tol)?;
    let level = smith_level(&ext, DEFAULT_LEVEL_SIDE);
    let report = norm_lower(&ext, level, tol, params)?;
    let mut unital_route = report.lower_bound <= 1.0 + tol.eps_norm;
    if let Some(c) = cert {
        unital_route = unital_route && check_certificate(c, &ext, tol).valid;
    }

    // Route 2: seeded accretive sampling at levels 1..3.
    let mut sampled_accretive = true;
    let total_samples = 256usize;
    let mut produced = 0usize;
    let mut draws = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(tol.seed, 0xacc7));
    'outer: while produced < total_samples && draws < total_samples * 4 {
        let lvl = (draws % 3) + 1;
        draws += 1;
        let amp_space = match map.domain().amplify(lvl, tol) {
            Ok(s) => s,
            Err(_) => break,
        };
        if let Some(x) = sample_accretive(&amp_space, &mut rng, tol) {
            produced += 1;
            let y = map.apply_amplified(&x, lvl);
            let h = y.add(&y.adjoint());
            let lam_min = herm_eig(&h)?.values.first().copied().unwrap_or(0.0);
            let scale = h.max_abs().max(1.0);
            if lam_min < -tol.eps_psd * scale {
                sampled_accretive = false;
                break 'outer;
            }
        }
    }
    Ok(RcpReport { unital_route, sampled_accretive })
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
    fn identity_is_cp() {
        let id = OpMap::identity(&full_m2());
        let rep = choi_cp_check(&id, &tol()).unwrap();
        assert!(rep.is_cp);
        assert!(rep.is_contractive_cp);
    }

    #[test]
    fn transpose_average_is_not_cp() {
        let s = full_m2();
        let images = s.basis().iter().map(|b| b.add(&b.transpose()).scale_re(0.5)).collect();
        let sym = OpMap::new("sym", s, 2, images).unwrap();
        let rep = choi_cp_check(&sym, &tol()).unwrap();
        assert!(!rep.is_cp);
        // min eigenvalue is exactly -1/2 on the antisymmetric vector
        let eig = herm_eig(&rep.choi).unwrap();
        assert!((eig.values[0] + 0.5).abs() < 1e-10);
    }

    #[test]
    fn choi_requires_full_domain() {
        let s = OpSpace::new(2, vec![CMat::unit(2, 0, 0)], "E11", &tol()).unwrap();
        let id = OpMap::identity(&s);
        assert!(choi_matrix(&id, &tol()).is_err());
    }

    #[test]
    fn negation_on_a_corner_is_not_rcp() {
        let s = OpSpace::new(2, vec![CMat::unit(2, 0, 0)], "E11", &tol()).unwrap();
        let neg = OpMap::new("neg", s, 2, vec![CMat::unit(2, 0, 0).neg()]).unwrap();
        let rep = rcp_check(&neg, &tol(), &SearchParams::quick(), None).unwrap();
        assert!(!rep.sampled_accretive);
        assert!(!rep.unital_route);
    }

    #[test]
    fn identity_is_rcp_both_routes() {
        let id = OpMap::identity(&full_m2());
        let rep = rcp_check(&id, &tol(), &SearchParams::quick(), None).unwrap();
        assert!(rep.unital_route);
        assert!(rep.sampled_accretive);
    }

    #[test]
    fn unital_extension_of_corner_inclusion() {
        // x -> x on span{E11} in M2, extended: E11 and I become independent images.
        let s = OpSpace::new(2, vec![CMat::unit(2, 0, 0)], "E11", &tol()).unwrap();
        let id = OpMap::identity(&s);
        let ext = unital_extension(&id, &tol()).unwrap();
        assert_eq!(ext.domain().dim(), 2);
        assert!(ext.apply(&CMat::identity(2), &tol()).unwrap().approx_eq(&CMat::identity(2), 1e-10));
    }
}
