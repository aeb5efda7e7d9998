//! Multiplicativity, Jordan multiplicativity, power preservation and
//! isometry diagnostics for maps on subalgebras.

use serde::{Deserialize, Serialize};

use crate::cp::rcp_check;
use crate::error::{Error, Result};
use crate::map::OpMap;
use crate::mat::Tolerances;
use crate::norms::{norm_lower_sweep, SearchParams};
use crate::spectral::op_norm;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MorphismReport {
    /// Max over onb pairs of `||T(xy) - T(x)T(y)||`.
    pub hom_residual: f64,
    /// Max over onb pairs of the symmetrized-product deviation.
    pub jordan_residual: f64,
    /// Max over onb elements and powers `2..=nmax` of `||T(a^n) - T(a)^n||`.
    pub power_residual: f64,
    /// Lower bounds for T per level, and for its inverse when bijective.
    pub isometric_levels: Vec<(usize, f64, Option<f64>)>,
    /// Sampled accretivity preservation.
    pub real_positive: bool,
}

/// Diagnostics for a linear map on a subalgebra.
pub fn morphism_check(
    map: &OpMap,
    nmax: usize,
    levels: usize,
    tol: &Tolerances,
    params: &SearchParams,
) -> Result<MorphismReport> {
    if !map.domain().structure_flags(tol).is_subalgebra {
        return Err(Error::Precondition("morphism checks need a subalgebra domain".into()));
    }
    let mut hom = 0.0f64;
    let mut jordan = 0.0f64;
    for x in map.domain().onb() {
        let tx = map.apply_unchecked(x);
        for y in map.domain().onb() {
            let ty = map.apply_unchecked(y);
            let xy = x.mul(y);
            let yx = y.mul(x);
            let t_xy = map.apply(&xy, tol)?;
            let t_yx = map.apply(&yx, tol)?;
            hom = hom.max(op_norm(&t_xy.sub(&tx.mul(&ty))));
            let sym_img = t_xy.add(&t_yx).scale_re(0.5);
            let sym_out = tx.mul(&ty).add(&ty.mul(&tx)).scale_re(0.5);
            jordan = jordan.max(op_norm(&sym_img.sub(&sym_out)));
        }
    }

    let mut power = 0.0f64;
    for a in map.domain().onb() {
        let ta = map.apply_unchecked(a);
        let mut an = a.clone();
        let mut tan = ta.clone();
        for _ in 2..=nmax.max(2) {
            an = an.mul(a);
            tan = tan.mul(&ta);
            let t_an = map.apply(&an, tol)?;
            power = power.max(op_norm(&t_an.sub(&tan)));
        }
    }

    // Inverse when bijective: images of the domain basis form a basis of the
    // range and the kernel vanishes.
    let inverse = if map.kernel_space(tol)?.is_none() {
        crate::space::OpSpace::new(
            map.codomain_dim(),
            map.images().to_vec(),
            &format!("ran({})", map.name()),
            tol,
        )
        .ok()
        .map(|range| {
            OpMap::new(
                &format!("{}^-1", map.name()),
                range,
                map.domain().ambient_dim(),
                map.domain().basis().to_vec(),
            )
            .expect("inverse images match the range basis")
        })
    } else {
        None
    };

    let fwd = norm_lower_sweep(map, levels.max(1), tol, params)?;
    let bwd = match &inverse {
        Some(inv) => Some(norm_lower_sweep(inv, levels.max(1), tol, params)?),
        None => None,
    };
    let isometric_levels = fwd
        .iter()
        .enumerate()
        .map(|(i, r)| (r.level, r.lower_bound, bwd.as_ref().map(|b| b[i].lower_bound)))
        .collect();

    let rcp = rcp_check(map, tol, params, None)?;

    Ok(MorphismReport {
        hom_residual: hom,
        jordan_residual: jordan,
        power_residual: power,
        isometric_levels,
        real_positive: rcp.sampled_accretive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::CMat;
    use crate::space::OpSpace;

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
    fn transpose_is_jordan_but_not_multiplicative() {
        let s = full_m2();
        let images = s.basis().iter().map(|b| b.transpose()).collect();
        let t = OpMap::new("T", s, 2, images).unwrap();
        let rep = morphism_check(&t, 3, 1, &tol(), &SearchParams::quick()).unwrap();
        assert!(rep.jordan_residual < 1e-10);
        assert!(rep.hom_residual > 0.5);
    }

    #[test]
    fn swap_automorphism_is_multiplicative_and_real_positive() {
        let d2 = OpSpace::new(2, vec![CMat::unit(2, 0, 0), CMat::unit(2, 1, 1)], "D2", &tol()).unwrap();
        let sw = OpMap::new("swap", d2, 2, vec![CMat::unit(2, 1, 1), CMat::unit(2, 0, 0)]).unwrap();
        let rep = morphism_check(&sw, 4, 2, &tol(), &SearchParams::quick()).unwrap();
        assert!(rep.hom_residual < 1e-10);
        assert!(rep.real_positive);
        // bijective isometry: both directions bounded by 1
        for (_, fwd, bwd) in &rep.isometric_levels {
            assert!(*fwd <= 1.0 + 1e-6);
            assert!(bwd.unwrap() <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn inclusion_of_subalgebra_has_tiny_residuals() {
        let n5 = CMat::unit(5, 0, 1)
            .add(&CMat::unit(5, 1, 2))
            .add(&CMat::unit(5, 3, 4).scale_re(2.0));
        let a5 = OpSpace::new(5, vec![CMat::identity(5), n5, CMat::unit(5, 0, 2)], "A5", &tol()).unwrap();
        let incl = OpMap::identity(&a5);
        let rep = morphism_check(&incl, 4, 1, &tol(), &SearchParams::quick()).unwrap();
        assert!(rep.hom_residual < 1e-10);
        assert!(rep.jordan_residual < 1e-10);
        assert!(rep.power_residual < 1e-10);
    }
}
