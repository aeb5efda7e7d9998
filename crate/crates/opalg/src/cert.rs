//! Complete-contractivity certificates.
//!
//! A certificate is a composition tree whose leaves are primitive maps with
//! machine-checkable side conditions, each completely contractive (or with an
//! explicit cb bound at most 1):
//!
//! * conjugation `x -> A x B` with `||A|| ||B|| <= 1`;
//! * block placement: disjoint source blocks moved to pairwise-disjoint
//!   destination row groups and column groups (a complete isometry onto its
//!   range);
//! * the corner functor: a certified complete contraction `v : X -> Y`
//!   induces `[[l1, x], [0, l2]] -> [[l1, v(x)], [0, l2]]` between the
//!   corner algebras over `X` and `Y`;
//! * inclusion/restriction of an operator space (identity on the ambient,
//!   with membership of the actual inputs verified);
//! * a completely positive leaf on a full matrix algebra with PSD Choi
//!   matrix and `||phi(1)|| <= 1`.
//!
//! Internal nodes are `Compose` (bounds multiply), `DirectSum` over a common
//! domain, `x -> diag(phi_1(x), ..., phi_r(x))` (bounds max), and
//! `TensorId(k)` (bound unchanged). A tree that validates AND reproduces the
//! target map on its domain basis is a sound proof that the target's cb norm
//! is at most the tree's bound. Lower-bound searches can never certify an
//! upper bound; this module is the only sound source of them.

use serde::{Deserialize, Serialize};

use crate::cp::choi_matrix;
use crate::error::{Error, Result};
use crate::map::OpMap;
use crate::mat::{CMat, Tolerances};
use crate::space::OpSpace;
use crate::spectral::{is_psd, op_norm};

/// One renamed block inside a [`Certificate::Placement`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockMove {
    pub src_row: usize,
    pub src_col: usize,
    pub dst_row: usize,
    pub dst_col: usize,
    pub height: usize,
    pub width: usize,
}

/// A cb-norm upper-bound certificate; see the module docs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Conjugation {
        left: CMat,
        right: CMat,
    },
    Placement {
        in_dim: usize,
        out_dim: usize,
        moves: Vec<BlockMove>,
    },
    Inclusion {
        space: OpSpace,
    },
    CpLeaf {
        map: OpMap,
    },
    Corner {
        child: Box<Certificate>,
    },
    Compose {
        steps: Vec<Certificate>,
    },
    DirectSum {
        parts: Vec<Certificate>,
    },
    TensorId {
        k: usize,
        child: Box<Certificate>,
    },
}

/// Outcome of checking a certificate against a target map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertCheck {
    pub valid: bool,
    pub certified_upper: f64,
    /// Path into the tree and reason, on failure.
    pub failure: Option<String>,
}

impl Certificate {
    pub fn conjugation(left: CMat, right: CMat) -> Certificate {
        Certificate::Conjugation { left, right }
    }

    pub fn compose(steps: Vec<Certificate>) -> Certificate {
        Certificate::Compose { steps }
    }

    pub fn direct_sum(parts: Vec<Certificate>) -> Certificate {
        Certificate::DirectSum { parts }
    }

    /// Input ambient dimension of the certified map.
    pub fn in_dim(&self) -> Result<usize> {
        match self {
            Certificate::Conjugation { left, .. } => Ok(left.cols()),
            Certificate::Placement { in_dim, .. } => Ok(*in_dim),
            Certificate::Inclusion { space } => Ok(space.ambient_dim()),
            Certificate::CpLeaf { map } => Ok(map.domain().ambient_dim()),
            Certificate::Corner { child } => Ok(2 * child.in_dim()?),
            Certificate::Compose { steps } => steps
                .first()
                .ok_or_else(|| Error::Certificate {
                    path: "compose".into(),
                    reason: "empty composition".into(),
                })?
                .in_dim(),
            Certificate::DirectSum { parts } => parts
                .first()
                .ok_or_else(|| Error::Certificate {
                    path: "direct_sum".into(),
                    reason: "empty direct sum".into(),
                })?
                .in_dim(),
            Certificate::TensorId { k, child } => Ok(k * child.in_dim()?),
        }
    }

    pub fn out_dim(&self) -> Result<usize> {
        match self {
            Certificate::Conjugation { left, .. } => Ok(left.rows()),
            Certificate::Placement { out_dim, .. } => Ok(*out_dim),
            Certificate::Inclusion { space } => Ok(space.ambient_dim()),
            Certificate::CpLeaf { map } => Ok(map.codomain_dim()),
            Certificate::Corner { child } => Ok(2 * child.out_dim()?),
            Certificate::Compose { steps } => steps
                .last()
                .ok_or_else(|| Error::Certificate {
                    path: "compose".into(),
                    reason: "empty composition".into(),
                })?
                .out_dim(),
            Certificate::DirectSum { parts } => {
                if parts.is_empty() {
                    return Err(Error::Certificate {
                        path: "direct_sum".into(),
                        reason: "empty direct sum".into(),
                    });
                }
                let mut total = 0;
                for p in parts {
                    total += p.out_dim()?;
                }
                Ok(total)
            }
            Certificate::TensorId { k, child } => Ok(k * child.out_dim()?),
        }
    }

    /// The cb-norm bound the tree certifies: leaf bounds at the leaves,
    /// products over compositions, maxima over direct sums.
    pub fn bound(&self) -> Result<f64> {
        match self {
            Certificate::Conjugation { left, right } => Ok(op_norm(left) * op_norm(right)),
            Certificate::Placement { .. } | Certificate::Inclusion { .. } | Certificate::CpLeaf { .. } => Ok(1.0),
            Certificate::Corner { child } => Ok(child.bound()?.max(1.0)),
            Certificate::Compose { steps } => {
                let mut b = 1.0;
                for s in steps {
                    b *= s.bound()?;
                }
                Ok(b)
            }
            Certificate::DirectSum { parts } => {
                let mut b: f64 = 0.0;
                for p in parts {
                    b = b.max(p.bound()?);
                }
                Ok(b)
            }
            Certificate::TensorId { child, .. } => child.bound(),
        }
    }

    /// Validate side conditions and evaluate the tree on concrete inputs.
    /// Inputs must all be `in_dim x in_dim`. Validation is per-node and
    /// per-input where the condition depends on the data (inclusion
    /// membership, corner shape).
    fn eval(&self, inputs: &[CMat], path: &str, tol: &Tolerances) -> Result<Vec<CMat>> {
        let n = self.in_dim()?;
        for x in inputs {
            if x.rows() != n || x.cols() != n {
                return Err(Error::Certificate {
                    path: path.into(),
                    reason: format!("input is {}x{}, node expects {}", x.rows(), x.cols(), n),
                });
            }
        }
        match self {
            Certificate::Conjugation { left, right } => {
                if left.cols() != right.rows() || left.rows() != right.cols() {
                    return Err(Error::Certificate {
                        path: path.into(),
                        reason: "conjugation pair has mismatched shapes".into(),
                    });
                }
                let b = op_norm(left) * op_norm(right);
                if b > 1.0 + tol.eps_norm {
                    return Err(Error::Certificate {
                        path: path.into(),
                        reason: format!("conjugation bound {b:.6} exceeds 1"),
                    });
                }
                Ok(inputs.iter().map(|x| left.mul(x).mul(right)).collect())
            }
            Certificate::Placement { in_dim, out_dim, moves } => {
                validate_placement(*in_dim, *out_dim, moves, path)?;
                let outs = inputs
                    .iter()
                    .map(|x| {
                        let mut y = CMat::zeros(*out_dim, *out_dim);
                        for mv in moves {
                            for i in 0..mv.height {
                                for j in 0..mv.width {
                                    y.set(
                                        mv.dst_row + i,
                                        mv.dst_col + j,
                                        x.get(mv.src_row + i, mv.src_col + j),
                                    );
                                }
                            }
                        }
                        y
                    })
                    .collect();
                Ok(outs)
            }
            Certificate::Inclusion { space } => {
                for (idx, x) in inputs.iter().enumerate() {
                    if !space.contains(x, tol) {
                        return Err(Error::Certificate {
                            path: path.into(),
                            reason: format!("input {idx} is not a member of '{}'", space.name()),
                        });
                    }
                }
                Ok(inputs.to_vec())
            }
            Certificate::CpLeaf { map } => {
                let nd = map.domain().ambient_dim();
                if map.domain().dim() != nd * nd {
                    return Err(Error::Certificate {
                        path: path.into(),
                        reason: "cp leaf domain is not a full matrix algebra".into(),
                    });
                }
                let choi = choi_matrix(map, tol).map_err(|e| Error::Certificate {
                    path: path.into(),
                    reason: format!("choi evaluation failed: {e}"),
                })?;
                if !is_psd(&choi, tol).unwrap_or(false) {
                    return Err(Error::Certificate {
                        path: path.into(),
                        reason: "choi matrix is not PSD".into(),
                    });
                }
                let unit_img = map.apply(&CMat::identity(nd), tol).map_err(|e| Error::Certificate {
                    path: path.into(),
                    reason: format!("cp leaf evaluation failed on the identity: {e}"),
                })?;
                let unit_norm = op_norm(&unit_img);
                if unit_norm > 1.0 + tol.eps_norm {
                    return Err(Error::Certificate {
                        path: path.into(),
                        reason: format!("||phi(1)|| = {unit_norm:.6} exceeds 1"),
                    });
                }
                inputs
                    .iter()
                    .map(|x| {
                        map.apply(x, tol).map_err(|e| Error::Certificate {
                            path: path.into(),
                            reason: format!("cp leaf evaluation failed: {e}"),
                        })
                    })
                    .collect()
            }
            Certificate::Corner { child } => {
                let h = child.in_dim()?;
                let hb = child.bound()?;
                if hb > 1.0 + tol.eps_norm {
                    return Err(Error::Certificate {
                        path: path.into(),
                        reason: format!("corner functor child bound {hb:.6} exceeds 1"),
                    });
                }
                let mut corners = Vec::with_capacity(inputs.len());
                let mut scalars = Vec::with_capacity(inputs.len());
                for (idx, x) in inputs.iter().enumerate() {
                    let l1 = x.get(0, 0);
                    let l2 = x.get(h, h);
                    let eps = tol.eps_eq * x.max_abs().max(1.0);
                    let ok = x.block(0, 0, h, h).approx_eq(&CMat::identity(h).scale(l1), eps)
                        && x.block(h, h, h, h).approx_eq(&CMat::identity(h).scale(l2), eps)
                        && x.block(h, 0, h, h).max_abs() <= eps;
                    if !ok {
                        return Err(Error::Certificate {
                            path: path.into(),
                            reason: format!(
                                "input {idx} is not corner-shaped (scalar diagonal, zero lower corner)"
                            ),
                        });
                    }
                    corners.push(x.block(0, h, h, h));
                    scalars.push((l1, l2));
                }
                let mapped = child.eval(&corners, &format!("{path}.corner"), tol)?;
                let h2 = child.out_dim()?;
                let outs = mapped
                    .iter()
                    .zip(&scalars)
                    .map(|(vx, (l1, l2))| {
                        let mut y = CMat::zeros(2 * h2, 2 * h2);
                        y.set_block(0, 0, &CMat::identity(h2).scale(*l1));
                        y.set_block(h2, h2, &CMat::identity(h2).scale(*l2));
                        y.set_block(0, h2, vx);
                        y
                    })
                    .collect();
                Ok(outs)
            }
            Certificate::Compose { steps } => {
                if steps.is_empty() {
                    return Err(Error::Certificate {
                        path: path.into(),
                        reason: "empty composition".into(),
                    });
                }
                let mut current = inputs.to_vec();
                for (i, step) in steps.iter().enumerate() {
                    current = step.eval(&current, &format!("{path}.step[{i}]"), tol)?;
                }
                Ok(current)
            }
            Certificate::DirectSum { parts } => {
                if parts.is_empty() {
                    return Err(Error::Certificate {
                        path: path.into(),
                        reason: "empty direct sum".into(),
                    });
                }
                let mut all: Vec<Vec<CMat>> = Vec::with_capacity(parts.len());
                for (i, part) in parts.iter().enumerate() {
                    if part.in_dim()? != n {
                        return Err(Error::Certificate {
                            path: path.into(),
                            reason: format!("direct sum part {i} has a different domain dimension"),
                        });
                    }
                    all.push(part.eval(inputs, &format!("{path}.part[{i}]"), tol)?);
                }
                let total = self.out_dim()?;
                let mut outs = Vec::with_capacity(inputs.len());
                for idx in 0..inputs.len() {
                    let mut y = CMat::zeros(total, total);
                    let mut off = 0usize;
                    for (part, images) in parts.iter().zip(&all) {
                        let d = part.out_dim()?;
                        y.set_block(off, off, &images[idx]);
                        off += d;
                    }
                    outs.push(y);
                }
                Ok(outs)
            }
            Certificate::TensorId { k, child } => {
                let h = child.in_dim()?;
                let h2 = child.out_dim()?;
                let mut blocks = Vec::with_capacity(inputs.len() * k * k);
                for x in inputs {
                    for i in 0..*k {
                        for j in 0..*k {
                            blocks.push(x.block(i * h, j * h, h, h));
                        }
                    }
                }
                let mapped = child.eval(&blocks, &format!("{path}.tensor"), tol)?;
                let mut outs = Vec::with_capacity(inputs.len());
                for idx in 0..inputs.len() {
                    let mut y = CMat::zeros(k * h2, k * h2);
                    for i in 0..*k {
                        for j in 0..*k {
                            y.set_block(i * h2, j * h2, &mapped[idx * k * k + i * k + j]);
                        }
                    }
                    outs.push(y);
                }
                Ok(outs)
            }
        }
    }
}

fn ranges_disjoint(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 + a.1 <= b.0 || b.0 + b.1 <= a.0
}

fn validate_placement(in_dim: usize, out_dim: usize, moves: &[BlockMove], path: &str) -> Result<()> {
    if moves.is_empty() {
        return Err(Error::Certificate { path: path.into(), reason: "placement without moves".into() });
    }
    for mv in moves {
        if mv.height == 0 || mv.width == 0 {
            return Err(Error::Certificate { path: path.into(), reason: "empty block in placement".into() });
        }
        if mv.src_row + mv.height > in_dim
            || mv.src_col + mv.width > in_dim
            || mv.dst_row + mv.height > out_dim
            || mv.dst_col + mv.width > out_dim
        {
            return Err(Error::Certificate { path: path.into(), reason: "placement block out of range".into() });
        }
    }
    for (i, a) in moves.iter().enumerate() {
        for b in moves.iter().skip(i + 1) {
            if !ranges_disjoint((a.src_row, a.height), (b.src_row, b.height)) {
                return Err(Error::Certificate {
                    path: path.into(),
                    reason: "placement source row groups overlap".into(),
                });
            }
            if !ranges_disjoint((a.src_col, a.width), (b.src_col, b.width)) {
                return Err(Error::Certificate {
                    path: path.into(),
                    reason: "placement source column groups overlap".into(),
                });
            }
            if !ranges_disjoint((a.dst_row, a.height), (b.dst_row, b.height)) {
                return Err(Error::Certificate {
                    path: path.into(),
                    reason: "placement destination row groups overlap".into(),
                });
            }
            if !ranges_disjoint((a.dst_col, a.width), (b.dst_col, b.width)) {
                return Err(Error::Certificate {
                    path: path.into(),
                    reason: "placement destination column groups overlap".into(),
                });
            }
        }
    }
    Ok(())
}

/// Check a certificate against a target map: every side condition must hold
/// and the tree's composite must agree with the map on the domain basis.
pub fn check_certificate(cert: &Certificate, map: &OpMap, tol: &Tolerances) -> CertCheck {
    match check_inner(cert, map, tol) {
        Ok(upper) => CertCheck { valid: true, certified_upper: upper, failure: None },
        Err(Error::Certificate { path, reason }) => CertCheck {
            valid: false,
            certified_upper: f64::INFINITY,
            failure: Some(format!("{path}: {reason}")),
        },
        Err(e) => CertCheck { valid: false, certified_upper: f64::INFINITY, failure: Some(e.to_string()) },
    }
}

fn check_inner(cert: &Certificate, map: &OpMap, tol: &Tolerances) -> Result<f64> {
    let n = map.domain().ambient_dim();
    let m = map.codomain_dim();
    if cert.in_dim()? != n {
        return Err(Error::Certificate {
            path: "root".into(),
            reason: format!("certificate domain dim {} differs from map domain {}", cert.in_dim()?, n),
        });
    }
    if cert.out_dim()? != m {
        return Err(Error::Certificate {
            path: "root".into(),
            reason: format!("certificate codomain dim {} differs from map codomain {}", cert.out_dim()?, m),
        });
    }
    let bound = cert.bound()?;
    if bound > 1.0 + tol.eps_norm {
        return Err(Error::Certificate {
            path: "root".into(),
            reason: format!("tree bound {bound:.6} exceeds 1"),
        });
    }
    let inputs: Vec<CMat> = map.domain().onb().to_vec();
    let outputs = cert.eval(&inputs, "root", tol)?;
    for (idx, (x, y)) in inputs.iter().zip(&outputs).enumerate() {
        let expect = map.apply_unchecked(x);
        let eps = (tol.eps_eq * expect.max_abs().max(1.0)).max(tol.eps_eq);
        if !y.approx_eq(&expect, eps) {
            return Err(Error::Certificate {
                path: "root".into(),
                reason: format!(
                    "composite disagrees with the target on basis element {idx} (deviation {:.3e})",
                    y.sub(&expect).max_abs()
                ),
            });
        }
    }
    Ok(bound.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

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
    fn conjugation_certifies_a_corner_compression() {
        let s = full_m2();
        let e11 = CMat::unit(2, 0, 0);
        let images = s.basis().iter().map(|b| e11.mul(b).mul(&e11)).collect();
        let map = OpMap::new("corner", s, 2, images).unwrap();
        let cert = Certificate::conjugation(e11.clone(), e11);
        let chk = check_certificate(&cert, &map, &tol());
        assert!(chk.valid, "{:?}", chk.failure);
        assert!((chk.certified_upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conjugation_with_expanding_leaf_is_rejected() {
        let s = full_m2();
        let id = OpMap::identity(&s);
        let cert = Certificate::conjugation(CMat::identity(2).scale_re(2.0), CMat::identity(2));
        let chk = check_certificate(&cert, &id, &tol());
        assert!(!chk.valid);
        assert!(chk.failure.unwrap().contains("exceeds 1"));
    }

    #[test]
    fn composite_must_match_the_map() {
        let s = full_m2();
        let id = OpMap::identity(&s);
        let e11 = CMat::unit(2, 0, 0);
        let cert = Certificate::conjugation(e11.clone(), e11);
        let chk = check_certificate(&cert, &id, &tol());
        assert!(!chk.valid);
        assert!(chk.failure.unwrap().contains("disagrees"));
    }

    #[test]
    fn placement_moves_blocks_and_rejects_overlap() {
        // diag(a, b) in M2 -> a E12 + b E23 in M3
        let s = OpSpace::new(2, vec![CMat::unit(2, 0, 0), CMat::unit(2, 1, 1)], "D2", &tol()).unwrap();
        let mut img0 = CMat::zeros(3, 3);
        img0.set(0, 1, Complex64::new(1.0, 0.0));
        let mut img1 = CMat::zeros(3, 3);
        img1.set(1, 2, Complex64::new(1.0, 0.0));
        let map = OpMap::new("shift", s, 3, vec![img0, img1]).unwrap();
        let mv = |sr, sc, dr, dc| BlockMove {
            src_row: sr,
            src_col: sc,
            dst_row: dr,
            dst_col: dc,
            height: 1,
            width: 1,
        };
        let cert = Certificate::Placement { in_dim: 2, out_dim: 3, moves: vec![mv(0, 0, 0, 1), mv(1, 1, 1, 2)] };
        let chk = check_certificate(&cert, &map, &tol());
        assert!(chk.valid, "{:?}", chk.failure);

        let bad = Certificate::Placement { in_dim: 2, out_dim: 3, moves: vec![mv(0, 0, 0, 1), mv(1, 1, 0, 2)] };
        let chk = check_certificate(&bad, &map, &tol());
        assert!(!chk.valid);
        assert!(chk.failure.unwrap().contains("row groups overlap"));
    }

    #[test]
    fn direct_sum_stacks_outputs() {
        let s = full_m2();
        let images = s.basis().iter().map(|b| b.direct_sum(b)).collect();
        let map = OpMap::new("dup", s, 4, images).unwrap();
        let id_leaf = || Certificate::conjugation(CMat::identity(2), CMat::identity(2));
        let cert = Certificate::direct_sum(vec![id_leaf(), id_leaf()]);
        let chk = check_certificate(&cert, &map, &tol());
        assert!(chk.valid, "{:?}", chk.failure);
        assert!((chk.certified_upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corner_functor_wraps_a_contraction() {
        // The corner algebra over X = span{E12} in M2: a 3-dim subspace of M4.
        let x_here = CMat::unit(2, 0, 1);
        let mut e1 = CMat::zeros(4, 4);
        e1.set_block(0, 0, &CMat::identity(2));
        let mut e2 = CMat::zeros(4, 4);
        e2.set_block(2, 2, &CMat::identity(2));
        let xe = x_here.embed(4, 4, 0, 2);
        let u_space = OpSpace::new(4, vec![e1.clone(), e2.clone(), xe.clone()], "U(X)", &tol()).unwrap();
        let images = vec![e1, e2, xe.scale_re(0.5)];
        let theta = OpMap::new("theta_v", u_space, 4, images).unwrap();
        let half = Certificate::conjugation(
            CMat::identity(2).scale_re(0.5_f64.sqrt()),
            CMat::identity(2).scale_re(0.5_f64.sqrt()),
        );
        let cert = Certificate::Corner { child: Box::new(half) };
        let chk = check_certificate(&cert, &theta, &tol());
        assert!(chk.valid, "{:?}", chk.failure);
    }

    #[test]
    fn corner_functor_rejects_non_corner_domains() {
        let s = full_m2();
        let id = OpMap::identity(&s);
        let leaf = Certificate::conjugation(CMat::identity(1), CMat::identity(1));
        let cert = Certificate::Corner { child: Box::new(leaf) };
        let chk = check_certificate(&cert, &id, &tol());
        assert!(!chk.valid);
    }

    #[test]
    fn tensor_id_amplifies() {
        let s = full_m2();
        let e11 = CMat::unit(2, 0, 0);
        let amp = s.amplify(2, &tol()).unwrap();
        let big_e11 = CMat::identity(2).kron(&e11);
        let images = amp.basis().iter().map(|b| big_e11.mul(b).mul(&big_e11)).collect();
        let map = OpMap::new("corner x id", amp, 4, images).unwrap();
        let cert = Certificate::TensorId { k: 2, child: Box::new(Certificate::conjugation(e11.clone(), e11)) };
        let chk = check_certificate(&cert, &map, &tol());
        assert!(chk.valid, "{:?}", chk.failure);
    }

    #[test]
    fn certificate_json_round_trip() {
        let cert = Certificate::direct_sum(vec![
            Certificate::conjugation(CMat::identity(2), CMat::identity(2)),
            Certificate::Placement {
                in_dim: 2,
                out_dim: 2,
                moves: vec![BlockMove { src_row: 0, src_col: 0, dst_row: 1, dst_col: 1, height: 1, width: 1 }],
            },
        ]);
        let j = serde_json::to_string(&cert).unwrap();
        assert!(j.contains("\"kind\""));
        let back: Certificate = serde_json::from_str(&j).unwrap();
        assert_eq!(back.in_dim().unwrap(), 2);
        assert_eq!(back.out_dim().unwrap(), 4);
    }
}
