//! Lower bounds for amplified operator norms of maps between operator spaces.
//!
//! `norm_lower` maximizes `||(phi (x) id_k)(X)||` over contractions `X` in
//! `M_k(domain)` by projected ascent: the ascent direction is the HS-adjoint
//! of the amplified map applied to the top singular pair, and feasibility is
//! restored by Dykstra alternation between the subspace and the operator-norm
//! unit ball. This is a heuristic LOWER bound; sound upper bounds come from
//! certificates ([`crate::cert`]). Reports are deterministic given the seed:
//! restart `r` at level `k` uses an RNG stream derived from
//! `(tol.seed, k, r)`, and level `k+1` is additionally seeded with the best
//! witness from level `k` padded by zeros, which makes the reported bounds
//! monotone in the level.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::OpMap;
use crate::mat::{derive_seed, CMat, Tolerances};
use crate::spectral::{clip_to_unit_ball, op_norm, svd};

/// Hard cap on the side of amplified matrices.
pub const SEARCH_SIZE_CAP: usize = 512;

/// Default runtime cap for automatically chosen search levels: levels are
/// clipped so the amplified side stays at or below this.
pub const DEFAULT_LEVEL_SIDE: usize = 64;

/// Search effort knobs. The defaults follow the crate-wide conventions:
/// 32 seeded restarts, 200 Dykstra iterations per projection, ascent step
/// 0.5 with halving on non-improvement.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SearchParams {
    pub restarts: usize,
    pub max_steps: usize,
    pub dykstra_iters: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { restarts: 32, max_steps: 60, dykstra_iters: 200 }
    }
}

impl SearchParams {
    pub fn quick() -> Self {
        SearchParams { restarts: 6, max_steps: 30, dykstra_iters: 120 }
    }
}

/// Result of a lower-bound search at one amplification level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormReport {
    pub level: usize,
    pub lower_bound: f64,
    pub certified_upper: Option<f64>,
    pub restarts_used: usize,
    pub witness: CMat,
    pub converged: bool,
}

/// The amplification level at which the cb norm of a map into `M_m` is
/// attained, clipped to keep the amplified side at or below `side_cap`.
pub fn smith_level(map: &OpMap, side_cap: usize) -> usize {
    let n = map.domain().ambient_dim().max(map.codomain_dim());
    let by_size = (side_cap / n).max(1);
    map.codomain_dim().min(by_size).max(1)
}

/// Lower-bound searches from level 1 through `kmax`, chaining witnesses.
pub fn norm_lower_sweep(
    map: &OpMap,
    kmax: usize,
    tol: &Tolerances,
    params: &SearchParams,
) -> Result<Vec<NormReport>> {
    let n = map.domain().ambient_dim();
    let m = map.codomain_dim();
    if kmax == 0 {
        return Err(Error::Precondition("level must be >= 1".into()));
    }
    if kmax * n.max(m) > SEARCH_SIZE_CAP {
        return Err(Error::SizeCap {
            level: kmax,
            ambient: n.max(m),
            size: kmax * n.max(m),
            cap: SEARCH_SIZE_CAP,
        });
    }
    let mut reports: Vec<NormReport> = Vec::with_capacity(kmax);
    let mut carried: Option<CMat> = None;
    for k in 1..=kmax {
        // Full restart budget at level 1; later levels lean on the carried
        // witness plus a reduced number of fresh restarts.
        let restarts = if k == 1 { params.restarts } else { (params.restarts / 4).max(4) };
        let report = search_level(map, k, carried.as_ref(), restarts, tol, params)?;
        carried = Some(report.witness.clone());
        reports.push(report);
    }
    Ok(reports)
}

/// Lower bound at a single level (internally sweeps from level 1 for the
/// witness chain).
pub fn norm_lower(map: &OpMap, level: usize, tol: &Tolerances, params: &SearchParams) -> Result<NormReport> {
    let mut reports = norm_lower_sweep(map, level, tol, params)?;
    Ok(reports.pop().expect("sweep returns one report per level"))
}

fn search_level(
    map: &OpMap,
    k: usize,
    carried: Option<&CMat>,
    restarts: usize,
    tol: &Tolerances,
    params: &SearchParams,
) -> Result<NormReport> {
    let n = map.domain().ambient_dim();
    let kn = k * n;
    let space = map.domain();

    let mut starts: Vec<CMat> = Vec::new();
    if let Some(w) = carried {
        // pad the previous witness with zeros
        let mut padded = CMat::zeros(kn, kn);
        padded.set_block(0, 0, w);
        starts.push(padded);
    }
    // The domain onb elements placed in the (0,0) block are cheap exact
    // starts that often sit on the extreme points we care about.
    for q in space.onb() {
        starts.push(q.embed(kn, kn, 0, 0));
    }
    let mut rng_streams = restarts;
    if rng_streams + starts.len() == 0 {
        rng_streams = 1;
    }
    for r in 0..rng_streams {
        let seed = derive_seed(tol.seed, (k as u64) << 32 | r as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = CMat::zeros(kn, kn);
        for i in 0..k {
            for j in 0..k {
                for q in space.onb() {
                    let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    let scaled = q.scale(c);
                    for a in 0..n {
                        for b in 0..n {
                            let v = scaled.get(a, b);
                            if v.norm_sqr() > 0.0 {
                                g.add_at(i * n + a, j * n + b, v);
                            }
                        }
                    }
                }
            }
        }
        starts.push(g);
    }

    let mut best_val = 0.0f64;
    let mut best_witness = CMat::zeros(kn, kn);
    let mut any_converged = false;
    let used = starts.len();

    for start in starts {
        let (val, wit, conv) = ascend(map, k, start, tol, params);
        if val > best_val {
            best_val = val;
            best_witness = wit;
        }
        any_converged |= conv;
    }

    Ok(NormReport {
        level: k,
        lower_bound: best_val,
        certified_upper: None,
        restarts_used: used,
        witness: best_witness,
        converged: any_converged,
    })
}

fn ascend(
    map: &OpMap,
    k: usize,
    start: CMat,
    tol: &Tolerances,
    params: &SearchParams,
) -> (f64, CMat, bool) {
    let mut x = project_feasible(map, k, &start, params);
    if x.hs_norm() < 1e-12 {
        // zero start: nothing to climb from
        return (0.0, x, true);
    }
    let mut fx = objective(map, k, &x);
    let mut step = 0.5f64;
    let mut converged = false;
    for _ in 0..params.max_steps {
        let y = map.apply_amplified(&x, k);
        let s = svd(&y);
        if s.sigma.is_empty() || s.sigma[0] < 1e-14 {
            break;
        }
        let m = map.codomain_dim();
        let u = s.u.block(0, 0, k * m, 1);
        let v = s.v.block(0, 0, k * m, 1);
        let grad = map.adjoint_amplified(&u.mul(&v.adjoint()), k);
        let gn = grad.hs_norm();
        if gn < 1e-14 {
            converged = true;
            break;
        }
        let cand = project_feasible(map, k, &x.add(&grad.scale_re(step / gn)), params);
        let fc = objective(map, k, &cand);
        if fc > fx + 1e-14 {
            let improved = fc - fx;
            x = cand;
            fx = fc;
            if improved < tol.eps_norm * 1e-2 {
                converged = true;
                break;
            }
            step = (step * 1.2).min(1.0);
        } else {
            step *= 0.5;
            if step < 1e-5 {
                converged = true;
                break;
            }
        }
    }
    (fx, x, converged)
}

fn objective(map: &OpMap, k: usize, x: &CMat) -> f64 {
    op_norm(&map.apply_amplified(x, k))
}

/// Dykstra alternation between `M_k(domain)` and the operator-norm unit
/// ball, finishing with a subspace projection and a safety rescale so the
/// result is feasible to machine precision.
fn project_feasible(map: &OpMap, k: usize, x0: &CMat, params: &SearchParams) -> CMat {
    let space = map.domain();
    let n = space.ambient_dim();
    let kn = k * n;
    let project_subspace = |x: &CMat| -> CMat {
        let mut out = CMat::zeros(kn, kn);
        for i in 0..k {
            for j in 0..k {
                let blk = x.block(i * n, j * n, n, n);
                out.set_block(i * n, j * n, &space.project(&blk));
            }
        }
        out
    };

    let mut x = x0.clone();
    let mut p = CMat::zeros(kn, kn);
    let mut q = CMat::zeros(kn, kn);
    for it in 0..params.dykstra_iters {
        let y = project_subspace(&x.add(&p));
        p = x.add(&p).sub(&y);
        let z = clip_to_unit_ball(&y.add(&q));
        q = y.add(&q).sub(&z);
        let delta = z.sub(&x).hs_norm();
        x = z;
        if it > 2 && delta < 1e-12 * x.hs_norm().max(1.0) {
            break;
        }
    }
    let mut x = project_subspace(&x);
    let nrm = op_norm(&x);
    if nrm > 1.0 {
        x = x.scale_re(1.0 / nrm);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::OpSpace;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn full_m2() -> OpSpace {
        let b = vec![
            CMat::unit(2, 0, 0),
            CMat::unit(2, 0, 1),
            CMat::unit(2, 1, 0),
            CMat::unit(2, 1, 1),
        ];
        OpSpace::new(2, b, "M2", &tol()).unwrap()
    }

    fn transpose_map() -> OpMap {
        let s = full_m2();
        let images = s.basis().iter().map(|b| b.transpose()).collect();
        OpMap::new("T", s, 2, images).unwrap()
    }

    #[test]
    fn zero_map_has_zero_lower_bound() {
        let s = full_m2();
        let z = OpMap::zero(&s, 2);
        let r = norm_lower(&z, 2, &tol(), &SearchParams::quick()).unwrap();
        assert!(r.lower_bound < 1e-9);
    }

    #[test]
    fn transpose_level_one_is_contractive() {
        let t = transpose_map();
        let r = norm_lower(&t, 1, &tol(), &SearchParams::default()).unwrap();
        assert!(r.lower_bound <= 1.0 + 1e-7, "got {}", r.lower_bound);
        assert!(r.lower_bound >= 1.0 - 1e-7, "got {}", r.lower_bound);
    }

    #[test]
    fn transpose_level_two_reaches_two() {
        let t = transpose_map();
        let r = norm_lower(&t, 2, &tol(), &SearchParams::default()).unwrap();
        assert!((r.lower_bound - 2.0).abs() < 1e-4, "got {}", r.lower_bound);
        // witness is feasible
        assert!(op_norm(&r.witness) <= 1.0 + 1e-6);
        let img = t.apply_amplified(&r.witness, 2);
        assert!((op_norm(&img) - r.lower_bound).abs() < 1e-6);
    }

    #[test]
    fn identity_lower_bound_is_one() {
        let s = full_m2();
        let id = OpMap::identity(&s);
        let r = norm_lower(&id, 2, &tol(), &SearchParams::quick()).unwrap();
        assert!((r.lower_bound - 1.0).abs() < 1e-7);
    }

    #[test]
    fn size_cap_is_enforced() {
        let s = full_m2();
        let id = OpMap::identity(&s);
        assert!(matches!(
            norm_lower(&id, 300, &tol(), &SearchParams::quick()),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn sweep_is_monotone() {
        let t = transpose_map();
        let reports = norm_lower_sweep(&t, 2, &tol(), &SearchParams::quick()).unwrap();
        assert!(reports[0].lower_bound <= reports[1].lower_bound + 1e-6);
    }

    #[test]
    fn deterministic_given_seed() {
        let t = transpose_map();
        let a = norm_lower(&t, 2, &Tolerances::with_seed(7), &SearchParams::quick()).unwrap();
        let b = norm_lower(&t, 2, &Tolerances::with_seed(7), &SearchParams::quick()).unwrap();
        assert_eq!(a.lower_bound.to_bits(), b.lower_bound.to_bits());
        assert!(a.witness.approx_eq(&b.witness, 0.0));
    }
}
