//! Deterministic builders for the example algebras and projections the
//! crate is designed to probe, each bundled with certificates and a list of
//! expected assertions runnable by [`crate::verify`].
//!
//! The centerpiece is a 3-dimensional unital subalgebra of `M_5` carrying a
//! unital completely bicontractive projection whose range is not a
//! subalgebra (not even a Jordan subalgebra): the projection kills the
//! (1,3)-entry. Around it sit the block constructions it compresses from,
//! a completely positive extension on `M_3 (+) M_2`, corner-algebra
//! examples, the transpose-average map, two projections built from period-2
//! automorphisms, and a pair of experimental variants of the `M_5` algebra.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cert::{BlockMove, Certificate};
use crate::error::{Error, Result};
use crate::map::OpMap;
use crate::mat::{CMat, Tolerances};
use crate::space::OpSpace;

/// Which derived map of a bundle a check refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapTarget {
    Map,
    Complement,
    Reflection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagKind {
    Subalgebra,
    Jordan,
    Unital,
    Selfadjoint,
    SquareZero,
}

/// Declarative checks evaluated by the verification runner.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Check {
    IdempotentResidualAtMost { value: f64 },
    Unital { value: bool },
    UnitImage { expect: CMat, tol: f64 },
    SpaceDim { value: usize },
    CertValid { tag: String },
    LowerAtMost { target: MapTarget, level: usize, value: f64, slack: f64 },
    LowerAtLeast { target: MapTarget, level: usize, value: f64 },
    RangeFlag { flag: FlagKind, value: bool },
    KernelIdealDim { value: usize },
    RkSquareZero { value: bool },
    RkC2InRange { value: bool },
    RkModule { value: bool },
    RkAssocAtMost { value: f64 },
    CondexpAtMost { value: f64 },
    MacLeft { value: bool },
    MacRight { value: bool },
    MacSupports { p1: CMat, p2: CMat, tol: f64 },
    MacConsistency,
    SupportProjection { expect: CMat, tol: f64 },
    EsIdentities { tol: f64 },
    Choi { aux: Option<String>, cp: bool, contractive: Option<bool> },
    PositiveOnPsdSamples,
    Rcp { unital_route: bool, sampled: bool },
    SymmetricDecomposes { formula_tol: f64 },
    SymmetricFails,
    HermitianSup { at_least: Option<f64>, at_most: Option<f64>, slack: f64 },
    S5ReNorm { index: usize, value: f64, tol: f64 },
    S5USquareAtMost { index: usize, value: f64 },
    S5M1AtMost { index: usize, value: f64 },
    S5M2AtMost { index: usize, value: f64 },
    S5Nilpotent { index: usize },
    S5SlowBounds { slack: f64 },
    S5EConsistencyAtMost { value: f64 },
    HomResidualAtMost { value: f64 },
    HomResidualAtLeast { value: f64 },
    JordanResidualAtMost { value: f64 },
    PowerResidualAtMost { value: f64 },
    Custom { name: String },
    /// Computed and reported as SKIPPED with the outcome in the detail
    /// column; never asserted.
    RecordOnly { name: String },
}

/// One named assertion of a bundle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Expected {
    pub label: String,
    pub check: Check,
}

impl Expected {
    fn new(label: &str, check: Check) -> Self {
        Expected { label: label.to_string(), check }
    }
}

/// A gallery entry: space, map, certificates, auxiliary maps referenced by
/// certificates or checks, and the expected assertions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExampleBundle {
    pub name: String,
    pub description: String,
    /// Thematic group used for listings.
    pub group: String,
    pub experimental: bool,
    pub space: OpSpace,
    pub map: OpMap,
    /// Certificates tagged by target: `map`, `complement`, `reflection`, or
    /// the name of an auxiliary map.
    pub certificates: Vec<(String, Certificate)>,
    pub aux_maps: Vec<(String, OpMap)>,
    pub expected: Vec<Expected>,
    /// Amplification level used when the checks need norm searches.
    pub search_level: usize,
    /// Reduced search effort for bundles whose claims do not need the full
    /// restart budget.
    pub quick_search: bool,
    /// Support projection hint for the nilpotency suite, when a selfadjoint
    /// extension provides one.
    pub s5_e_hint: Option<CMat>,
}

impl ExampleBundle {
    pub fn certificate(&self, tag: &str) -> Option<&Certificate> {
        self.certificates.iter().find(|(t, _)| t == tag).map(|(_, c)| c)
    }

    pub fn aux_map(&self, name: &str) -> Option<&OpMap> {
        self.aux_maps.iter().find(|(t, _)| t == name).map(|(_, m)| m)
    }
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn re(x: f64) -> Complex64 {
    c64(x, 0.0)
}

fn tolerances() -> Tolerances {
    Tolerances::default()
}

// ---------------------------------------------------------------------------
// shared space constructors

/// Full matrix algebra `M_n` with the matrix-unit basis (row-major order).
pub fn full_matrix_space(n: usize, name: &str) -> OpSpace {
    let mut basis = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            basis.push(CMat::unit(n, i, j));
        }
    }
    OpSpace::new(n, basis, name, &tolerances()).expect("matrix units are independent")
}

/// Block-diagonal algebra inside `M_n` with full blocks at the given
/// `(offset, size)` positions.
pub fn block_algebra(n: usize, blocks: &[(usize, usize)], name: &str) -> OpSpace {
    let mut basis = Vec::new();
    for &(off, sz) in blocks {
        for i in 0..sz {
            for j in 0..sz {
                basis.push(CMat::unit(n, off + i, off + j));
            }
        }
    }
    OpSpace::new(n, basis, name, &tolerances()).expect("block units are independent")
}

/// The corner algebra over an operator space `X` in `M_h`: matrices
/// `[[l1 I_h, x], [0, l2 I_h]]` inside `M_{2h}`. Basis order: upper scalar
/// block, lower scalar block, then the `X` basis in the corner.
pub fn corner_algebra_over(x_space: &OpSpace, name: &str) -> OpSpace {
    let h = x_space.ambient_dim();
    let n = 2 * h;
    let mut basis = vec![
        CMat::identity(h).embed(n, n, 0, 0),
        CMat::identity(h).embed(n, n, h, h),
    ];
    for b in x_space.basis() {
        basis.push(b.embed(n, n, 0, h));
    }
    OpSpace::new(n, basis, name, &tolerances()).expect("corner basis is independent")
}

/// The equal-diagonal subalgebra of the corner algebra: `[[l I_h, x], [0, l I_h]]`.
pub fn corner_algebra_equal_diagonal(x_space: &OpSpace, name: &str) -> OpSpace {
    let h = x_space.ambient_dim();
    let n = 2 * h;
    let mut basis = vec![CMat::identity(n)];
    for b in x_space.basis() {
        basis.push(b.embed(n, n, 0, h));
    }
    OpSpace::new(n, basis, name, &tolerances()).expect("corner basis is independent")
}

/// The 3-dimensional subalgebra of `M_5`: span of the identity,
/// `N = E12 + E23 + 2 E45`, and `E13`.
pub fn five_by_five_space() -> OpSpace {
    OpSpace::new(
        5,
        vec![CMat::identity(5), five_nilpotent(), CMat::unit(5, 0, 2)],
        "A5",
        &tolerances(),
    )
    .expect("valid basis")
}

fn five_nilpotent() -> CMat {
    CMat::unit(5, 0, 1)
        .add(&CMat::unit(5, 1, 2))
        .add(&CMat::unit(5, 3, 4).scale_re(2.0))
}

// ---------------------------------------------------------------------------
// block construction: the 3-block algebra and its 7-block repair

/// Data for the block construction: pairs `(v1, v2)` of `h x h` matrices.
pub struct BlockData {
    pub h: usize,
    pub pairs: Vec<(CMat, CMat)>,
}

impl BlockData {
    /// Span of the products `v1 w2` over ordered pairs; errors when every
    /// product vanishes (the construction requires a nonzero ideal).
    fn product_span(&self, tol: &Tolerances) -> Result<OpSpace> {
        let mut gens = Vec::new();
        for (v1, _) in &self.pairs {
            for (_, w2) in &self.pairs {
                gens.push(v1.mul(w2));
            }
        }
        OpSpace::span(self.h, &gens, "C", tol)?.ok_or_else(|| {
            Error::Precondition("block construction needs a nonzero product ideal".into())
        })
    }
}

/// The 3-block algebra: `l I + v1@(0,1) + v2@(1,2) + c@(0,2)` in `M_{3h}`,
/// together with the idempotent that kills the `c` slot.
pub fn build_three_block(data: &BlockData, name: &str) -> Result<(OpSpace, OpMap)> {
    let tol = tolerances();
    let h = data.h;
    let n = 3 * h;
    let cspan = data.product_span(&tol)?;
    let mut basis = vec![CMat::identity(n)];
    let mut images = vec![CMat::identity(n)];
    for (v1, v2) in &data.pairs {
        let el = v1.embed(n, n, 0, h).add(&v2.embed(n, n, h, 2 * h));
        basis.push(el.clone());
        images.push(el);
    }
    for cmat in cspan.basis() {
        basis.push(cmat.embed(n, n, 0, 2 * h));
        images.push(CMat::zeros(n, n));
    }
    let space = OpSpace::new(n, basis, name, &tol)?;
    let map = OpMap::new(&format!("P[{name}]"), space.clone(), n, images)?;
    Ok((space, map))
}

/// The 7-block algebra: the 3-block layout in the upper corner and doubled
/// copies of `v1, v2` at blocks `(3,5)` and `(4,6)`, with the idempotent
/// killing the `c` slot. Returns the space, the map, and certificates for
/// the map and its complement.
pub fn build_seven_block(
    data: &BlockData,
    name: &str,
) -> Result<(OpSpace, OpMap, Certificate, Certificate)> {
    let tol = tolerances();
    let h = data.h;
    let n = 7 * h;
    let cspan = data.product_span(&tol)?;
    let mut basis = vec![CMat::identity(n)];
    let mut images = vec![CMat::identity(n)];
    for (v1, v2) in &data.pairs {
        let el = v1
            .embed(n, n, 0, h)
            .add(&v2.embed(n, n, h, 2 * h))
            .add(&v1.scale_re(2.0).embed(n, n, 3 * h, 5 * h))
            .add(&v2.scale_re(2.0).embed(n, n, 4 * h, 6 * h));
        basis.push(el.clone());
        images.push(el);
    }
    for cmat in cspan.basis() {
        basis.push(cmat.embed(n, n, 0, 2 * h));
        images.push(CMat::zeros(n, n));
    }
    let space = OpSpace::new(n, basis, name, &tol)?;
    let map = OpMap::new(&format!("P[{name}]"), space.clone(), n, images)?;

    let map_cert = seven_block_cert(data, &space)?;
    let comp_cert = kill_all_but_corner_cert(n, h);
    Ok((space, map, map_cert, comp_cert))
}

/// `x -> Q1 x Q3` keeps exactly the `c` slot (rows `0..h`, columns
/// `2h..3h`) in place: a certificate for the complement of the block
/// projection.
fn kill_all_but_corner_cert(n: usize, h: usize) -> Certificate {
    let mut q1 = CMat::zeros(n, n);
    q1.set_block(0, 0, &CMat::identity(h));
    let mut q3 = CMat::zeros(n, n);
    q3.set_block(2 * h, 2 * h, &CMat::identity(h));
    Certificate::conjugation(q1, q3)
}

/// The factorization certificate for the 7-block projection: compress to
/// the lower 4-block corner (which is the equal-diagonal corner algebra over
/// the doubled copy of the data), then map `x -> j(x) (+) x`, where `j`
/// sends the corner algebra into the 3-block algebra by an averaging
/// conjugation of the corner functor over a block placement.
fn seven_block_cert(data: &BlockData, ambient_space: &OpSpace) -> Result<Certificate> {
    let tol = tolerances();
    let h = data.h;
    let n = 7 * h;

    // Compression to rows/columns 3h..7h.
    let sel = CMat::selection(n, &(3 * h..7 * h).collect::<Vec<_>>());
    let kappa = Certificate::conjugation(sel.adjoint(), sel);

    // The corner algebra over the doubled data inside M_{4h}.
    let mut u_basis = vec![
        CMat::identity(2 * h).embed(4 * h, 4 * h, 0, 0),
        CMat::identity(2 * h).embed(4 * h, 4 * h, 2 * h, 2 * h),
    ];
    for (v1, v2) in &data.pairs {
        let el = v1
            .scale_re(2.0)
            .embed(4 * h, 4 * h, 0, 2 * h)
            .add(&v2.scale_re(2.0).embed(4 * h, 4 * h, h, 3 * h));
        u_basis.push(el);
    }
    let u_space = OpSpace::new(4 * h, u_basis, "corner-data", &tol)?;

    // Placement: diagonal blocks of the corner content move onto the
    // superdiagonal of M_{3h}.
    let placement = Certificate::Placement {
        in_dim: 2 * h,
        out_dim: 3 * h,
        moves: vec![
            BlockMove { src_row: 0, src_col: 0, dst_row: 0, dst_col: h, height: h, width: h },
            BlockMove { src_row: h, src_col: h, dst_row: h, dst_col: 2 * h, height: h, width: h },
        ],
    };
    let r3 = averaging_row(3 * h);
    let j = Certificate::compose(vec![
        Certificate::Inclusion { space: u_space },
        Certificate::Corner { child: Box::new(placement) },
        Certificate::conjugation(r3.clone(), r3.adjoint()),
    ]);
    let id4h = Certificate::conjugation(CMat::identity(4 * h), CMat::identity(4 * h));

    let _ = ambient_space;
    Ok(Certificate::compose(vec![kappa, Certificate::direct_sum(vec![j, id4h])]))
}

/// `[I_k  I_k] / sqrt(2)`, the averaging gather of two diagonal copies.
fn averaging_row(k: usize) -> CMat {
    let s = re(1.0 / 2f64.sqrt());
    let mut r = CMat::zeros(k, 2 * k);
    for i in 0..k {
        r.set(i, i, s);
        r.set(i, k + i, s);
    }
    r
}

// ---------------------------------------------------------------------------
// certificates shared by the M_5 family

/// Certificate tree for the averaged shift `M_2 -> M_3`:
/// `y -> ((y11 + y22)/2) I_3 + (y12/2)(E12 + E23) + (y21/2)(E21 + E32)`.
///
/// Route: duplicate `y` four times, permute to `y (x) I_4`, conjugate by the
/// cyclic-shift unitary, average the two diagonal copies, compress to the
/// leading 3x3 corner. Every leaf is a conjugation by contractions, so the
/// composite is completely contractive; it is in fact completely positive
/// (the composite conjugations collapse to `y -> M (I_4 (x) y) M*`).
fn averaged_shift_cert() -> Certificate {
    let m2 = full_matrix_space(2, "M2");
    let dup = Certificate::direct_sum(vec![
        Certificate::Inclusion { space: m2.clone() },
        Certificate::Inclusion { space: m2.clone() },
        Certificate::Inclusion { space: m2.clone() },
        Certificate::Inclusion { space: m2 },
    ]);
    // permutation: old coordinate 2k+i (block k, inner i) -> new 4i+k
    let mut perm = vec![0usize; 8];
    for k in 0..4 {
        for i in 0..2 {
            perm[2 * k + i] = 4 * i + k;
        }
    }
    let p = CMat::permutation(&perm);
    let perm_conj = Certificate::conjugation(p.clone(), p.adjoint());

    // cyclic up-shift on 4 coordinates
    let mut shift = CMat::zeros(4, 4);
    shift.set(0, 1, re(1.0));
    shift.set(1, 2, re(1.0));
    shift.set(2, 3, re(1.0));
    shift.set(3, 0, re(1.0));
    let mut u = CMat::zeros(8, 8);
    u.set_block(0, 0, &CMat::identity(4));
    u.set_block(4, 4, &shift.adjoint());
    let twist = Certificate::conjugation(u.clone(), u.adjoint());

    let r4 = averaging_row(4);
    let avg = Certificate::conjugation(r4.clone(), r4.adjoint());

    let k3 = CMat::selection(4, &[0, 1, 2]);
    let compress = Certificate::conjugation(k3.adjoint(), k3);

    Certificate::compose(vec![dup, perm_conj, twist, avg, compress])
}

/// Certificate for the completely positive projection on `M_3 (+) M_2` that
/// replaces the `M_3` block by the averaged shift of the `M_2` block.
fn ptilde_cert() -> Certificate {
    let sel2 = CMat::selection(5, &[3, 4]);
    let corner2 = || Certificate::conjugation(sel2.adjoint(), sel2.clone());
    Certificate::direct_sum(vec![
        Certificate::compose(vec![corner2(), averaged_shift_cert()]),
        corner2(),
    ])
}

/// Certificate for the `M_5` projection: restrict the block-algebra
/// certificate to the 3-dimensional subalgebra.
fn five_by_five_cert() -> Certificate {
    Certificate::compose(vec![
        Certificate::Inclusion { space: block_algebra(5, &[(0, 3), (3, 2)], "M3+M2") },
        ptilde_cert(),
    ])
}

/// `x -> E11 x E33` keeps exactly the (1,3) entry in place.
fn corner_entry_cert() -> Certificate {
    Certificate::conjugation(CMat::unit(5, 0, 0), CMat::unit(5, 2, 2))
}

// ---------------------------------------------------------------------------
// functional-style certificates (rank-two outputs from scalar gathers)

/// `x -> (a d_ii + b d_jj) / 2` as a 1x1 output, where `d_ii, d_jj` are the
/// picked entries with signs: a scalar gather of two conjugation picks.
fn scalar_average_cert(n: usize, picks: [(usize, usize, f64); 2]) -> Certificate {
    let mut parts = Vec::with_capacity(2);
    for (i, j, sign) in picks {
        let mut left = CMat::zeros(1, n);
        left.set(0, i, re(sign));
        let mut right = CMat::zeros(n, 1);
        right.set(j, 0, re(1.0));
        parts.push(Certificate::conjugation(left, right));
    }
    let r = averaging_row(1);
    Certificate::compose(vec![Certificate::direct_sum(parts), Certificate::conjugation(r.clone(), r.adjoint())])
}

// ---------------------------------------------------------------------------
// builders

fn bundle_five_by_five() -> ExampleBundle {
    let space = five_by_five_space();
    let images = vec![CMat::identity(5), five_nilpotent(), CMat::zeros(5, 5)];
    let map = OpMap::new("P5", space.clone(), 5, images).expect("valid images");

    // auxiliary: the one-dimensional-data 7-block algebra and the canonical
    // isomorphisms between it and the M_5 picture.
    let data1 = BlockData { h: 1, pairs: vec![(CMat::identity(1), CMat::identity(1))] };
    let (seven_space, _seven_map, _c7, _ic7) =
        build_seven_block(&data1, "A7").expect("one-dimensional block data is valid");
    let embed_images: Vec<CMat> = vec![
        CMat::identity(7),
        CMat::unit(7, 0, 1)
            .add(&CMat::unit(7, 1, 2))
            .add(&CMat::unit(7, 3, 5).scale_re(2.0))
            .add(&CMat::unit(7, 4, 6).scale_re(2.0)),
        CMat::unit(7, 0, 2),
    ];
    let embed = OpMap::new("embed7", space.clone(), 7, embed_images).expect("valid");
    let compress_images: Vec<CMat> = vec![
        CMat::identity(5),
        five_nilpotent(),
        CMat::unit(5, 0, 2),
    ];
    let compress = OpMap::new("compress5", seven_space, 5, compress_images).expect("valid");

    // certificate for embed: split into the three diagonal blocks (the 2-block
    // twice) and permute into the interleaved layout.
    let sel3 = CMat::selection(5, &[0, 1, 2]);
    let sel2 = CMat::selection(5, &[3, 4]);
    let c1 = Certificate::conjugation(sel3.adjoint(), sel3);
    let c2 = || Certificate::conjugation(sel2.adjoint(), sel2.clone());
    let perm = CMat::permutation(&[0, 1, 2, 3, 5, 4, 6]);
    let embed_cert = Certificate::compose(vec![
        Certificate::direct_sum(vec![c1, c2(), c2()]),
        Certificate::conjugation(perm.clone(), perm.adjoint()),
    ]);
    let ksel = CMat::selection(7, &[0, 1, 2, 3, 5]);
    let compress_cert = Certificate::conjugation(ksel.adjoint(), ksel);

    let e_hint = CMat::unit(5, 3, 3).add(&CMat::unit(5, 4, 4));

    let expected = vec![
        Expected::new("idempotent_residual < 1e-10", Check::IdempotentResidualAtMost { value: 1e-10 }),
        Expected::new("unital == true", Check::Unital { value: true }),
        Expected::new("cert(map) valid with bound 1", Check::CertValid { tag: "map".into() }),
        Expected::new("cert(complement) valid with bound 1", Check::CertValid { tag: "complement".into() }),
        Expected::new(
            "lower(map, level 5) == 1 within 1e-6",
            Check::LowerAtMost { target: MapTarget::Map, level: 5, value: 1.0, slack: 1e-6 },
        ),
        Expected::new(
            "lower(map, level 5) >= 1 - 1e-6",
            Check::LowerAtLeast { target: MapTarget::Map, level: 5, value: 1.0 - 1e-6 },
        ),
        Expected::new(
            "lower(complement, level 5) == 1 within 1e-6",
            Check::LowerAtMost { target: MapTarget::Complement, level: 5, value: 1.0, slack: 1e-6 },
        ),
        Expected::new(
            "lower(complement, level 5) >= 1 - 1e-6",
            Check::LowerAtLeast { target: MapTarget::Complement, level: 5, value: 1.0 - 1e-6 },
        ),
        Expected::new(
            "lower(reflection, level 5) > 1.01",
            Check::LowerAtLeast { target: MapTarget::Reflection, level: 5, value: 1.01 },
        ),
        Expected::new("range.is_subalgebra == false", Check::RangeFlag { flag: FlagKind::Subalgebra, value: false }),
        Expected::new("range.is_jordan_subalgebra == false", Check::RangeFlag { flag: FlagKind::Jordan, value: false }),
        Expected::new("kernel ideal dimension == 1", Check::KernelIdealDim { value: 1 }),
        Expected::new("kernel ideal squares to zero", Check::RkSquareZero { value: true }),
        Expected::new("kernel ideal products land in the range", Check::RkC2InRange { value: true }),
        Expected::new("range-module inclusions hold", Check::RkModule { value: true }),
        Expected::new("conditional expectation residual < 1e-10", Check::CondexpAtMost { value: 1e-10 }),
        Expected::new("product on the range is associative within 1e-10", Check::RkAssocAtMost { value: 1e-10 }),
        Expected::new(
            "support projections are E11 and E33",
            Check::MacSupports { p1: CMat::unit(5, 0, 0), p2: CMat::unit(5, 2, 2), tol: 1e-9 },
        ),
        Expected::new("left support condition == false", Check::MacLeft { value: false }),
        Expected::new("right support condition == false", Check::MacRight { value: false }),
        Expected::new("rcp verdict: both routes true", Check::Rcp { unital_route: true, sampled: true }),
        Expected::new("symmetric decomposition fails with a norm witness", Check::SymmetricFails),
        Expected::new("hermitian grid sup > 1.01", Check::HermitianSup { at_least: Some(1.01), at_most: None, slack: 0.0 }),
        Expected::new("||Re x|| == 0.5 for the normalized ideal element", Check::S5ReNorm { index: 0, value: 0.5, tol: 1e-9 }),
        Expected::new("||u(x)^2|| < 1e-9", Check::S5USquareAtMost { index: 0, value: 1e-9 }),
        Expected::new("part norms agree within 1e-9", Check::S5M1AtMost { index: 0, value: 1e-9 }),
        Expected::new("tripotent squares agree within 1e-9", Check::S5M2AtMost { index: 0, value: 1e-9 }),
        Expected::new("ideal element is nilpotent", Check::S5Nilpotent { index: 0 }),
        Expected::new("decay bounds hold for the first four square powers", Check::S5SlowBounds { slack: 1e-9 }),
        Expected::new("support hint annihilates the kernel ideal", Check::S5EConsistencyAtMost { value: 1e-9 }),
        Expected::new("compression from the 7-block picture is a complete isometry", Check::Custom { name: "compression_iso".into() }),
    ];

    ExampleBundle {
        name: "five_by_five".into(),
        description: "3-dim unital subalgebra of M_5 with the completely bicontractive projection killing the (1,3) entry; its range is not a subalgebra".into(),
        group: "counterexamples".into(),
        experimental: false,
        space,
        map,
        certificates: vec![
            ("map".into(), five_by_five_cert()),
            ("complement".into(), corner_entry_cert()),
            ("embed7".into(), embed_cert),
            ("compress5".into(), compress_cert),
        ],
        aux_maps: vec![("embed7".into(), embed), ("compress5".into(), compress)],
        expected,
        search_level: 5,
        quick_search: false,
        s5_e_hint: Some(e_hint.clone()),
    }
}

fn ptilde_map() -> (OpSpace, OpMap) {
    let space = block_algebra(5, &[(0, 3), (3, 2)], "M3+M2");
    let images: Vec<CMat> = space
        .basis()
        .iter()
        .map(|b| {
            // b is a matrix unit in one of the two blocks
            let y = b.block(3, 3, 2, 2);
            let t = averaged_shift_apply(&y);
            let mut out = CMat::zeros(5, 5);
            out.set_block(0, 0, &t);
            out.set_block(3, 3, &y);
            out
        })
        .collect();
    let map = OpMap::new("Ptilde", space.clone(), 5, images).expect("valid images");
    (space, map)
}

/// `y -> ((y11 + y22)/2) I_3 + (y12/2) (E12+E23) + (y21/2) (E21+E32)`.
fn averaged_shift_apply(y: &CMat) -> CMat {
    let mut t = CMat::zeros(3, 3);
    let half_tr = (y.get(0, 0) + y.get(1, 1)) * re(0.5);
    for i in 0..3 {
        t.set(i, i, half_tr);
    }
    let b = y.get(0, 1) * re(0.5);
    t.set(0, 1, b);
    t.set(1, 2, b);
    let c = y.get(1, 0) * re(0.5);
    t.set(1, 0, c);
    t.set(2, 1, c);
    t
}

fn bundle_ptilde() -> ExampleBundle {
    let (space, map) = ptilde_map();
    // zero extension to the full M_5, used for the Choi test and the CP leaf
    let full = full_matrix_space(5, "M5");
    let tol = tolerances();
    let ext_images: Vec<CMat> = full
        .basis()
        .iter()
        .map(|b| {
            if space.contains(b, &tol) {
                map.apply(b, &tol).expect("block unit")
            } else {
                CMat::zeros(5, 5)
            }
        })
        .collect();
    let ext = OpMap::new("Ptilde-ext", full, 5, ext_images).expect("valid images");
    let ext_cp_cert = Certificate::CpLeaf { map: ext.clone() };

    let e_expect = CMat::unit(5, 3, 3).add(&CMat::unit(5, 4, 4));
    let expected = vec![
        Expected::new("idempotent_residual < 1e-10", Check::IdempotentResidualAtMost { value: 1e-10 }),
        Expected::new("unital == true", Check::Unital { value: true }),
        Expected::new("cert(map) valid with bound 1", Check::CertValid { tag: "map".into() }),
        Expected::new("cert(complement) valid with bound 1", Check::CertValid { tag: "complement".into() }),
        Expected::new("zero extension is a valid CP leaf", Check::CertValid { tag: "extension".into() }),
        Expected::new("choi of the extension is PSD and unit-contractive", Check::Choi { aux: Some("extension".into()), cp: true, contractive: Some(true) }),
        Expected::new("support projection == 0 (+) I2", Check::SupportProjection { expect: e_expect, tol: 1e-8 }),
        Expected::new("support identities P(x)e = exe = xe hold within 1e-8", Check::EsIdentities { tol: 1e-8 }),
        Expected::new("lower(map, level 2) <= 1 + 1e-6", Check::LowerAtMost { target: MapTarget::Map, level: 2, value: 1.0, slack: 1e-6 }),
        Expected::new("range is a subalgebra", Check::RangeFlag { flag: FlagKind::Subalgebra, value: true }),
        Expected::new("rcp verdict: both routes true", Check::Rcp { unital_route: true, sampled: true }),
    ];

    ExampleBundle {
        name: "ptilde_m3m2".into(),
        description: "completely positive completely contractive projection on M_3 (+) M_2 extending the M_5 projection; support projection 0 (+) I_2".into(),
        group: "support projections".into(),
        experimental: false,
        space,
        map,
        certificates: vec![
            ("map".into(), ptilde_cert()),
            ("complement".into(), corner_entry_cert()),
            ("extension".into(), ext_cp_cert),
        ],
        aux_maps: vec![("extension".into(), ext)],
        expected,
        search_level: 2,
        quick_search: true,
        s5_e_hint: None,
    }
}

fn bundle_transpose_avg() -> ExampleBundle {
    let space = full_matrix_space(2, "M2");
    let images: Vec<CMat> = space.basis().iter().map(|b| b.add(&b.transpose()).scale_re(0.5)).collect();
    let map = OpMap::new("sym-avg", space.clone(), 2, images).expect("valid images");

    // complement: x -> psi(x) (E12 - E21) with psi(x) = (x12 - x21)/2
    let psi_plus = scalar_average_cert(2, [(0, 1, 1.0), (1, 0, -1.0)]);
    let psi_minus = scalar_average_cert(2, [(0, 1, -1.0), (1, 0, 1.0)]);
    let swap = CMat::unit(2, 0, 1).add(&CMat::unit(2, 1, 0));
    let comp_cert = Certificate::compose(vec![
        Certificate::direct_sum(vec![psi_minus, psi_plus]),
        Certificate::conjugation(swap, CMat::identity(2)),
    ]);

    let expected = vec![
        Expected::new("idempotent_residual < 1e-10", Check::IdempotentResidualAtMost { value: 1e-10 }),
        Expected::new("unital == true", Check::Unital { value: true }),
        Expected::new("choi is not PSD", Check::Choi { aux: None, cp: false, contractive: None }),
        Expected::new("map preserves PSD inputs (sampled)", Check::PositiveOnPsdSamples),
        Expected::new("cert(complement) valid with bound 1", Check::CertValid { tag: "complement".into() }),
        Expected::new("lower(map, level 1) <= 1 + 1e-6", Check::LowerAtMost { target: MapTarget::Map, level: 1, value: 1.0, slack: 1e-6 }),
        Expected::new("lower(complement, level 2) <= 1 + 1e-6", Check::LowerAtMost { target: MapTarget::Complement, level: 2, value: 1.0, slack: 1e-6 }),
        Expected::new("lower(map, level 2) > 1.05", Check::LowerAtLeast { target: MapTarget::Map, level: 2, value: 1.05 }),
        Expected::new("range is a Jordan subalgebra", Check::RangeFlag { flag: FlagKind::Jordan, value: true }),
        Expected::new("range is not a subalgebra", Check::RangeFlag { flag: FlagKind::Subalgebra, value: false }),
    ];

    ExampleBundle {
        name: "transpose_avg_m2".into(),
        description: "the symmetrization (x + x^T)/2 on M_2: positive and contractive with completely contractive complement, yet not completely positive".into(),
        group: "positivity boundaries".into(),
        experimental: false,
        space,
        map,
        certificates: vec![("complement".into(), comp_cert)],
        aux_maps: vec![],
        expected,
        search_level: 2,
        quick_search: false,
        s5_e_hint: None,
    }
}

fn bundle_parity() -> ExampleBundle {
    let space = OpSpace::new(
        2,
        vec![CMat::unit(2, 0, 0), CMat::unit(2, 1, 1)],
        "D2",
        &tolerances(),
    )
    .expect("valid");
    let half = CMat::identity(2).scale_re(0.5);
    let map = OpMap::new("parity", space.clone(), 2, vec![half.clone(), half]).expect("valid");

    let avg = || scalar_average_cert(2, [(0, 0, 1.0), (1, 1, 1.0)]);
    let p_cert = Certificate::direct_sum(vec![avg(), avg()]);
    let d_plus = scalar_average_cert(2, [(0, 0, 1.0), (1, 1, -1.0)]);
    let d_minus = scalar_average_cert(2, [(0, 0, -1.0), (1, 1, 1.0)]);
    let comp_cert = Certificate::direct_sum(vec![d_plus, d_minus]);
    let swap = CMat::unit(2, 0, 1).add(&CMat::unit(2, 1, 0));
    let refl_cert = Certificate::conjugation(swap.clone(), swap);

    let expected = vec![
        Expected::new("idempotent_residual < 1e-10", Check::IdempotentResidualAtMost { value: 1e-10 }),
        Expected::new("unital == true", Check::Unital { value: true }),
        Expected::new("cert(map) valid with bound 1", Check::CertValid { tag: "map".into() }),
        Expected::new("cert(complement) valid with bound 1", Check::CertValid { tag: "complement".into() }),
        Expected::new("cert(reflection) valid with bound 1", Check::CertValid { tag: "reflection".into() }),
        Expected::new("symmetric decomposition round-trips with residual < 1e-10", Check::SymmetricDecomposes { formula_tol: 1e-10 }),
        Expected::new("range is the scalars", Check::Custom { name: "range_is_scalars".into() }),
        Expected::new("kernel is not a subalgebra", Check::Custom { name: "kernel_not_subalgebra".into() }),
        Expected::new("hermitian grid sup == sqrt(2) within 1e-3", Check::HermitianSup { at_least: Some(1.4132), at_most: Some(1.41422), slack: 1e-3 }),
        Expected::new("rcp verdict: both routes true", Check::Rcp { unital_route: true, sampled: true }),
    ];

    ExampleBundle {
        name: "parity_d2".into(),
        description: "two-point parity averaging (I + swap)/2 on the diagonal algebra: completely symmetric, range the scalars, kernel not a subalgebra".into(),
        group: "symmetric projections".into(),
        experimental: false,
        space,
        map,
        certificates: vec![
            ("map".into(), p_cert),
            ("complement".into(), comp_cert),
            ("reflection".into(), refl_cert),
        ],
        aux_maps: vec![],
        expected,
        search_level: 2,
        quick_search: false,
        s5_e_hint: None,
    }
}

fn bundle_ad_symmetry() -> ExampleBundle {
    let space = full_matrix_space(2, "M2");
    let j = CMat::diag(&[re(1.0), re(-1.0)]);
    let images: Vec<CMat> = space.basis().iter().map(|b| b.add(&j.mul(b).mul(&j)).scale_re(0.5)).collect();
    let map = OpMap::new("ad-sym", space.clone(), 2, images).expect("valid");

    let m2 = full_matrix_space(2, "M2");
    let dup = || {
        Certificate::direct_sum(vec![
            Certificate::Inclusion { space: m2.clone() },
            Certificate::Inclusion { space: m2.clone() },
        ])
    };
    let s = re(1.0 / 2f64.sqrt());
    let mut a = CMat::zeros(2, 4);
    a.set_block(0, 0, &CMat::identity(2).scale(s));
    a.set_block(0, 2, &j.scale(s));
    let p_cert = Certificate::compose(vec![dup(), Certificate::conjugation(a.clone(), a.adjoint())]);
    let mut bmat = CMat::zeros(4, 2);
    bmat.set_block(0, 0, &CMat::identity(2).scale(s));
    bmat.set_block(2, 0, &j.scale(s).neg());
    let comp_cert = Certificate::compose(vec![dup(), Certificate::conjugation(a, bmat)]);
    let refl_cert = Certificate::conjugation(j.clone(), j);

    let expected = vec![
        Expected::new("idempotent_residual < 1e-10", Check::IdempotentResidualAtMost { value: 1e-10 }),
        Expected::new("unital == true", Check::Unital { value: true }),
        Expected::new("cert(map) valid with bound 1", Check::CertValid { tag: "map".into() }),
        Expected::new("cert(complement) valid with bound 1", Check::CertValid { tag: "complement".into() }),
        Expected::new("cert(reflection) valid with bound 1", Check::CertValid { tag: "reflection".into() }),
        Expected::new("symmetric decomposition round-trips with residual < 1e-10", Check::SymmetricDecomposes { formula_tol: 1e-10 }),
        Expected::new("range is a subalgebra", Check::RangeFlag { flag: FlagKind::Subalgebra, value: true }),
        Expected::new("conditional expectation residual < 1e-10", Check::CondexpAtMost { value: 1e-10 }),
        Expected::new("choi is PSD and unit-contractive", Check::Choi { aux: None, cp: true, contractive: Some(true) }),
        Expected::new("rcp verdict: both routes true", Check::Rcp { unital_route: true, sampled: true }),
    ];

    ExampleBundle {
        name: "ad_symmetry_m2".into(),
        description: "the diagonal conditional expectation (x + JxJ)/2 on M_2 built from the period-2 automorphism Ad(J)".into(),
        group: "symmetric projections".into(),
        experimental: false,
        space,
        map,
        certificates: vec![
            ("map".into(), p_cert),
            ("complement".into(), comp_cert),
            ("reflection".into(), refl_cert),
        ],
        aux_maps: vec![],
        expected,
        search_level: 2,
        quick_search: true,
        s5_e_hint: None,
    }
}

fn upper_triangular_2() -> OpSpace {
    OpSpace::new(
        2,
        vec![CMat::unit(2, 0, 0), CMat::unit(2, 0, 1), CMat::unit(2, 1, 1)],
        "T2",
        &tolerances(),
    )
    .expect("valid")
}

fn bundle_tri2_corner() -> ExampleBundle {
    let space = upper_triangular_2();
    let images = vec![CMat::unit(2, 0, 0), CMat::zeros(2, 2), CMat::zeros(2, 2)];
    let map = OpMap::new("corner-cut", space.clone(), 2, images).expect("valid");

    let e11 = CMat::unit(2, 0, 0);
    let e22 = CMat::unit(2, 1, 1);
    let j = CMat::diag(&[re(1.0), re(-1.0)]);
    let expected = vec![
        Expected::new("idempotent_residual < 1e-10", Check::IdempotentResidualAtMost { value: 1e-10 }),
        Expected::new("unital == false", Check::Unital { value: false }),
        Expected::new("P(1) is the corner projection", Check::UnitImage { expect: e11.clone(), tol: 1e-12 }),
        Expected::new("cert(map) valid with bound 1", Check::CertValid { tag: "map".into() }),
        Expected::new("cert(complement) valid with bound 1", Check::CertValid { tag: "complement".into() }),
        Expected::new("cert(reflection) valid with bound 1", Check::CertValid { tag: "reflection".into() }),
        Expected::new("range is a subalgebra", Check::RangeFlag { flag: FlagKind::Subalgebra, value: true }),
        Expected::new("hermitian grid sup == 1 within 1e-6", Check::HermitianSup { at_least: Some(1.0 - 1e-6), at_most: Some(1.0), slack: 1e-6 }),
    ];

    ExampleBundle {
        name: "tri2_corner".into(),
        description: "compression of the upper-triangular 2x2 algebra onto its (1,1) corner: completely bicontractive, completely hermitian, range a subalgebra".into(),
        group: "corner algebras".into(),
        experimental: false,
        space,
        map,
        certificates: vec![
            ("map".into(), Certificate::conjugation(e11.clone(), e11)),
            ("complement".into(), Certificate::conjugation(CMat::identity(2), e22)),
            ("reflection".into(), Certificate::conjugation(CMat::identity(2), j)),
        ],
        aux_maps: vec![],
        expected,
        search_level: 2,
        quick_search: true,
        s5_e_hint: None,
    }
}

fn bundle_tri2_counterexample() -> ExampleBundle {
    let space = upper_triangular_2();
    let jhalf = CMat::diag(&[re(0.5), re(-0.5)]);
    let images = vec![jhalf.clone(), CMat::zeros(2, 2), jhalf.neg()];
    let map = OpMap::new("diag-split", space.clone(), 2, images).expect("valid");

    let m_plus = scalar_average_cert(2, [(0, 0, 1.0), (1, 1, -1.0)]);
    let m_minus = scalar_average_cert(2, [(0, 0, -1.0), (1, 1, 1.0)]);
    let p_cert = Certificate::direct_sum(vec![m_plus, m_minus]);

    let expected = vec![
        Expected::new("idempotent_residual < 1e-10", Check::IdempotentResidualAtMost { value: 1e-10 }),
        Expected::new("P(1) == 0", Check::UnitImage { expect: CMat::zeros(2, 2), tol: 1e-12 }),
        Expected::new("cert(map) valid with bound 1", Check::CertValid { tag: "map".into() }),
        Expected::new("lower(complement, level 1) <= 1 + 1e-6", Check::LowerAtMost { target: MapTarget::Complement, level: 1, value: 1.0, slack: 1e-6 }),
        Expected::new("lower(complement, level 2) > 1.2", Check::LowerAtLeast { target: MapTarget::Complement, level: 2, value: 1.2 }),
        Expected::new("range is not a subalgebra", Check::RangeFlag { flag: FlagKind::Subalgebra, value: false }),
    ];

    ExampleBundle {
        name: "tri2_bicontractive_counterexample".into(),
        description: "on the upper-triangular 2x2 algebra: [a b; 0 c] -> diag((a-c)/2, (c-a)/2); completely contractive, bicontractive at level 1 only, P(1) = 0, range not a subalgebra".into(),
        group: "counterexamples".into(),
        experimental: false,
        space,
        map,
        certificates: vec![("map".into(), p_cert)],
        aux_maps: vec![],
        expected,
        search_level: 2,
        quick_search: false,
        s5_e_hint: None,
    }
}

fn bundle_paulsen_u() -> ExampleBundle {
    // X = span{E11, E12} in M_2; P kills E12. The induced projection on the
    // corner algebra over X is completely symmetric with subalgebra range.
    let x_space = OpSpace::new(
        2,
        vec![CMat::unit(2, 0, 0), CMat::unit(2, 0, 1)],
        "X",
        &tolerances(),
    )
    .expect("valid");
    let space = corner_algebra_over(&x_space, "U(X)");
    let n = 4;
    let images = vec![
        space.basis()[0].clone(),
        space.basis()[1].clone(),
        space.basis()[2].clone(),
        CMat::zeros(n, n),
    ];
    let map = OpMap::new("corner-lift", space.clone(), n, images).expect("valid");

    let e11 = CMat::unit(2, 0, 0);
    let j = CMat::diag(&[re(1.0), re(-1.0)]);
    let expected = vec![
        Expected::new("idempotent_residual < 1e-10", Check::IdempotentResidualAtMost { value: 1e-10 }),
        Expected::new("unital == true", Check::Unital { value: true }),
        Expected::new("cert(map) valid with bound 1", Check::CertValid { tag: "map".into() }),
        Expected::new("cert(complement) valid with bound 1", Check::CertValid { tag: "complement".into() }),
        Expected::new("cert(reflection) valid with bound 1", Check::CertValid { tag: "reflection".into() }),
        Expected::new("range is a subalgebra", Check::RangeFlag { flag: FlagKind::Subalgebra, value: true }),
        Expected::new("mac consistency: a true support condition forces a subalgebra range", Check::MacConsistency),
        Expected::new("rcp verdict: both routes true", Check::Rcp { unital_route: true, sampled: true }),
        Expected::new("symmetric decomposition round-trips with residual < 1e-10", Check::SymmetricDecomposes { formula_tol: 1e-10 }),
    ];

    ExampleBundle {
        name: "paulsen_u".into(),
        description: "idempotent on the corner algebra over X = span{E11, E12} induced by killing E12: completely symmetric via the corner functor".into(),
        group: "corner embeddings".into(),
        experimental: false,
        space,
        map,
        certificates: vec![
            ("map".into(), Certificate::Corner { child: Box::new(Certificate::conjugation(CMat::identity(2), e11)) }),
            ("complement".into(), Certificate::conjugation(CMat::unit(4, 0, 0), CMat::unit(4, 3, 3))),
            ("reflection".into(), Certificate::Corner { child: Box::new(Certificate::conjugation(CMat::identity(2), j)) }),
        ],
        aux_maps: vec![],
        expected,
        search_level: 2,
        quick_search: true,
        s5_e_hint: None,
    }
}

fn bundle_paulsen_u0() -> ExampleBundle {
    // V = scalar pairs (nu, nu) doubled into M_2; the equal-diagonal corner
    // algebra over V sits in M_4, and j maps it into M_3 by halving.
    let v_space = OpSpace::new(2, vec![CMat::identity(2)], "V", &tolerances()).expect("valid");
    let space = corner_algebra_equal_diagonal(&v_space, "U0(V)");
    let j_images = vec![CMat::identity(3), {
        let mut t = CMat::zeros(3, 3);
        t.set(0, 1, re(0.5));
        t.set(1, 2, re(0.5));
        t
    }];
    let map = OpMap::new("halving-embed", space.clone(), 3, j_images).expect("valid");

    // certificate: include into the full corner algebra, apply the corner
    // functor over the shift placement, then average.
    let full_u = corner_algebra_over(&v_space, "U(V)");
    let placement = Certificate::Placement {
        in_dim: 2,
        out_dim: 3,
        moves: vec![
            BlockMove { src_row: 0, src_col: 0, dst_row: 0, dst_col: 1, height: 1, width: 1 },
            BlockMove { src_row: 1, src_col: 1, dst_row: 1, dst_col: 2, height: 1, width: 1 },
        ],
    };
    let r3 = averaging_row(3);
    let j_cert = Certificate::compose(vec![
        Certificate::Inclusion { space: full_u },
        Certificate::Corner { child: Box::new(placement) },
        Certificate::conjugation(r3.clone(), r3.adjoint()),
    ]);

    let expected = vec![
        Expected::new("cert(map) valid with bound 1", Check::CertValid { tag: "map".into() }),
        Expected::new("unit maps to unit", Check::Custom { name: "unital_map".into() }),
        Expected::new("lower(map, level 3) <= 1 + 1e-6", Check::LowerAtMost { target: MapTarget::Map, level: 3, value: 1.0, slack: 1e-6 }),
        Expected::new("space dimension == 2", Check::SpaceDim { value: 2 }),
    ];

    ExampleBundle {
        name: "paulsen_u0".into(),
        description: "the halving embedding of the equal-diagonal corner algebra over scalar pairs into M_3, certified by corner functor plus averaging".into(),
        group: "corner embeddings".into(),
        experimental: false,
        space,
        map,
        certificates: vec![("map".into(), j_cert)],
        aux_maps: vec![],
        expected,
        search_level: 3,
        quick_search: true,
        s5_e_hint: None,
    }
}

fn bundle_theta_v() -> ExampleBundle {
    // X = span{E12} in M_2, v = c id with |c| < 1: the induced endomorphism
    // of the corner algebra over X.
    let cval = c64(0.6, -0.3);
    let x_space = OpSpace::new(2, vec![CMat::unit(2, 0, 1)], "X", &tolerances()).expect("valid");
    let space = corner_algebra_over(&x_space, "U(X)");
    let images = vec![
        space.basis()[0].clone(),
        space.basis()[1].clone(),
        space.basis()[2].scale(cval),
    ];
    let map = OpMap::new("corner-endo", space.clone(), 4, images).expect("valid");

    let root = cval.sqrt();
    let leaf = Certificate::conjugation(CMat::identity(2).scale(root), CMat::identity(2).scale(root));
    let cert = Certificate::Corner { child: Box::new(leaf) };

    let expected = vec![
        Expected::new("cert(map) valid with bound 1", Check::CertValid { tag: "map".into() }),
        Expected::new("map is multiplicative within 1e-10", Check::HomResidualAtMost { value: 1e-10 }),
        Expected::new("powers are preserved within 1e-10", Check::PowerResidualAtMost { value: 1e-10 }),
        Expected::new("lower(map, level 2) <= 1 + 1e-6", Check::LowerAtMost { target: MapTarget::Map, level: 2, value: 1.0, slack: 1e-6 }),
        Expected::new("rcp verdict: both routes true", Check::Rcp { unital_route: true, sampled: true }),
    ];

    ExampleBundle {
        name: "theta_v".into(),
        description: "the endomorphism of the corner algebra over X = span{E12} induced by a strict contraction on X: a unital completely contractive homomorphism".into(),
        group: "corner embeddings".into(),
        experimental: false,
        space,
        map,
        certificates: vec![("map".into(), cert)],
        aux_maps: vec![],
        expected,
        search_level: 2,
        quick_search: true,
        s5_e_hint: None,
    }
}

fn scalar_pair_data() -> BlockData {
    BlockData { h: 1, pairs: vec![(CMat::identity(1), CMat::identity(1))] }
}

fn bundle_gco_b() -> ExampleBundle {
    let (space, map) = build_three_block(&scalar_pair_data(), "B3").expect("valid data");
    let expected = vec![
        Expected::new("idempotent_residual < 1e-10", Check::IdempotentResidualAtMost { value: 1e-10 }),
        Expected::new("unital == true", Check::Unital { value: true }),
        Expected::new("kernel ideal squares to zero", Check::RkSquareZero { value: true }),
        Expected::new("range is not a subalgebra", Check::RangeFlag { flag: FlagKind::Subalgebra, value: false }),
        Expected::new("lower(map, level 1) > 1.05", Check::LowerAtLeast { target: MapTarget::Map, level: 1, value: 1.05 }),
    ];
    ExampleBundle {
        name: "gco_b".into(),
        description: "the 3-block algebra over scalar data: all the structure of the counterexample, but the slot-killing idempotent is not even contractive".into(),
        group: "block constructions".into(),
        experimental: false,
        space,
        map,
        certificates: vec![],
        aux_maps: vec![],
        expected,
        search_level: 1,
        quick_search: false,
        s5_e_hint: None,
    }
}

fn bundle_gco_a() -> ExampleBundle {
    // doubled data z (+) z for z = E12 + E21 in M_2: nonzero products,
    // ambient M_14, one-dimensional kernel ideal.
    let z = CMat::unit(2, 0, 1).add(&CMat::unit(2, 1, 0));
    let data = BlockData { h: 2, pairs: vec![(z.clone(), z)] };
    let (space, map, map_cert, comp_cert) = build_seven_block(&data, "A7x2").expect("valid data");
    let expected = vec![
        Expected::new("idempotent_residual < 1e-10", Check::IdempotentResidualAtMost { value: 1e-10 }),
        Expected::new("unital == true", Check::Unital { value: true }),
        Expected::new("space dimension == 3", Check::SpaceDim { value: 3 }),
        Expected::new("cert(map) valid with bound 1", Check::CertValid { tag: "map".into() }),
        Expected::new("cert(complement) valid with bound 1", Check::CertValid { tag: "complement".into() }),
        Expected::new("kernel ideal dimension == 1", Check::KernelIdealDim { value: 1 }),
        Expected::new("kernel ideal squares to zero", Check::RkSquareZero { value: true }),
        Expected::new("range is not a subalgebra", Check::RangeFlag { flag: FlagKind::Subalgebra, value: false }),
        Expected::new("left support condition == false", Check::MacLeft { value: false }),
        Expected::new("doubled blocks carry coefficient 2", Check::Custom { name: "doubled_blocks".into() }),
    ];
    ExampleBundle {
        name: "gco_a".into(),
        description: "the 7-block repair of the block construction over doubled selfadjoint data in M_14: completely bicontractive slot-killing projection, range not a subalgebra".into(),
        group: "block constructions".into(),
        experimental: false,
        space,
        map,
        certificates: vec![("map".into(), map_cert), ("complement".into(), comp_cert)],
        aux_maps: vec![],
        expected,
        search_level: 1,
        quick_search: true,
        s5_e_hint: None,
    }
}

fn joup_generators() -> (CMat, CMat) {
    let mut x = CMat::zeros(4, 4);
    x.set(0, 3, re(1.0));
    x.set(1, 2, re(-1.0));
    let mut y = CMat::zeros(4, 4);
    y.set(1, 0, re(1.0));
    y.set(2, 3, re(1.0));
    (x, y)
}

fn bundle_joup() -> ExampleBundle {
    let (x, y) = joup_generators();
    let data = BlockData {
        h: 4,
        pairs: vec![(x.clone(), x.clone()), (y.clone(), y.clone())],
    };
    let (space, map, map_cert, comp_cert) = build_seven_block(&data, "A(V)").expect("valid data");
    let expected = vec![
        Expected::new("idempotent_residual < 1e-10", Check::IdempotentResidualAtMost { value: 1e-10 }),
        Expected::new("unital == true", Check::Unital { value: true }),
        Expected::new("generators anticommute exactly", Check::Custom { name: "generators_anticommute".into() }),
        Expected::new("cert(map) valid with bound 1", Check::CertValid { tag: "map".into() }),
        Expected::new("cert(complement) valid with bound 1", Check::CertValid { tag: "complement".into() }),
        Expected::new("kernel ideal dimension == 1", Check::KernelIdealDim { value: 1 }),
        Expected::new("range is a Jordan subalgebra", Check::RangeFlag { flag: FlagKind::Jordan, value: true }),
        Expected::new("range is not a subalgebra", Check::RangeFlag { flag: FlagKind::Subalgebra, value: false }),
        Expected::new("left support condition == false", Check::MacLeft { value: false }),
        Expected::new("right support condition == false", Check::MacRight { value: false }),
    ];
    ExampleBundle {
        name: "joup".into(),
        description: "anticommuting nilpotent pair in M_4, doubled into M_8 and fed through the 7-block construction in M_28: the range is a Jordan subalgebra but not a subalgebra".into(),
        group: "block constructions".into(),
        experimental: false,
        space,
        map,
        certificates: vec![("map".into(), map_cert), ("complement".into(), comp_cert)],
        aux_maps: vec![],
        expected,
        search_level: 1,
        quick_search: true,
        s5_e_hint: None,
    }
}

fn bundle_five_mod(which: &str) -> ExampleBundle {
    // Experimental zero-replacement variants of the M_5 algebra: one
    // superdiagonal coefficient of the nilpotent element is dropped.
    let n_mod = if which == "five_by_five_mod23" {
        CMat::unit(5, 0, 1).add(&CMat::unit(5, 3, 4).scale_re(2.0))
    } else {
        CMat::unit(5, 1, 2).add(&CMat::unit(5, 3, 4).scale_re(2.0))
    };
    let space = OpSpace::new(
        5,
        vec![CMat::identity(5), n_mod.clone(), CMat::unit(5, 0, 2)],
        which,
        &tolerances(),
    )
    .expect("valid");
    let images = vec![CMat::identity(5), n_mod, CMat::zeros(5, 5)];
    let map = OpMap::new(&format!("P[{which}]"), space.clone(), 5, images).expect("valid");
    let expected = vec![
        Expected::new("idempotent_residual < 1e-10", Check::IdempotentResidualAtMost { value: 1e-10 }),
        Expected::new("unital == true", Check::Unital { value: true }),
        Expected::new("support-condition outcome (recorded, not asserted)", Check::RecordOnly { name: "mac_outcome".into() }),
    ];
    ExampleBundle {
        name: which.into(),
        description: "experimental zero-replacement variant of the M_5 algebra; the support-condition outcome is recorded without assertion".into(),
        group: "counterexamples".into(),
        experimental: true,
        space,
        map,
        certificates: vec![],
        aux_maps: vec![],
        expected,
        search_level: 1,
        quick_search: true,
        s5_e_hint: None,
    }
}

// ---------------------------------------------------------------------------
// registry

/// Stable registry order.
pub const EXAMPLE_NAMES: [&str; 15] = [
    "five_by_five",
    "ptilde_m3m2",
    "transpose_avg_m2",
    "parity_d2",
    "ad_symmetry_m2",
    "tri2_corner",
    "tri2_bicontractive_counterexample",
    "paulsen_u",
    "paulsen_u0",
    "theta_v",
    "gco_b",
    "gco_a",
    "joup",
    "five_by_five_mod23",
    "five_by_five_mod32",
];

/// Build a registry entry by name.
pub fn build_example(name: &str) -> Result<ExampleBundle> {
    match name {
        "five_by_five" => Ok(bundle_five_by_five()),
        "ptilde_m3m2" => Ok(bundle_ptilde()),
        "transpose_avg_m2" => Ok(bundle_transpose_avg()),
        "parity_d2" => Ok(bundle_parity()),
        "ad_symmetry_m2" => Ok(bundle_ad_symmetry()),
        "tri2_corner" => Ok(bundle_tri2_corner()),
        "tri2_bicontractive_counterexample" => Ok(bundle_tri2_counterexample()),
        "paulsen_u" => Ok(bundle_paulsen_u()),
        "paulsen_u0" => Ok(bundle_paulsen_u0()),
        "theta_v" => Ok(bundle_theta_v()),
        "gco_b" => Ok(bundle_gco_b()),
        "gco_a" => Ok(bundle_gco_a()),
        "joup" => Ok(bundle_joup()),
        "five_by_five_mod23" | "five_by_five_mod32" => Ok(bundle_five_mod(name)),
        _ => Err(Error::UnknownExample(name.to_string())),
    }
}

/// `(name, one-line description, group, experimental)` for every entry, in
/// stable order.
pub fn list_examples() -> Vec<(String, String, String, bool)> {
    EXAMPLE_NAMES
        .iter()
        .map(|n| {
            let b = build_example(n).expect("registry entries build");
            (b.name, b.description, b.group, b.experimental)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::check_certificate;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn registry_builds_every_entry() {
        for name in EXAMPLE_NAMES {
            let b = build_example(name).unwrap();
            assert_eq!(b.name, name);
            assert!(!b.description.is_empty());
        }
        assert!(build_example("no_such_example").is_err());
    }

    #[test]
    fn listing_is_stable_and_flags_experimental() {
        let l = list_examples();
        assert_eq!(l.len(), EXAMPLE_NAMES.len());
        assert_eq!(l[0].0, "five_by_five");
        assert!(l.iter().any(|(n, _, _, exp)| n == "five_by_five_mod23" && *exp));
    }

    #[test]
    fn five_by_five_map_kills_the_corner_entry() {
        let b = build_example("five_by_five").unwrap();
        assert_eq!(b.space.dim(), 3);
        let out = b.map.apply(&CMat::unit(5, 0, 2), &tol()).unwrap();
        assert_eq!(out.max_abs(), 0.0);
        let id = b.map.apply(&CMat::identity(5), &tol()).unwrap();
        assert!(id.approx_eq(&CMat::identity(5), 1e-12));
    }

    #[test]
    fn five_by_five_certificates_validate() {
        let b = build_example("five_by_five").unwrap();
        let chk = check_certificate(b.certificate("map").unwrap(), &b.map, &tol());
        assert!(chk.valid, "{:?}", chk.failure);
        assert!((chk.certified_upper - 1.0).abs() < 1e-9);
        let comp = b.map.complement().unwrap();
        let chk2 = check_certificate(b.certificate("complement").unwrap(), &comp, &tol());
        assert!(chk2.valid, "{:?}", chk2.failure);
    }

    #[test]
    fn ptilde_matches_the_displayed_formula() {
        let (_, map) = ptilde_map();
        // y = E11 of the 2-block: T(y) = I_3/2
        let y = CMat::unit(5, 3, 3);
        let out = map.apply(&y, &tol()).unwrap();
        assert!(out.block(0, 0, 3, 3).approx_eq(&CMat::identity(3).scale_re(0.5), 1e-12));
        assert!(out.block(3, 3, 2, 2).approx_eq(&CMat::unit(2, 0, 0), 1e-12));
        // the restriction to the M_5 subalgebra reproduces the projection
        let b5 = build_example("five_by_five").unwrap();
        for (bvec, img) in b5.space.basis().iter().zip(b5.map.images()) {
            let via = map.apply(bvec, &tol()).unwrap();
            assert!(via.approx_eq(img, 1e-12));
        }
    }

    #[test]
    fn ptilde_certificates_validate() {
        let b = build_example("ptilde_m3m2").unwrap();
        let chk = check_certificate(b.certificate("map").unwrap(), &b.map, &tol());
        assert!(chk.valid, "{:?}", chk.failure);
        let ext = b.aux_map("extension").unwrap();
        let chk2 = check_certificate(b.certificate("extension").unwrap(), ext, &tol());
        assert!(chk2.valid, "{:?}", chk2.failure);
    }

    #[test]
    fn seven_block_certificates_validate_for_joup() {
        let b = build_example("joup").unwrap();
        assert_eq!(b.space.ambient_dim(), 28);
        assert_eq!(b.space.dim(), 4);
        let chk = check_certificate(b.certificate("map").unwrap(), &b.map, &tol());
        assert!(chk.valid, "{:?}", chk.failure);
        let comp = b.map.complement().unwrap();
        let chk2 = check_certificate(b.certificate("complement").unwrap(), &comp, &tol());
        assert!(chk2.valid, "{:?}", chk2.failure);
    }

    #[test]
    fn three_block_requires_nonzero_products()
    {
        // nilpotent scalar data with zero products is rejected
        let z = CMat::unit(2, 0, 1);
        let data = BlockData { h: 2, pairs: vec![(z.clone(), z)] };
        assert!(build_three_block(&data, "bad").is_err());
    }

    #[test]
    fn transpose_avg_complement_certificate_validates() {
        let b = build_example("transpose_avg_m2").unwrap();
        let comp = b.map.complement().unwrap();
        let chk = check_certificate(b.certificate("complement").unwrap(), &comp, &tol());
        assert!(chk.valid, "{:?}", chk.failure);
    }

    #[test]
    fn parity_certificates_validate() {
        let b = build_example("parity_d2").unwrap();
        for (tag, cert) in &b.certificates {
            let target = match tag.as_str() {
                "map" => b.map.clone(),
                "complement" => b.map.complement().unwrap(),
                "reflection" => b.map.reflection().unwrap(),
                _ => unreachable!(),
            };
            let chk = check_certificate(cert, &target, &tol());
            assert!(chk.valid, "{tag}: {:?}", chk.failure);
        }
    }

    #[test]
    fn corner_lift_certificates_validate() {
        for name in ["paulsen_u", "paulsen_u0", "theta_v"] {
            let b = build_example(name).unwrap();
            for (tag, cert) in &b.certificates {
                let target = match tag.as_str() {
                    "map" => b.map.clone(),
                    "complement" => b.map.complement().unwrap(),
                    "reflection" => b.map.reflection().unwrap(),
                    other => b.aux_map(other).cloned().unwrap(),
                };
                let chk = check_certificate(cert, &target, &tol());
                assert!(chk.valid, "{name}/{tag}: {:?}", chk.failure);
            }
        }
    }

    #[test]
    fn tri2_certificates_validate() {
        for name in ["tri2_corner", "tri2_bicontractive_counterexample", "ad_symmetry_m2"] {
            let b = build_example(name).unwrap();
            for (tag, cert) in &b.certificates {
                let target = match tag.as_str() {
                    "map" => b.map.clone(),
                    "complement" => b.map.complement().unwrap(),
                    "reflection" => b.map.reflection().unwrap(),
                    other => b.aux_map(other).cloned().unwrap(),
                };
                let chk = check_certificate(cert, &target, &tol());
                assert!(chk.valid, "{name}/{tag}: {:?}", chk.failure);
            }
        }
    }

    #[test]
    fn joup_generators_anticommute() {
        let (x, y) = joup_generators();
        assert_eq!(x.mul(&y).add(&y.mul(&x)).max_abs(), 0.0);
        assert!(x.mul(&y).max_abs() > 0.0);
        assert_eq!(x.mul(&x).max_abs(), 0.0);
        assert_eq!(y.mul(&y).max_abs(), 0.0);
    }

    #[test]
    fn iso_certificates_between_five_and_seven_validate() {
        let b = build_example("five_by_five").unwrap();
        let embed = b.aux_map("embed7").unwrap();
        let chk = check_certificate(b.certificate("embed7").unwrap(), embed, &tol());
        assert!(chk.valid, "{:?}", chk.failure);
        let compress = b.aux_map("compress5").unwrap();
        let chk2 = check_certificate(b.certificate("compress5").unwrap(), compress, &tol());
        assert!(chk2.valid, "{:?}", chk2.failure);
        // round trip is the identity on the 5x5 algebra
        let round = compress.compose(embed, &tol()).unwrap();
        for (bv, img) in round.domain().basis().iter().zip(round.images()) {
            assert!(bv.approx_eq(img, 1e-12));
        }
    }
}
