//! Exact convex geometry of the stabilizer, rebit-stabilizer, and CSS
//! polytopes in Pauli coordinates.
//!
//! States are encoded by the rational coordinate vector `r_P = Tr(rho
//! sigma_P) / 2^n` over the Hermitian Pauli basis (labels ordered
//! lexicographically with `I < X < Y < Z`, qubit 0 leftmost). Vertex
//! coordinates of the three vertex sets are dyadic, so all geometry —
//! facet enumeration, shared-facet identity, membership verdicts with
//! witnesses and separating certificates — is carried out in exact
//! rational arithmetic. Floating point appears only where a quantity is
//! genuinely irrational (eigenvalue scans) or as a pre-pass whose verdict
//! is never trusted near the boundary.

mod dd;
pub mod simplex;

pub use dd::{facets_of_points as dd_facets_of_points, Facet, PointFacets};

use ndarray::Array2;
use num::{BigInt, BigRational, ToPrimitive, Zero};
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{hermitian_pauli_matrix, BitVector, PauliLabel};
use crate::scalar::{real, Scalar, C};
use crate::state::{css_projectors, stabilizer_projectors, DensityMatrix};
use simplex::phase_one;

pub type Rat = BigRational;
/// Dense rational matrix (row-major).
pub type RatMatrix = Vec<Vec<Rat>>;

fn rat_int(x: i64) -> Rat {
    Rat::from_integer(BigInt::from(x))
}

// ---------------------------------------------------------------------------
// Pauli labels and coordinates
// ---------------------------------------------------------------------------

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// The Pauli label string of coordinate `idx` for `n` qubits
/// (lexicographic, `I < X < Y < Z`, qubit 0 first).
pub fn pauli_label_string(idx: usize, n: usize) -> String {
    (0..n)
        .map(|j| LETTERS[(idx >> (2 * (n - 1 - j))) & 3])
        .collect()
}

/// The `(u, v)` pair of coordinate `idx`: per factor, `I=(0,0)`, `X=(1,0)`,
/// `Y=(1,1)`, `Z=(0,1)`.
pub fn pauli_label(idx: usize, n: usize) -> PauliLabel {
    let mut u = BitVector::zero(n);
    let mut v = BitVector::zero(n);
    for j in 0..n {
        match (idx >> (2 * (n - 1 - j))) & 3 {
            0 => {}
            1 => u.set(j, true),
            2 => {
                u.set(j, true);
                v.set(j, true);
            }
            _ => v.set(j, true),
        }
    }
    PauliLabel::new(u, v).expect("equal lengths")
}

/// Number of `Y` factors in coordinate `idx`.
fn y_count(idx: usize, n: usize) -> usize {
    (0..n).filter(|j| (idx >> (2 * (n - 1 - j))) & 3 == 2).count()
}

/// The Hermitian Pauli `sigma_idx` as an exact integer matrix, available
/// exactly when the label has an even number of `Y` factors (odd counts
/// give imaginary matrices).
fn sigma_integer(idx: usize, n: usize) -> Option<Vec<Vec<i64>>> {
    let ys = y_count(idx, n);
    if ys % 2 == 1 {
        return None;
    }
    // Y = i K with K = [[0,-1],[1,0]]; an even Y count contributes the
    // real factor (-1)^(ys/2) once the K blocks are multiplied out.
    let factor: [[[i64; 2]; 2]; 4] = [
        [[1, 0], [0, 1]],   // I
        [[0, 1], [1, 0]],   // X
        [[0, -1], [1, 0]],  // K
        [[1, 0], [0, -1]],  // Z
    ];
    let mut m = vec![vec![1i64]];
    for j in 0..n {
        let f = factor[(idx >> (2 * (n - 1 - j))) & 3];
        let rows = m.len();
        let mut next = vec![vec![0i64; rows * 2]; rows * 2];
        for (r, row) in m.iter().enumerate() {
            for (c, &val) in row.iter().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        next[r * 2 + a][c * 2 + b] = val * f[a][b];
                    }
                }
            }
        }
        m = next;
    }
    let sign = if (ys / 2).is_multiple_of(2) { 1 } else { -1 };
    for row in &mut m {
        for v in row.iter_mut() {
            *v *= sign;
        }
    }
    Some(m)
}

/// Exact Pauli coordinates of a state: `r_P = Tr(rho sigma_P) / 2^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliCoords {
    n: usize,
    r: Vec<Rat>,
}

impl PauliCoords {
    pub fn new(n: usize, r: Vec<Rat>) -> Result<Self> {
        if r.len() != 1 << (2 * n) {
            return Err(Error::DimensionMismatch(format!(
                "Pauli coordinates for n={n} need {} entries, got {}",
                1usize << (2 * n),
                r.len()
            )));
        }
        Ok(PauliCoords { n, r })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Rat] {
        &self.r
    }

    /// Entry by label string, e.g. `"IZ"`.
    pub fn get(&self, label: &str) -> Option<&Rat> {
        let n = self.n;
        if label.len() != n {
            return None;
        }
        let mut idx = 0usize;
        for ch in label.chars() {
            idx = (idx << 2) | LETTERS.iter().position(|&l| l == ch)?;
        }
        self.r.get(idx)
    }
}

/// Maximum width for dense Pauli-coordinate extraction (`4^n` basis
/// matrices of size `2^n`).
pub const MAX_COORDS_QUBITS: usize = 5;

/// Exact Pauli coordinates of a state, through the f64 entries of `rho`
/// (dyadic inputs such as enumerated projectors convert without rounding).
pub fn pauli_coords<T: Scalar>(rho: &DensityMatrix<T>) -> Result<PauliCoords> {
    let n = rho.n();
    if n > MAX_COORDS_QUBITS {
        return Err(Error::SizeCap(format!(
            "Pauli coordinates cap at {MAX_COORDS_QUBITS} qubits, got {n}"
        )));
    }
    let d = rho.dim();
    let m = rho.matrix();
    let scale = 1.0 / d as f64;
    let mut r = Vec::with_capacity(d * d);
    for idx in 0..d * d {
        let sigma = hermitian_pauli_matrix::<f64>(&pauli_label(idx, n));
        let mut acc_re = 0.0f64;
        let mut acc_im = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let s = sigma[[i, j]];
                let x = m[[j, i]];
                let (xr, xi) = (
                    x.re.to_f64().unwrap_or(f64::NAN),
                    x.im.to_f64().unwrap_or(f64::NAN),
                );
                acc_re += s.re * xr - s.im * xi;
                acc_im += s.re * xi + s.im * xr;
            }
        }
        if acc_im.abs() > 1e-9 {
            return Err(Error::Numeric(format!(
                "Pauli coordinate {} has imaginary residue {acc_im:e}",
                pauli_label_string(idx, n)
            )));
        }
        let value = acc_re * scale;
        if idx == 0 {
            // The identity coordinate is Tr(rho)/d = 1/d by the unit-trace
            // contract; pin it exactly so convex weights sum to one.
            if (value - scale).abs() > 1e-9 {
                return Err(Error::InvalidState(format!(
                    "trace deviates from one: identity coordinate {value}"
                )));
            }
            r.push(Rat::new(BigInt::from(1), BigInt::from(d as i64)));
            continue;
        }
        let rat = Rat::from_float(value).ok_or_else(|| {
            Error::Numeric(format!("Pauli coordinate is not finite: {value}"))
        })?;
        r.push(rat);
    }
    PauliCoords::new(n, r)
}

/// Exact Pauli coordinates of a real symmetric rational matrix (odd-Y
/// coordinates vanish by symmetry and are returned as exact zeros).
fn pauli_coords_of_rational(m: &RatMatrix, n: usize) -> Result<PauliCoords> {
    let d = 1usize << n;
    if m.len() != d || m.iter().any(|row| row.len() != d) {
        return Err(Error::DimensionMismatch(format!(
            "rational matrix must be {d}x{d} for n={n}"
        )));
    }
    let scale = Rat::new(BigInt::from(1), BigInt::from(d as i64));
    let mut r = Vec::with_capacity(d * d);
    for idx in 0..d * d {
        match sigma_integer(idx, n) {
            None => r.push(Rat::zero()),
            Some(sigma) => {
                let mut acc = Rat::zero();
                for i in 0..d {
                    for j in 0..d {
                        if sigma[i][j] != 0 {
                            acc += rat_int(sigma[i][j]) * m[j][i].clone();
                        }
                    }
                }
                r.push(acc * scale.clone());
            }
        }
    }
    PauliCoords::new(n, r)
}

// ---------------------------------------------------------------------------
// Vertex sets
// ---------------------------------------------------------------------------

/// The three 2-qubit vertex sets used by membership tests and facet
/// enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexSet {
    /// All 60 pure stabilizer states.
    Stabilizer,
    /// The 24 real (rebit) stabilizer states.
    RebitStabilizer,
    /// The 20 CSS states.
    Css,
}

impl VertexSet {
    pub fn name(&self) -> &'static str {
        match self {
            VertexSet::Stabilizer => "stabilizer",
            VertexSet::RebitStabilizer => "rebit-stabilizer",
            VertexSet::Css => "css",
        }
    }
}

/// The projectors of a 2-qubit vertex set, in deterministic enumeration
/// order.
pub fn vertex_states(set: VertexSet) -> Result<Vec<DensityMatrix<f64>>> {
    match set {
        VertexSet::Stabilizer => stabilizer_projectors(2, false),
        VertexSet::RebitStabilizer => stabilizer_projectors(2, true),
        VertexSet::Css => css_projectors(2),
    }
}

/// Exact Pauli coordinates of a vertex set.
pub fn vertex_pauli_coords(set: VertexSet) -> Result<Vec<PauliCoords>> {
    vertex_states(set)?.iter().map(pauli_coords).collect()
}

// ---------------------------------------------------------------------------
// Polytopes
// ---------------------------------------------------------------------------

/// A polytope with exact rational V- and H-representations.
#[derive(Debug, Clone)]
pub struct RationalPolytope {
    vertices: Vec<Vec<Rat>>,
    facets: Vec<Facet>,
    affine_dim: usize,
}

impl RationalPolytope {
    pub fn vertices(&self) -> &[Vec<Rat>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn affine_dim(&self) -> usize {
        self.affine_dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices.first().map(|v| v.len()).unwrap_or(0)
    }

    /// Number of vertices lying on the facet's hyperplane.
    pub fn facet_support_count(&self, facet: &Facet) -> usize {
        self.vertices
            .iter()
            .filter(|v| facet.slack(v).is_zero())
            .count()
    }

    /// Whether the point satisfies every facet inequality.
    pub fn contains(&self, point: &[Rat]) -> bool {
        self.facets.iter().all(|f| f.slack(point) <= Rat::zero())
    }

    /// H-representation text: one `a1 ... ak | b` line per facet.
    pub fn h_rep_text(&self) -> String {
        let mut out = String::new();
        for f in &self.facets {
            out.push_str(&f.to_line());
            out.push('\n');
        }
        out
    }

    /// V-representation as JSON arrays of rational strings.
    pub fn v_rep_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.vertices
                .iter()
                .map(|v| {
                    serde_json::Value::Array(
                        v.iter()
                            .map(|x| serde_json::Value::String(x.to_string()))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

/// Facet enumeration over exact rational points (general fixture entry
/// point; polytope semantics live in [`facet_enumeration`]).
pub fn facet_enumeration_points(points: &[Vec<Rat>]) -> Result<RationalPolytope> {
    let out = dd::facets_of_points(points)?;
    let poly = RationalPolytope {
        vertices: points.to_vec(),
        facets: out.facets,
        affine_dim: out.affine_dim,
    };
    // Self-check the H/V incidence invariants before handing the result out.
    for f in &poly.facets {
        let mut tight = 0usize;
        for v in &poly.vertices {
            let s = f.slack(v);
            if s > Rat::zero() {
                return Err(Error::Numeric(format!(
                    "facet {} is violated by a vertex",
                    f.to_line()
                )));
            }
            if s.is_zero() {
                tight += 1;
            }
        }
        if tight < poly.affine_dim {
            return Err(Error::Numeric(format!(
                "facet {} is supported by only {tight} vertices in affine dimension {}",
                f.to_line(),
                poly.affine_dim
            )));
        }
    }
    Ok(poly)
}

/// Facets of the convex hull of a set of states given by Pauli coordinates.
pub fn facet_enumeration(vertices: &[PauliCoords]) -> Result<RationalPolytope> {
    if vertices.is_empty() {
        return Err(Error::Input("facet enumeration needs vertices".into()));
    }
    let n = vertices[0].n();
    if vertices.iter().any(|v| v.n() != n) {
        return Err(Error::DimensionMismatch(
            "vertex coordinate widths differ".into(),
        ));
    }
    let points: Vec<Vec<Rat>> = vertices.iter().map(|v| v.entries().to_vec()).collect();
    facet_enumeration_points(&points)
}

/// Facets common to both polytopes, as exact canonical-form equality.
pub fn shared_facets(a: &RationalPolytope, b: &RationalPolytope) -> Result<Vec<Facet>> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "polytopes live in different ambient spaces: {} vs {}",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    let set: std::collections::BTreeSet<&Facet> = b.facets.iter().collect();
    Ok(a.facets
        .iter()
        .filter(|f| set.contains(f))
        .cloned()
        .collect())
}

// ---------------------------------------------------------------------------
// Membership LP
// ---------------------------------------------------------------------------

/// Verdict of the exact membership test.
#[derive(Debug, Clone)]
pub enum Membership {
    /// A convex decomposition over the vertex set, verified exactly.
    Member { weights: Vec<Rat> },
    /// A separating functional `y` with `y . s <= 0` for every vertex `s`
    /// and `y . r > 0` for the target, verified exactly.
    NotMember { certificate: Vec<Rat> },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member { .. })
    }
}

/// Exact feasibility of `sum_j p_j s_j = r, p >= 0` over a vertex set in
/// Pauli coordinates (the identity coordinate row enforces `sum p = 1`).
/// Both possible answers are re-verified in rational arithmetic before
/// being returned; a witness that fails verification is a solver failure,
/// never a verdict.
pub fn membership_in_coords(target: &PauliCoords, verts: &[PauliCoords]) -> Result<Membership> {
    if verts.is_empty() {
        return Err(Error::Input("membership needs a nonempty vertex set".into()));
    }
    if verts.iter().any(|v| v.n() != target.n()) {
        return Err(Error::DimensionMismatch(
            "vertex and target coordinate widths differ".into(),
        ));
    }
    let rows = target.entries().len();
    let a: Vec<Vec<Rat>> = (0..rows)
        .map(|i| verts.iter().map(|v| v.entries()[i].clone()).collect())
        .collect();
    let b: Vec<Rat> = target.entries().to_vec();
    let out = phase_one(&a, &b, Rat::zero(), 200_000)?;

    if out.objective.is_zero() {
        let weights = out.solution;
        let mut total = Rat::zero();
        for p in &weights {
            if p < &Rat::zero() {
                return Err(Error::Solver("feasible witness has a negative weight".into()));
            }
            total += p.clone();
        }
        for (i, row) in a.iter().enumerate() {
            let mut acc = Rat::zero();
            for (j, p) in weights.iter().enumerate() {
                acc += row[j].clone() * p.clone();
            }
            if acc != b[i] {
                return Err(Error::Solver(format!(
                    "feasible witness fails equality row {i}"
                )));
            }
        }
        if total != Rat::from_integer(1.into()) {
            return Err(Error::Solver(
                "feasible witness weights do not sum to one".into(),
            ));
        }
        Ok(Membership::Member { weights })
    } else {
        let y = out.duals;
        for (j, vert) in verts.iter().enumerate() {
            let mut acc = Rat::zero();
            for (i, yi) in y.iter().enumerate() {
                acc += yi.clone() * vert.entries()[i].clone();
            }
            if acc > Rat::zero() {
                return Err(Error::Solver(format!(
                    "separating certificate fails on vertex {j}"
                )));
            }
        }
        let mut acc = Rat::zero();
        for (i, yi) in y.iter().enumerate() {
            acc += yi.clone() * b[i].clone();
        }
        if acc <= Rat::zero() {
            return Err(Error::Solver(
                "separating certificate does not separate the target".into(),
            ));
        }
        Ok(Membership::NotMember { certificate: y })
    }
}

/// Exact membership of a state in the convex hull of a named vertex set.
pub fn stabilizer_membership<T: Scalar>(
    rho: &DensityMatrix<T>,
    set: VertexSet,
) -> Result<Membership> {
    if rho.n() != 2 {
        return Err(Error::SizeCap(format!(
            "membership vertex sets are 2-qubit, got {} qubits",
            rho.n()
        )));
    }
    let target = pauli_coords(rho)?;
    let verts = vertex_pauli_coords(set)?;
    membership_in_coords(&target, &verts)
}

// ---------------------------------------------------------------------------
// The displayed facet operator and the rho_lambda family
// ---------------------------------------------------------------------------

const F_ENTRIES: [[i64; 4]; 4] = [
    [1, 0, 1, 1],
    [0, 1, -1, -1],
    [1, -1, -1, -2],
    [1, -1, -2, -1],
];

/// The displayed two-qubit facet operator `F` (symmetric, traceless,
/// normal to a facet shared by the rebit-stabilizer and CSS polytopes).
pub fn matrix_f<T: Scalar>() -> Array2<C<T>> {
    Array2::from_shape_fn((4, 4), |(i, j)| {
        Complex::new(real::<T>(F_ENTRIES[i][j] as f64), T::zero())
    })
}

/// The line family `rho_lambda = I/d + lambda F` (Hermitian and unit trace
/// for traceless Hermitian `F`; positive semidefiniteness is the caller's
/// concern, by design).
pub fn rho_lambda<T: Scalar>(f: &Array2<C<T>>, lambda: T) -> DensityMatrix<T> {
    let d = f.nrows();
    assert!(
        d == f.ncols() && d.is_power_of_two() && d >= 2,
        "rho_lambda needs a square power-of-two operator"
    );
    let n = d.trailing_zeros() as usize;
    let inv_d = T::one() / real::<T>(d as f64);
    let mat = Array2::from_shape_fn((d, d), |(i, j)| {
        let base = if i == j {
            Complex::new(inv_d, T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        };
        base + f[[i, j]] * Complex::new(lambda, T::zero())
    });
    DensityMatrix::from_matrix_unchecked(mat, n)
}

fn rho_lambda_rational(f: &RatMatrix, lambda: &Rat) -> RatMatrix {
    let d = f.len();
    let inv_d = Rat::new(BigInt::from(1), BigInt::from(d as i64));
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let base = if i == j { inv_d.clone() } else { Rat::zero() };
                    base + lambda.clone() * f[i][j].clone()
                })
                .collect()
        })
        .collect()
}

/// Lifts a canonical facet `a . r <= b` to the operator
/// `sum_P a_P / (2^n b) sigma_P`, so that membership of `rho` on the inner
/// side reads `Tr(rho F) <= 1`. Exact; defined when the normal touches
/// only real Pauli labels (even `Y` count).
pub fn lift_facet(facet: &Facet) -> Result<RatMatrix> {
    let len = facet.normal.len();
    let n = match len {
        4 => 1,
        16 => 2,
        64 => 3,
        _ => {
            return Err(Error::DimensionMismatch(format!(
                "facet normal length {len} is not 4^n for n <= 3"
            )))
        }
    };
    let d = 1usize << n;
    if facet.offset <= BigInt::from(0) {
        return Err(Error::Input(
            "facet lift expects a canonical facet with positive offset".into(),
        ));
    }
    let mut out = vec![vec![Rat::zero(); d]; d];
    for (idx, a) in facet.normal.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let sigma = sigma_integer(idx, n).ok_or_else(|| {
            Error::Input(format!(
                "facet normal touches the complex Pauli label {}",
                pauli_label_string(idx, n)
            ))
        })?;
        let coeff = Rat::new(a.clone(), BigInt::from(d as i64) * facet.offset.clone());
        for i in 0..d {
            for j in 0..d {
                if sigma[i][j] != 0 {
                    out[i][j] += coeff.clone() * rat_int(sigma[i][j]);
                }
            }
        }
    }
    Ok(out)
}

/// The canonical facet whose inner side is `Tr(rho f) <= 1`, from a real
/// traceful operator `f` (exactly the inverse of [`lift_facet`] on
/// canonical facets).
#[allow(clippy::needless_range_loop)]
pub fn facet_of_operator(f: &Array2<C<f64>>) -> Result<Facet> {
    let d = f.nrows();
    if d != f.ncols() || !d.is_power_of_two() || d < 2 {
        return Err(Error::DimensionMismatch(
            "facet extraction needs a square power-of-two operator".into(),
        ));
    }
    let n = d.trailing_zeros() as usize;
    // c_P = Tr(f sigma_P) / d; the inequality Tr(rho f) <= 1 reads
    // sum_{P != I} (d c_P) r_P <= 1 - c_I in Pauli coordinates.
    let mut normal = vec![Rat::zero(); d * d];
    let mut c_identity = Rat::zero();
    for idx in 0..d * d {
        let sigma = hermitian_pauli_matrix::<f64>(&pauli_label(idx, n));
        let mut acc = Complex::new(0.0f64, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += sigma[[i, j]] * f[[j, i]];
            }
        }
        if acc.im.abs() > 1e-9 {
            return Err(Error::Numeric(format!(
                "operator coordinate {} has imaginary residue {:e}",
                pauli_label_string(idx, n),
                acc.im
            )));
        }
        let c = Rat::from_float(acc.re / d as f64)
            .ok_or_else(|| Error::Numeric("operator coordinate is not finite".into()))?;
        if idx == 0 {
            c_identity = c;
        } else {
            normal[idx] = c * rat_int(d as i64);
        }
    }
    let offset = Rat::from_integer(1.into()) - c_identity;
    let mut combined = normal;
    combined.push(offset);
    let ints = dd::primitive_integer(&combined);
    let (normal, offset) = ints.split_at(d * d);
    Ok(Facet {
        normal: normal.to_vec(),
        offset: offset[0].clone(),
    })
}

// ---------------------------------------------------------------------------
// Bound-state scans
// ---------------------------------------------------------------------------

/// Thresholds of the `rho_lambda` family along one facet operator.
#[derive(Debug, Clone)]
pub struct FacetScanResult {
    pub facet: Facet,
    /// Largest lambda keeping stabilizer membership.
    pub lambda_magic: f64,
    /// Largest lambda keeping positive semidefiniteness.
    pub lambda_sd: f64,
    /// Largest lambda keeping KD positivity.
    pub lambda_kdpos: f64,
}

/// Exact nonnegativity of the KD table of a real symmetric rational
/// matrix.
#[allow(clippy::needless_range_loop)]
fn kd_nonnegative_rational(m: &RatMatrix) -> bool {
    let d = m.len();
    for g in 0..d {
        for chi in 0..d {
            let mut acc = Rat::zero();
            for (h, val) in m[g].iter().enumerate() {
                if (chi & (g ^ h)).count_ones() % 2 == 0 {
                    acc += val.clone();
                } else {
                    acc -= val.clone();
                }
            }
            if acc < Rat::zero() {
                return false;
            }
        }
    }
    true
}

fn bisect_rational(
    pred: impl Fn(&Rat) -> Result<bool>,
    lo0: Rat,
    hi0: Rat,
    iters: usize,
) -> Result<(Rat, Rat)> {
    if !pred(&lo0)? {
        return Err(Error::Numeric("bisection lower bound fails predicate".into()));
    }
    if pred(&hi0)? {
        return Err(Error::Numeric("bisection upper bound satisfies predicate".into()));
    }
    let mut lo = lo0;
    let mut hi = hi0;
    let half = Rat::new(BigInt::from(1), BigInt::from(2));
    for _ in 0..iters {
        let mid = (lo.clone() + hi.clone()) * half.clone();
        if pred(&mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

fn bisect_f64(pred: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn scan_facet_with(facet: &Facet, stab_coords: &[PauliCoords]) -> Result<FacetScanResult> {
    let fhat = lift_facet(facet)?;
    let n = (fhat.len().trailing_zeros()) as usize;
    let quarter = Rat::new(BigInt::from(1), BigInt::from(4));

    // Largest lambda keeping membership in the full stabilizer polytope
    // (exact LP at every probe).
    let member = |lam: &Rat| -> Result<bool> {
        let m = rho_lambda_rational(&fhat, lam);
        let coords = pauli_coords_of_rational(&m, n)?;
        Ok(membership_in_coords(&coords, stab_coords)?.is_member())
    };
    let (lo, hi) = bisect_rational(member, Rat::zero(), quarter.clone(), 25)?;
    let lambda_magic = 0.5 * (rat_to_f64(&lo) + rat_to_f64(&hi));

    // Largest lambda keeping PSD (float eigensolve; the threshold is
    // irrational).
    let fhat_f64: Array2<Complex<f64>> = Array2::from_shape_fn((1 << n, 1 << n), |(i, j)| {
        Complex::new(rat_to_f64(&fhat[i][j]), 0.0)
    });
    let psd = |lam: f64| -> bool {
        let rho = rho_lambda(&fhat_f64, lam);
        rho.min_eigenvalue().map(|e| e >= -1e-12).unwrap_or(false)
    };
    let (lo, hi) = bisect_f64(psd, 0.0, 0.25, 40);
    if !psd(0.0) {
        return Err(Error::Numeric("rho_0 = I/d fails the PSD scan".into()));
    }
    let lambda_sd = 0.5 * (lo + hi);

    // Largest lambda keeping KD positivity (exact rational table).
    let kdpos = |lam: &Rat| -> Result<bool> {
        Ok(kd_nonnegative_rational(&rho_lambda_rational(&fhat, lam)))
    };
    let (lo, hi) = bisect_rational(kdpos, Rat::zero(), quarter, 25)?;
    let lambda_kdpos = 0.5 * (rat_to_f64(&lo) + rat_to_f64(&hi));

    Ok(FacetScanResult {
        facet: facet.clone(),
        lambda_magic,
        lambda_sd,
        lambda_kdpos,
    })
}

/// Bisection thresholds (membership, PSD, KD positivity) of the
/// `rho_lambda` family along one shared facet, each located to within
/// `2^-25` of a quarter (about `7.5e-9`).
pub fn bound_state_scan(facet: &Facet) -> Result<FacetScanResult> {
    let stab = vertex_pauli_coords(VertexSet::Stabilizer)?;
    scan_facet_with(facet, &stab)
}

/// Scans every facet in parallel.
pub fn bound_state_scan_all(facets: &[Facet]) -> Result<Vec<FacetScanResult>> {
    let stab = vertex_pauli_coords(VertexSet::Stabilizer)?;
    facets
        .par_iter()
        .map(|f| scan_facet_with(f, &stab))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::hermitian_eigenvalues;
    use crate::rng::CounterRng;
    use crate::state::ginibre_rebit_sample;
    use num::Signed;
    use num_complex::Complex64;

    fn rat(p: i64, q: i64) -> Rat {
        Rat::new(p.into(), q.into())
    }

    #[test]
    fn coordinates_of_special_states() {
        let coords = pauli_coords(&DensityMatrix::<f64>::maximally_mixed(2)).unwrap();
        assert_eq!(coords.get("II"), Some(&rat(1, 4)));
        for idx in 1..16 {
            assert!(coords.entries()[idx].is_zero());
        }

        let zero: BitVector = "00".parse().unwrap();
        let rho = crate::state::computational_state::<f64>(&zero).to_density();
        let coords = pauli_coords(&rho).unwrap();
        for label in ["II", "IZ", "ZI", "ZZ"] {
            assert_eq!(coords.get(label), Some(&rat(1, 4)), "{label}");
        }
        for idx in 0..16 {
            let label = pauli_label_string(idx, 2);
            if !["II", "IZ", "ZI", "ZZ"].contains(&label.as_str()) {
                assert!(coords.entries()[idx].is_zero(), "{label}");
            }
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let mut rng = CounterRng::new(31, 0);
        for _ in 0..20 {
            let rho = ginibre_rebit_sample::<f64>(2, &mut rng).unwrap();
            let coords = pauli_coords(&rho).unwrap();
            assert_eq!(coords.get("II"), Some(&rat(1, 4)));
            // Reconstruct rho = sum_P r_P sigma_P.
            let mut acc = Array2::<Complex64>::zeros((4, 4));
            for idx in 0..16 {
                let sigma = hermitian_pauli_matrix::<f64>(&pauli_label(idx, 2));
                let r = rat_to_f64(&coords.entries()[idx]);
                acc = acc + sigma.mapv(|x| x * Complex64::new(r, 0.0));
            }
            assert!(crate::matrix::max_abs_diff(&acc, rho.matrix()) < 1e-12);
        }
    }

    #[test]
    fn rational_coordinate_route_matches_float_route() {
        let mut rng = CounterRng::new(77, 3);
        let rho = ginibre_rebit_sample::<f64>(2, &mut rng).unwrap();
        let via_float = pauli_coords(&rho).unwrap();
        let m: RatMatrix = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| Rat::from_float(rho.matrix()[[i, j]].re).unwrap())
                    .collect()
            })
            .collect();
        let via_rational = pauli_coords_of_rational(&m, 2).unwrap();
        // Odd-Y entries are exact zeros on both routes; the float route
        // rounds even-Y traces at the last bit.
        for (a, b) in via_float.entries().iter().zip(via_rational.entries()) {
            let diff = rat_to_f64(&(a.clone() - b.clone())).abs();
            assert!(diff < 1e-14, "routes differ by {diff}");
            if a.is_zero() {
                assert!(b.is_zero());
            }
        }
    }

    #[test]
    fn vertex_coordinates_are_small_dyadics() {
        for set in [VertexSet::Stabilizer, VertexSet::RebitStabilizer, VertexSet::Css] {
            for v in vertex_pauli_coords(set).unwrap() {
                assert_eq!(v.get("II"), Some(&rat(1, 4)));
                for x in v.entries() {
                    let q = x.denom().to_i64().unwrap();
                    assert!(q == 1 || q == 2 || q == 4, "denominator {q}");
                    assert!(x.abs() <= rat(1, 4), "entry {x}");
                }
            }
        }
    }

    #[test]
    fn polytope_facet_counts() {
        let rebit = facet_enumeration(&vertex_pauli_coords(VertexSet::RebitStabilizer).unwrap())
            .unwrap();
        assert_eq!(rebit.affine_dim(), 9);
        assert_eq!(rebit.facets().len(), 120);
        for f in rebit.facets() {
            assert!(rebit.facet_support_count(f) >= 9);
        }

        let css = facet_enumeration(&vertex_pauli_coords(VertexSet::Css).unwrap()).unwrap();
        assert_eq!(css.affine_dim(), 9);
        assert_eq!(css.facets().len(), 40);
        for f in css.facets() {
            assert!(css.facet_support_count(f) >= 9);
        }

        let shared = shared_facets(&rebit, &css).unwrap();
        assert_eq!(shared.len(), 24);

        // Identity of a polytope with itself; the CSS polytope sits inside
        // the rebit polytope.
        assert_eq!(shared_facets(&rebit, &rebit).unwrap().len(), 120);
        for v in css.vertices() {
            assert!(rebit.contains(v));
        }
    }

    #[test]
    fn displayed_operator_is_a_shared_facet() {
        let f = matrix_f::<f64>();
        // Symmetric, traceless, minimum eigenvalue -1 - 2 sqrt(2).
        assert!(crate::matrix::is_hermitian(&f, 0.0));
        let tr: Complex64 = (0..4).map(|i| f[[i, i]]).sum();
        assert_eq!(tr, Complex64::new(0.0, 0.0));
        let eig = hermitian_eigenvalues(&f).unwrap();
        assert!((eig[0] - (-1.0 - 2.0 * 2.0f64.sqrt())).abs() < 1e-12);

        // Tr(F s) <= 1 on all rebit-stabilizer states, tight on >= 9.
        let mut tight = 0;
        for s in vertex_states(VertexSet::RebitStabilizer).unwrap() {
            let val: Complex64 = f.dot(s.matrix()).diag().sum();
            assert!(val.re <= 1.0 + 1e-12);
            if (val.re - 1.0).abs() < 1e-12 {
                tight += 1;
            }
        }
        assert!(tight >= 9, "tight on {tight}");

        // Its canonical facet form is one of the 24 shared facets, and
        // lifting that facet back reproduces F exactly.
        let facet = facet_of_operator(&f).unwrap();
        let rebit = facet_enumeration(&vertex_pauli_coords(VertexSet::RebitStabilizer).unwrap())
            .unwrap();
        let css = facet_enumeration(&vertex_pauli_coords(VertexSet::Css).unwrap()).unwrap();
        let shared = shared_facets(&rebit, &css).unwrap();
        assert!(shared.contains(&facet));

        let lifted = lift_facet(&facet).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(lifted[i][j], rat_int(F_ENTRIES[i][j]));
            }
        }
    }

    #[test]
    fn rho_lambda_spectrum() {
        let f = matrix_f::<f64>();
        let rho0 = rho_lambda(&f, 0.0);
        assert!(crate::matrix::max_abs_diff(
            rho0.matrix(),
            DensityMatrix::<f64>::maximally_mixed(2).matrix()
        ) == 0.0);

        let lam = 0.03;
        let rho = rho_lambda(&f, lam);
        let nu = hermitian_eigenvalues(&f).unwrap();
        let mu = hermitian_eigenvalues(rho.matrix()).unwrap();
        for (m, n) in mu.iter().zip(nu.iter()) {
            assert!((m - (lam * n + 0.25)).abs() < 1e-12);
        }

        let boundary = 1.0 / (4.0 + 8.0 * 2.0f64.sqrt());
        let rho = rho_lambda(&f, boundary);
        assert!(rho.min_eigenvalue().unwrap().abs() < 1e-12);
    }

    #[test]
    fn membership_examples() {
        // Every stabilizer vertex is a member of its own hull.
        let verts = vertex_pauli_coords(VertexSet::Stabilizer).unwrap();
        let states = vertex_states(VertexSet::Stabilizer).unwrap();
        for s in states.iter().step_by(13) {
            assert!(stabilizer_membership(s, VertexSet::Stabilizer)
                .unwrap()
                .is_member());
        }
        let _ = verts;

        // I/4 is a member; the bound state at lambda = 0.06 is not.
        let mixed = DensityMatrix::<f64>::maximally_mixed(2);
        assert!(stabilizer_membership(&mixed, VertexSet::Stabilizer)
            .unwrap()
            .is_member());

        let rho = rho_lambda(&matrix_f::<f64>(), 0.06);
        assert!(rho.min_eigenvalue().unwrap() > 0.0, "0.06 is below the PSD edge");
        match stabilizer_membership(&rho, VertexSet::Stabilizer).unwrap() {
            Membership::NotMember { certificate } => {
                // Certificate separates: y . s <= 0 on vertices (verified in
                // the call); confirm it is strictly positive on the target.
                let target = pauli_coords(&rho).unwrap();
                let mut acc = Rat::zero();
                for (yi, ri) in certificate.iter().zip(target.entries()) {
                    acc += yi.clone() * ri.clone();
                }
                assert!(acc > Rat::zero());
            }
            Membership::Member { .. } => panic!("bound state misclassified as stabilizer"),
        }

        // CSS membership is stricter than stabilizer membership.
        let t_like = rho_lambda(&matrix_f::<f64>(), 0.04);
        assert!(stabilizer_membership(&t_like, VertexSet::Stabilizer)
            .unwrap()
            .is_member());
    }

    #[test]
    fn scan_of_the_displayed_facet() {
        let facet = facet_of_operator(&matrix_f::<f64>()).unwrap();
        let scan = bound_state_scan(&facet).unwrap();
        assert!((scan.lambda_magic - 0.05).abs() < 1e-6, "{}", scan.lambda_magic);
        let sd = 1.0 / (4.0 + 8.0 * 2.0f64.sqrt());
        assert!((scan.lambda_sd - sd).abs() < 1e-6, "{}", scan.lambda_sd);
        assert!((scan.lambda_kdpos - 1.0 / 12.0).abs() < 1e-6, "{}", scan.lambda_kdpos);
        assert!(scan.lambda_magic <= scan.lambda_sd);
        assert!(scan.lambda_sd <= scan.lambda_kdpos);
    }

    #[test]
    fn h_and_v_representations() {
        let css = facet_enumeration(&vertex_pauli_coords(VertexSet::Css).unwrap()).unwrap();
        let text = css.h_rep_text();
        assert_eq!(text.lines().count(), 40);
        for line in text.lines() {
            let (coords, rhs) = line.split_once(" | ").unwrap();
            assert_eq!(coords.split_whitespace().count(), 16);
            rhs.parse::<i64>().unwrap();
        }
        let v = css.v_rep_json();
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), 20);
        assert_eq!(arr[0].as_array().unwrap().len(), 16);
    }

    #[test]
    fn shared_facets_of_unrelated_fixtures_is_empty() {
        let a = facet_enumeration_points(&[
            vec![rat(0, 1), rat(0, 1)],
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(0, 1), rat(1, 1)],
        ])
        .unwrap();
        let b = facet_enumeration_points(&[
            vec![rat(5, 1), rat(5, 1)],
            vec![rat(6, 1), rat(5, 1)],
            vec![rat(5, 1), rat(6, 1)],
        ])
        .unwrap();
        assert!(shared_facets(&a, &b).unwrap().is_empty());
    }
}
