//! Dense quantum states: pure vectors, density matrices, subgroups of
//! `Z2^n`, CSS/stabilizer state enumeration, Ginibre sampling, and the
//! handful of gate matrices the rest of the crate needs.
//!
//! Dense matrices cap the qubit count at [`MAX_DENSE_QUBITS`]; the
//! phase-space simulator has its own matrix-free path for larger systems.
//!
//! Stabilizer and CSS projectors are assembled from products of
//! `(I ± sigma)/2` with Hermitian Pauli factors, so their entries are small
//! dyadic rationals represented exactly in floating point. Exactness is
//! load-bearing: the polytope module converts these entries to rationals
//! and its facet counts would be brittle under rounding.

use ndarray::{Array1, Array2};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{
    cnot_index_maps, gf2_basis, gf2_span, hermitian_pauli_matrix, BitVector,
    PauliLabel,
};
use crate::matrix::{self, adjoint, identity, is_hermitian, kron};
use crate::rng::CounterRng;
use crate::scalar::{inv_sqrt_dim, real, Scalar, C};

use crate::DEFAULT_TOL;

/// Dense-matrix code refuses systems larger than this.
pub const MAX_DENSE_QUBITS: usize = 10;

fn qubit_count_of_dim(d: usize) -> Result<usize> {
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "dimension {d} is not a power of two >= 2"
        )));
    }
    let n = d.trailing_zeros() as usize;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::SizeCap(format!(
            "dense code caps at {MAX_DENSE_QUBITS} qubits, got {n}"
        )));
    }
    Ok(n)
}

// ---------------------------------------------------------------------------
// Pure states
// ---------------------------------------------------------------------------

/// A pure state as a dense amplitude vector of length `2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Scalar> {
    amp: Array1<C<T>>,
    n: usize,
}

impl<T: Scalar> PureState<T> {
    /// Validates the length and unit norm (within `1e-8`), then stores the
    /// exactly renormalized vector.
    pub fn new(amp: Array1<C<T>>) -> Result<Self> {
        let n = qubit_count_of_dim(amp.len())?;
        let norm = amp.iter().map(|x| x.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
        if (norm - T::one()).abs() > real::<T>(1e-8) {
            return Err(Error::InvalidState(format!(
                "amplitude vector has norm {norm}, expected 1"
            )));
        }
        let amp = amp.mapv(|x| x / norm);
        Ok(PureState { amp, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &Array1<C<T>> {
        &self.amp
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &PureState<T>) -> Result<C<T>> {
        if self.n != other.n {
            return Err(Error::LengthMismatch(self.n, other.n));
        }
        Ok(self
            .amp
            .iter()
            .zip(other.amp.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// The rank-1 projector `|psi><psi|`.
    pub fn to_density(&self) -> DensityMatrix<T> {
        let d = self.dim();
        let mat = Array2::from_shape_fn((d, d), |(i, j)| self.amp[i] * self.amp[j].conj());
        DensityMatrix { mat, n: self.n }
    }

    /// Tensor product with `self` on the leading qubits.
    pub fn tensor(&self, other: &PureState<T>) -> Result<Self> {
        let n = self.n + other.n;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::SizeCap(format!(
                "tensor product would have {n} qubits, cap is {MAX_DENSE_QUBITS}"
            )));
        }
        let d = 1usize << n;
        let od = other.dim();
        let amp = Array1::from_shape_fn(d, |i| self.amp[i / od] * other.amp[i % od]);
        Ok(PureState { amp, n })
    }

    /// Whether every amplitude is real to tolerance `tol`.
    pub fn is_real(&self, tol: T) -> bool {
        self.amp.iter().all(|x| x.im.abs() <= tol)
    }
}

/// Computational basis state `|g>_z`.
pub fn computational_state<T: Scalar>(g: &BitVector) -> PureState<T> {
    let d = 1usize << g.len();
    let mut amp = Array1::zeros(d);
    amp[g.index()] = Complex::new(T::one(), T::zero());
    PureState { amp, n: g.len() }
}

/// Character basis state `|chi>_x = 2^{-n/2} sum_g chi(g) |g>_z`.
pub fn character_state<T: Scalar>(chi: &BitVector) -> PureState<T> {
    let n = chi.len();
    let d = 1usize << n;
    let mag: T = inv_sqrt_dim(n);
    let amp = Array1::from_shape_fn(d, |i| {
        let g = BitVector::from_index(i, n);
        let sign = if chi.dot(&g) == 0 { mag } else { -mag };
        Complex::new(sign, T::zero())
    });
    PureState { amp, n }
}

// ---------------------------------------------------------------------------
// Subgroups of Z2^n
// ---------------------------------------------------------------------------

/// A subgroup of `Z2^n`, stored as an independent generator basis plus the
/// fully enumerated member list (ascending index order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    n: usize,
    generators: Vec<BitVector>,
    members: Vec<BitVector>,
}

impl Subgroup {
    /// Builds the span of a generating set. The stored generators are the
    /// reduced independent basis, so equal subgroups compare equal.
    pub fn from_generators(generators: &[BitVector], n: usize) -> Result<Self> {
        for g in generators {
            if g.len() != n {
                return Err(Error::LengthMismatch(g.len(), n));
            }
        }
        let basis = gf2_basis(generators, n);
        if basis.len() > 20 {
            return Err(Error::SizeCap(format!(
                "subgroup with 2^{} members is too large to enumerate",
                basis.len()
            )));
        }
        let members = gf2_span(&basis, n);
        Ok(Subgroup {
            n,
            generators: basis,
            members,
        })
    }

    /// The trivial subgroup `{0}`.
    pub fn trivial(n: usize) -> Self {
        Subgroup {
            n,
            generators: Vec::new(),
            members: vec![BitVector::zero(n)],
        }
    }

    /// The full group `Z2^n`.
    pub fn full(n: usize) -> Self {
        Subgroup::from_generators(
            &(0..n).map(|j| BitVector::unit(j, n)).collect::<Vec<_>>(),
            n,
        )
        .expect("full group is always enumerable")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of members `|H|`.
    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn generators(&self) -> &[BitVector] {
        &self.generators
    }

    pub fn members(&self) -> &[BitVector] {
        &self.members
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.members.binary_search(v).is_ok()
    }

    /// The dual subgroup `H^perp = {chi : chi(h) = 1 for all h in H}`, by
    /// brute-force scan over all characters.
    pub fn dual(&self) -> Subgroup {
        assert!(self.n <= 20, "dual scan too large");
        let members: Vec<BitVector> = BitVector::all(self.n)
            .filter(|chi| self.generators.iter().all(|h| chi.dot(h) == 0))
            .collect();
        Subgroup {
            n: self.n,
            generators: gf2_basis(&members, self.n),
            members,
        }
    }
}

/// All subgroups of `Z2^n`, each exactly once, by closure scan over subsets.
pub fn enumerate_subgroups(n: usize) -> Result<Vec<Subgroup>> {
    if n > 4 {
        return Err(Error::SizeCap(format!(
            "subgroup enumeration caps at 4 qubits, got {n}"
        )));
    }
    let d = 1usize << n;
    let mut out = Vec::new();
    // A subset closed under XOR and containing 0 is a subgroup (every
    // element is its own inverse).
    for mask in 0u64..(1u64 << d) {
        if mask & 1 == 0 {
            continue;
        }
        let members: Vec<usize> = (0..d).filter(|i| (mask >> i) & 1 == 1).collect();
        let closed = members
            .iter()
            .all(|&a| members.iter().all(|&b| (mask >> (a ^ b)) & 1 == 1));
        if !closed {
            continue;
        }
        debug_assert!(members.len().is_power_of_two());
        let members: Vec<BitVector> = members
            .into_iter()
            .map(|i| BitVector::from_index(i, n))
            .collect();
        let generators = gf2_basis(&members, n);
        out.push(Subgroup {
            n,
            generators,
            members,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// CSS and stabilizer states
// ---------------------------------------------------------------------------

/// The CSS state `|H; g, chi> = |H|^{-1/2} P_{g,chi} sum_{h in H} |h>_z`,
/// i.e. amplitude `(-1)^{chi.(h+g)} / |H|^{1/2}` at index `h+g`.
pub fn css_state<T: Scalar>(
    h: &Subgroup,
    g: &BitVector,
    chi: &BitVector,
) -> Result<PureState<T>> {
    let n = h.n();
    if g.len() != n {
        return Err(Error::LengthMismatch(g.len(), n));
    }
    if chi.len() != n {
        return Err(Error::LengthMismatch(chi.len(), n));
    }
    if n > MAX_DENSE_QUBITS {
        return Err(Error::SizeCap(format!(
            "dense code caps at {MAX_DENSE_QUBITS} qubits, got {n}"
        )));
    }
    let d = 1usize << n;
    let mag = T::one() / real::<T>(h.order() as f64).sqrt();
    let mut amp = Array1::zeros(d);
    for member in h.members() {
        let target = *member + *g;
        let sign = if chi.dot(&target) == 0 { mag } else { -mag };
        amp[target.index()] = Complex::new(sign, T::zero());
    }
    Ok(PureState { amp, n })
}

/// The projector onto `|H; g, chi>`, built as a product of `(I + s*sigma)/2`
/// over the state's stabilizing generators. All entries are exact dyadic
/// rationals.
pub fn css_projector<T: Scalar>(
    h: &Subgroup,
    g: &BitVector,
    chi: &BitVector,
) -> Result<DensityMatrix<T>> {
    let n = h.n();
    if g.len() != n {
        return Err(Error::LengthMismatch(g.len(), n));
    }
    if chi.len() != n {
        return Err(Error::LengthMismatch(chi.len(), n));
    }
    // Z-type generators (-1)^{h.chi} P_{h,0} and X-type (-1)^{g.eps} P_{0,eps}.
    let mut signed: Vec<(PauliLabel, bool)> = Vec::with_capacity(n);
    for hb in h.generators() {
        let label = PauliLabel::new(*hb, BitVector::zero(n))?;
        signed.push((label, hb.dot(chi) == 1));
    }
    for eb in h.dual().generators() {
        let label = PauliLabel::new(BitVector::zero(n), *eb)?;
        signed.push((label, eb.dot(g) == 1));
    }
    debug_assert_eq!(signed.len(), n);
    Ok(projector_from_signed_paulis(n, &signed))
}

/// `prod_i (I + s_i sigma_i)/2` for Hermitian Pauli factors.
fn projector_from_signed_paulis<T: Scalar>(
    n: usize,
    signed: &[(PauliLabel, bool)],
) -> DensityMatrix<T> {
    let d = 1usize << n;
    let half = Complex::new(real::<T>(0.5), T::zero());
    let mut mat = identity::<T>(d);
    for (label, negate) in signed {
        let mut sigma = hermitian_pauli_matrix::<T>(label);
        if *negate {
            sigma.mapv_inplace(|x| -x);
        }
        let factor = (identity::<T>(d) + &sigma).mapv(|x| x * half);
        mat = mat.dot(&factor);
    }
    DensityMatrix { mat, n }
}

/// Deduplicates pure states by overlap magnitude `>= 1 - 1e-9` (equality up
/// to global phase).
fn dedupe_states<T: Scalar>(states: Vec<PureState<T>>) -> Vec<PureState<T>> {
    let threshold = real::<T>(1.0 - 1e-9);
    let mut unique: Vec<PureState<T>> = Vec::new();
    for s in states {
        let dup = unique
            .iter()
            .any(|u| u.overlap(&s).map(|o| o.norm() >= threshold).unwrap_or(false));
        if !dup {
            unique.push(s);
        }
    }
    unique
}

/// All distinct CSS states on `n` qubits (`n <= 3`), from ranging the
/// construction over every `(H, g, chi)` and deduplicating up to phase.
pub fn enumerate_css_states<T: Scalar>(n: usize) -> Result<Vec<PureState<T>>> {
    if n > 3 {
        return Err(Error::SizeCap(format!(
            "CSS enumeration caps at 3 qubits, got {n}"
        )));
    }
    let mut states = Vec::new();
    for h in enumerate_subgroups(n)? {
        for g in BitVector::all(n) {
            for chi in BitVector::all(n) {
                states.push(css_state(&h, &g, &chi)?);
            }
        }
    }
    Ok(dedupe_states(states))
}

/// Exact projectors of all distinct CSS states on `n` qubits.
pub fn css_projectors<T: Scalar>(n: usize) -> Result<Vec<DensityMatrix<T>>> {
    if n > 3 {
        return Err(Error::SizeCap(format!(
            "CSS enumeration caps at 3 qubits, got {n}"
        )));
    }
    let mut seen = std::collections::HashSet::new();
    let mut out: Vec<DensityMatrix<T>> = Vec::new();
    for h in enumerate_subgroups(n)? {
        for g in BitVector::all(n) {
            for chi in BitVector::all(n) {
                let proj = css_projector::<T>(&h, &g, &chi)?;
                if seen.insert(exact_entry_key(proj.matrix())) {
                    out.push(proj);
                }
            }
        }
    }
    Ok(out)
}

/// Exact-bit dedupe key for matrices whose entries are exact dyadics.
fn exact_entry_key<T: Scalar>(m: &Array2<C<T>>) -> Vec<(u64, u64)> {
    m.iter()
        .map(|x| {
            // +0.0 collapses the sign of negative zero.
            let re = x.re.to_f64().expect("finite entry") + 0.0;
            let im = x.im.to_f64().expect("finite entry") + 0.0;
            (re.to_bits(), im.to_bits())
        })
        .collect()
}

/// Exact projectors of all pure stabilizer states on `n <= 2` qubits,
/// optionally restricted to rebit states (real density matrices).
///
/// Brute force: every set of `n` independent pairwise-commuting non-identity
/// Pauli labels, every sign assignment, deduplicated by exact entries.
pub fn stabilizer_projectors<T: Scalar>(n: usize, rebit_only: bool) -> Result<Vec<DensityMatrix<T>>> {
    if n == 0 || n > 2 {
        return Err(Error::SizeCap(format!(
            "stabilizer enumeration caps at 2 qubits, got {n}"
        )));
    }
    let labels: Vec<PauliLabel> = PauliLabel::all(n).filter(|l| !l.is_identity()).collect();
    let mut seen = std::collections::HashSet::new();
    let mut out: Vec<DensityMatrix<T>> = Vec::new();

    let consider = |gens: &[PauliLabel], out: &mut Vec<DensityMatrix<T>>,
                        seen: &mut std::collections::HashSet<Vec<(u64, u64)>>| {
        // Independence of the (u|v) rows over GF(2).
        let rows: Vec<BitVector> = gens.iter().map(|l| l.u.concat(&l.v)).collect();
        if gf2_basis(&rows, 2 * n).len() < n {
            return;
        }
        if !gens
            .iter()
            .enumerate()
            .all(|(i, a)| gens[i + 1..].iter().all(|b| a.commutes_with(b)))
        {
            return;
        }
        for signs in 0..(1usize << n) {
            let signed: Vec<(PauliLabel, bool)> = gens
                .iter()
                .enumerate()
                .map(|(i, l)| (*l, (signs >> i) & 1 == 1))
                .collect();
            let proj = projector_from_signed_paulis::<T>(n, &signed);
            if rebit_only && !matrix::is_real(proj.matrix(), T::zero()) {
                continue;
            }
            if seen.insert(exact_entry_key(proj.matrix())) {
                out.push(proj);
            }
        }
    };

    match n {
        1 => {
            for a in &labels {
                consider(&[*a], &mut out, &mut seen);
            }
        }
        _ => {
            for (i, a) in labels.iter().enumerate() {
                for b in &labels[i + 1..] {
                    consider(&[*a, *b], &mut out, &mut seen);
                }
            }
        }
    }
    Ok(out)
}

/// All pure stabilizer states on `n <= 2` qubits as state vectors, extracted
/// from the exact projectors.
pub fn enumerate_stabilizer_states<T: Scalar>(
    n: usize,
    rebit_only: bool,
) -> Result<Vec<PureState<T>>> {
    let projectors = stabilizer_projectors::<T>(n, rebit_only)?;
    projectors.iter().map(state_from_projector).collect()
}

/// Extracts the unit vector from a rank-1 projector: the column with the
/// largest diagonal entry, scaled so that entry is real positive.
fn state_from_projector<T: Scalar>(proj: &DensityMatrix<T>) -> Result<PureState<T>> {
    let m = proj.matrix();
    let d = proj.dim();
    let mut best = 0;
    for i in 1..d {
        if m[[i, i]].re > m[[best, best]].re {
            best = i;
        }
    }
    let scale = m[[best, best]].re.sqrt();
    if scale <= T::zero() {
        return Err(Error::InvalidState("projector has zero diagonal".into()));
    }
    let amp = Array1::from_shape_fn(d, |i| m[[i, best]] / scale);
    PureState::new(amp)
}

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

/// A (possibly mixed) quantum state as a dense `d x d` complex matrix.
///
/// Construction validates Hermiticity and unit trace; positive
/// semidefiniteness is deliberately not enforced, so the type also carries
/// the Hermitian unit-trace operators used by facet scans (checked for
/// positivity by the caller where it matters).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Scalar> {
    mat: Array2<C<T>>,
    n: usize,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Validates shape, Hermiticity, and unit trace (tolerance `1e-8`).
    pub fn new(mat: Array2<C<T>>) -> Result<Self> {
        let (r, c) = mat.dim();
        if r != c {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square, got {r}x{c}"
            )));
        }
        let n = qubit_count_of_dim(r)?;
        let tol = real::<T>(1e-8);
        if !is_hermitian(&mat, tol) {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        let tr = matrix::trace(&mat);
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!(
                "trace is {} + {}i, expected 1",
                tr.re, tr.im
            )));
        }
        Ok(DensityMatrix { mat, n })
    }

    /// Wraps a matrix that is known valid (internal constructions).
    pub fn from_matrix_unchecked(mat: Array2<C<T>>, n: usize) -> Self {
        debug_assert_eq!(mat.dim(), (1 << n, 1 << n));
        DensityMatrix { mat, n }
    }

    /// The maximally mixed state `I/d`.
    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1usize << n;
        let x = T::one() / real::<T>(d as f64);
        DensityMatrix {
            mat: Array2::from_diag_elem(d, Complex::new(x, T::zero())),
            n,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &Array2<C<T>> {
        &self.mat
    }

    pub fn trace(&self) -> C<T> {
        matrix::trace(&self.mat)
    }

    /// Whether all entries are real to tolerance `tol`.
    pub fn is_real(&self, tol: T) -> bool {
        matrix::is_real(&self.mat, tol)
    }

    /// Whether the smallest eigenvalue is `>= -tol`.
    pub fn is_psd(&self, tol: T) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        let eig = matrix::hermitian_eigenvalues(&self.mat)?;
        Ok(eig[0])
    }

    /// Conjugation `U rho U^dag` after checking `U` is unitary (`1e-8`).
    pub fn apply_unitary(&self, u: &Array2<C<T>>) -> Result<Self> {
        let d = self.dim();
        if u.dim() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {:?}, state is {d}x{d}",
                u.dim()
            )));
        }
        let gram = adjoint(u).dot(u);
        if matrix::max_abs_diff(&gram, &identity::<T>(d)) > real::<T>(1e-8) {
            return Err(Error::Input("matrix is not unitary".into()));
        }
        Ok(DensityMatrix {
            mat: u.dot(&self.mat).dot(&adjoint(u)),
            n: self.n,
        })
    }

    /// Pauli conjugation `P rho P^dag` done as an exact signed index remap:
    /// entry `(i, j)` moves to `(i+u, j+u)` with sign `(-1)^{v.(i+j)}`.
    pub fn apply_pauli(&self, label: &PauliLabel) -> Result<Self> {
        if label.len() != self.n {
            return Err(Error::LengthMismatch(label.len(), self.n));
        }
        let d = self.dim();
        let mat = Array2::from_shape_fn((d, d), |(i, j)| {
            let iv = BitVector::from_index(i, self.n);
            let jv = BitVector::from_index(j, self.n);
            let src = ((iv + label.u).index(), (jv + label.u).index());
            let parity = label.v.dot(&(iv + jv));
            if parity == 0 {
                self.mat[src]
            } else {
                -self.mat[src]
            }
        });
        Ok(DensityMatrix { mat, n: self.n })
    }

    /// Traces out the first `k` qubits (the leading tensor factors).
    pub fn partial_trace_first(&self, k: usize) -> Result<Self> {
        if k == 0 || k >= self.n {
            return Err(Error::Input(format!(
                "partial trace needs 1 <= k < n, got k={k}, n={}",
                self.n
            )));
        }
        let keep = self.n - k;
        let dk = 1usize << keep;
        let mat = Array2::from_shape_fn((dk, dk), |(i, j)| {
            (0..1usize << k)
                .map(|a| self.mat[[(a << keep) | i, (a << keep) | j]])
                .sum()
        });
        Ok(DensityMatrix { mat, n: keep })
    }

    /// Tensor product with `self` on the leading qubits.
    pub fn tensor(&self, other: &DensityMatrix<T>) -> Result<Self> {
        let n = self.n + other.n;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::SizeCap(format!(
                "tensor product would have {n} qubits, cap is {MAX_DENSE_QUBITS}"
            )));
        }
        Ok(DensityMatrix {
            mat: kron(&self.mat, &other.mat),
            n,
        })
    }

    /// Convex combination of states; weights must sum to 1 within `1e-10`.
    pub fn mixture(parts: &[(T, &DensityMatrix<T>)]) -> Result<Self> {
        let (w0, first) = parts
            .first()
            .ok_or_else(|| Error::Input("mixture of zero states".into()))?;
        let mut total = *w0;
        let mut mat = first.mat.mapv(|x| x * *w0);
        for (w, rho) in &parts[1..] {
            if rho.n != first.n {
                return Err(Error::LengthMismatch(rho.n, first.n));
            }
            mat = mat + rho.mat.mapv(|x| x * *w);
            total += *w;
        }
        if (total - T::one()).abs() > real::<T>(1e-10) {
            return Err(Error::Input(format!("mixture weights sum to {total}")));
        }
        Ok(DensityMatrix { mat, n: first.n })
    }
}

/// Whether `rho` is real in the computational basis at the default tolerance.
pub fn is_real_state<T: Scalar>(rho: &DensityMatrix<T>) -> bool {
    rho.is_real(real::<T>(DEFAULT_TOL))
}

/// Whether `rho` is positive semidefinite: smallest eigenvalue `>= -tol`.
pub fn is_psd<T: Scalar>(rho: &DensityMatrix<T>, tol: T) -> Result<bool> {
    rho.is_psd(tol)
}

// ---------------------------------------------------------------------------
// JSON interchange
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DensityMatrixRepr {
    n: usize,
    re: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

impl<T: Scalar> Serialize for DensityMatrix<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let to_rows = |f: &dyn Fn(&C<T>) -> T| -> Vec<Vec<f64>> {
            (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| f(&self.mat[[i, j]]).to_f64().unwrap_or(f64::NAN))
                        .collect()
                })
                .collect()
        };
        let im_rows = to_rows(&|x| x.im);
        let all_real = im_rows.iter().flatten().all(|&x| x == 0.0);
        DensityMatrixRepr {
            n: self.n,
            re: to_rows(&|x| x.re),
            im: if all_real { None } else { Some(im_rows) },
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for DensityMatrix<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let repr = DensityMatrixRepr::deserialize(deserializer)?;
        let d = 1usize
            .checked_shl(repr.n as u32)
            .filter(|_| repr.n >= 1 && repr.n <= MAX_DENSE_QUBITS)
            .ok_or_else(|| D::Error::custom(format!("unsupported qubit count {}", repr.n)))?;
        let check_shape = |rows: &Vec<Vec<f64>>, what: &str| {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                Err(D::Error::custom(format!(
                    "{what} must be a {d}x{d} array for n={}",
                    repr.n
                )))
            } else {
                Ok(())
            }
        };
        check_shape(&repr.re, "re")?;
        if let Some(im) = &repr.im {
            check_shape(im, "im")?;
        }
        let mat = Array2::from_shape_fn((d, d), |(i, j)| {
            let re = real::<T>(repr.re[i][j]);
            let im = repr.im.as_ref().map(|m| real::<T>(m[i][j])).unwrap_or_else(T::zero);
            Complex::new(re, im)
        });
        DensityMatrix::new(mat).map_err(|e| D::Error::custom(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Random states and gates
// ---------------------------------------------------------------------------

/// A Hilbert-Schmidt-random rebit density matrix: `rho = A A^T / Tr(A A^T)`
/// with `A` a `d x d` matrix of independent standard normals drawn in
/// row-major order. The result is exactly real and exactly symmetric.
pub fn ginibre_rebit_sample<T: Scalar>(n: usize, rng: &mut CounterRng) -> Result<DensityMatrix<T>> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::SizeCap(format!(
            "dense code caps at {MAX_DENSE_QUBITS} qubits, got {n}"
        )));
    }
    let d = 1usize << n;
    loop {
        let a = Array2::from_shape_fn((d, d), |_| Complex::new(real::<T>(rng.normal()), T::zero()));
        let aat = a.dot(&a.t().to_owned());
        let tr = matrix::trace(&aat).re;
        if tr > T::zero() {
            return Ok(DensityMatrix {
                mat: aat.mapv(|x| x / tr),
                n,
            });
        }
    }
}

/// A Hilbert-Schmidt-random density matrix: `rho = A A^dag / Tr(A A^dag)`
/// with `A` a `d x d` matrix of independent complex standard normals (real
/// part then imaginary part, row-major order).
pub fn ginibre_sample<T: Scalar>(n: usize, rng: &mut CounterRng) -> Result<DensityMatrix<T>> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::SizeCap(format!(
            "dense code caps at {MAX_DENSE_QUBITS} qubits, got {n}"
        )));
    }
    let d = 1usize << n;
    loop {
        let a = Array2::from_shape_fn((d, d), |_| {
            let re = real::<T>(rng.normal());
            let im = real::<T>(rng.normal());
            Complex::new(re, im)
        });
        let adag = matrix::adjoint(&a);
        let aad = a.dot(&adag);
        let tr = matrix::trace(&aad).re;
        if tr > T::zero() {
            return Ok(DensityMatrix {
                mat: aad.mapv(|x| x / tr),
                n,
            });
        }
    }
}

/// The global Hadamard `H^{(x) n}`, with entries `2^{-n/2} (-1)^{g.h}`.
pub fn hadamard_all<T: Scalar>(n: usize) -> Array2<C<T>> {
    let d = 1usize << n;
    let mag: T = inv_sqrt_dim(n);
    Array2::from_shape_fn((d, d), |(i, j)| {
        let sign = if (i & j).count_ones() & 1 == 0 { mag } else { -mag };
        Complex::new(sign, T::zero())
    })
}

/// The CNOT unitary with control `c` and target `t` as a permutation matrix.
pub fn cx_unitary<T: Scalar>(c: usize, t: usize, n: usize) -> Result<Array2<C<T>>> {
    let maps = cnot_index_maps(c, t, n)?;
    let d = 1usize << n;
    let mut m = Array2::zeros((d, d));
    for g in BitVector::all(n) {
        m[[maps.apply_g(&g).index(), g.index()]] = Complex::new(T::one(), T::zero());
    }
    Ok(m)
}
