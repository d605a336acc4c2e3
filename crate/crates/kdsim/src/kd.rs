//! The Kirkwood-Dirac and DGBR quasiprobability representations.
//!
//! The KD table of a state is `Q[g][chi] = <g|rho|chi><chi|g>`, a complex
//! d x d array over phase points `(g, chi)` that sums to 1. Its entrywise
//! real part is the DGBR distribution, which can also be computed
//! independently from the Hermitian point operators `A_{u,v}` (the two
//! routes agreeing is one of the cross-checks in the test suite).
//!
//! Tables are computed by a fast sign transform of each density-matrix row
//! (cost `O(d^2 log d)`); a direct trace-by-trace fallback is kept for
//! cross-validation. The mana monotone `log2 sum |Q|` lives here too.

use ndarray::Array2;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{pauli_matrix, BitVector, PauliLabel, PhasePoint};
use crate::matrix::{hermitian_eigenvalues, is_hermitian};
use crate::scalar::{real, Scalar, C};
use crate::state::{DensityMatrix, MAX_DENSE_QUBITS};
use crate::DEFAULT_TOL;

// ---------------------------------------------------------------------------
// KD distribution
// ---------------------------------------------------------------------------

/// The KD table of a state: rows indexed by `g`, columns by `chi`.
#[derive(Debug, Clone, PartialEq)]
pub struct KdDistribution<T: Scalar> {
    table: Array2<C<T>>,
    n: usize,
}

impl<T: Scalar> KdDistribution<T> {
    /// Wraps a `2^n x 2^n` table.
    pub fn from_table(table: Array2<C<T>>) -> Result<Self> {
        let (r, c) = table.dim();
        if r != c || !r.is_power_of_two() || r < 2 {
            return Err(Error::DimensionMismatch(format!(
                "KD table must be square with power-of-two size, got {r}x{c}"
            )));
        }
        let n = r.trailing_zeros() as usize;
        Ok(KdDistribution { table, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn table(&self) -> &Array2<C<T>> {
        &self.table
    }

    pub fn entry(&self, g: &BitVector, chi: &BitVector) -> C<T> {
        self.table[[g.index(), chi.index()]]
    }

    /// Sum of all entries (1 for any valid state).
    pub fn sum(&self) -> C<T> {
        self.table.iter().copied().sum()
    }

    /// Sum of entrywise absolute values.
    pub fn total_abs(&self) -> T {
        self.table
            .iter()
            .map(|x| x.norm())
            .fold(T::zero(), |a, b| a + b)
    }

    /// Whether every entry has `|Im| <= tol` and `Re >= -tol`.
    pub fn is_positive(&self, tol: T) -> bool {
        self.table
            .iter()
            .all(|x| x.im.abs() <= tol && x.re >= -tol)
    }

    /// The most negative violation witness: the phase point whose entry is
    /// farthest from the positive real axis, with its value.
    pub fn worst_entry(&self) -> (PhasePoint, C<T>) {
        let mut worst = (
            PhasePoint::new(BitVector::zero(self.n), BitVector::zero(self.n)).unwrap(),
            self.table[[0, 0]],
        );
        let mut badness = -T::infinity();
        for g in BitVector::all(self.n) {
            for chi in BitVector::all(self.n) {
                let q = self.table[[g.index(), chi.index()]];
                let b = q.im.abs().max(-q.re);
                if b > badness {
                    badness = b;
                    worst = (PhasePoint::new(g, chi).unwrap(), q);
                }
            }
        }
        worst
    }
}

/// In-place sign transform: `out[chi] = sum_h row[h] (-1)^{h.chi}`, the
/// size-d Walsh butterfly.
fn sign_transform_row<T: Scalar>(row: &mut [C<T>]) {
    let d = row.len();
    let mut h = 1;
    while h < d {
        let mut i = 0;
        while i < d {
            for j in i..i + h {
                let x = row[j];
                let y = row[j + h];
                row[j] = x + y;
                row[j + h] = x - y;
            }
            i += 2 * h;
        }
        h *= 2;
    }
}

/// The KD table `Q[g][chi] = <g|rho|chi><chi|g>` via the row transform:
/// `Q[g][chi] = 2^{-n} (-1)^{g.chi} sum_h rho[g][h] (-1)^{chi.h}`.
pub fn kd_distribution<T: Scalar>(rho: &DensityMatrix<T>) -> KdDistribution<T> {
    let n = rho.n();
    let d = rho.dim();
    let scale = T::one() / real::<T>(d as f64);
    let mut table = rho.matrix().clone();
    for mut row in table.rows_mut() {
        sign_transform_row(row.as_slice_mut().expect("contiguous row"));
    }
    for ((g, chi), x) in table.indexed_iter_mut() {
        let sign = if (g & chi).count_ones() & 1 == 0 {
            scale
        } else {
            -scale
        };
        *x *= sign;
    }
    KdDistribution { table, n }
}

/// Direct evaluation `Q[g][chi] = Tr(B_{g,chi} rho)`, kept as an
/// independently-coded cross-check of the transform route.
pub fn kd_distribution_direct<T: Scalar>(rho: &DensityMatrix<T>) -> KdDistribution<T> {
    let n = rho.n();
    let d = rho.dim();
    let scale = T::one() / real::<T>(d as f64);
    let m = rho.matrix();
    let table = Array2::from_shape_fn((d, d), |(g, chi)| {
        let mut acc = Complex::new(T::zero(), T::zero());
        for h in 0..d {
            if (chi & (h ^ g)).count_ones() & 1 == 0 {
                acc += m[[g, h]];
            } else {
                acc -= m[[g, h]];
            }
        }
        acc * scale
    });
    KdDistribution { table, n }
}

/// Whether the KD table of `rho` is positive at tolerance `tol`.
pub fn is_kd_positive<T: Scalar>(rho: &DensityMatrix<T>, tol: T) -> bool {
    kd_distribution(rho).is_positive(tol)
}

// ---------------------------------------------------------------------------
// Point operators
// ---------------------------------------------------------------------------

/// The non-Hermitian KD point operator `B_{g,chi} = |chi>_x <chi|g> <g|_z`.
/// Only column `g` is nonzero: `B[h][g] = (-1)^{chi.(h+g)} / 2^n`.
pub fn phase_point_operator_b<T: Scalar>(g: &BitVector, chi: &BitVector) -> Result<Array2<C<T>>> {
    if g.len() != chi.len() {
        return Err(Error::LengthMismatch(g.len(), chi.len()));
    }
    let n = g.len();
    let d = 1usize << n;
    let scale = T::one() / real::<T>(d as f64);
    let mut b = Array2::zeros((d, d));
    for h in BitVector::all(n) {
        let sign = if chi.dot(&(h + *g)) == 0 { scale } else { -scale };
        b[[h.index(), g.index()]] = Complex::new(sign, T::zero());
    }
    Ok(b)
}

/// The Hermitian DGBR point operator `A_{u,v} = P_{u,v} A_{0,0} P_{u,v}^dag`
/// with `A_{0,0} = 2^{-2n} sum_{u'.v' even} P_{u',v'}`. Real for every
/// phase point.
pub fn phase_point_operator_a<T: Scalar>(u: &BitVector, v: &BitVector) -> Result<Array2<C<T>>> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    let n = u.len();
    let a00 = operator_a00::<T>(n);
    // Conjugation by the signed permutation P_{u,v} is an index remap:
    // (P A P^T)[i][j] = (-1)^{v.(i+j)} A[i+u][j+u].
    let d = 1usize << n;
    let out = Array2::from_shape_fn((d, d), |(i, j)| {
        let iv = BitVector::from_index(i, n);
        let jv = BitVector::from_index(j, n);
        let x = a00[[(iv + *u).index(), (jv + *u).index()]];
        if v.dot(&(iv + jv)) == 0 {
            x
        } else {
            -x
        }
    });
    Ok(out)
}

fn operator_a00<T: Scalar>(n: usize) -> Array2<C<T>> {
    let d = 1usize << n;
    let scale = T::one() / real::<T>((d * d) as f64);
    let mut acc = Array2::<C<T>>::zeros((d, d));
    for label in PauliLabel::all(n) {
        if label.u.dot(&label.v) == 0 {
            acc = acc + pauli_matrix::<T>(&label);
        }
    }
    acc.mapv(|x| x * scale)
}

/// The DGBR table `W[u][v] = Tr(A_{u,v} rho)`, computed from the point
/// operators (not from the KD table, so the two can be compared).
pub fn dgbr_distribution<T: Scalar>(rho: &DensityMatrix<T>) -> Result<Array2<T>> {
    let n = rho.n();
    let d = rho.dim();
    let mut w = Array2::zeros((d, d));
    let m = rho.matrix();
    for u in BitVector::all(n) {
        for v in BitVector::all(n) {
            let a = phase_point_operator_a::<T>(&u, &v)?;
            // Tr(A rho) with A real: sum_{i,j} A[i][j] rho[j][i].
            let mut acc = Complex::new(T::zero(), T::zero());
            for i in 0..d {
                for j in 0..d {
                    acc += a[[i, j]] * m[[j, i]];
                }
            }
            w[[u.index(), v.index()]] = acc.re;
        }
    }
    Ok(w)
}

// ---------------------------------------------------------------------------
// KD symbols and the overlap formula
// ---------------------------------------------------------------------------

/// The KD symbol of a measurement effect: `Tr(B_{g,chi} M) / 2^{-n}`, the
/// normalization being exact (no floating division by computed overlaps).
#[derive(Debug, Clone, PartialEq)]
pub struct KdSymbol<T: Scalar> {
    table: Array2<C<T>>,
    n: usize,
}

impl<T: Scalar> KdSymbol<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &Array2<C<T>> {
        &self.table
    }

    pub fn entry(&self, g: &BitVector, chi: &BitVector) -> C<T> {
        self.table[[g.index(), chi.index()]]
    }
}

/// Computes the KD symbol of an effect after validating `0 <= M <= I`
/// (within `tol`).
pub fn kd_symbol<T: Scalar>(effect: &Array2<C<T>>, tol: T) -> Result<KdSymbol<T>> {
    let (r, c) = effect.dim();
    if r != c || !r.is_power_of_two() || r < 2 {
        return Err(Error::InvalidEffect(format!(
            "effect must be square with power-of-two size, got {r}x{c}"
        )));
    }
    let n = r.trailing_zeros() as usize;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::SizeCap(format!(
            "dense code caps at {MAX_DENSE_QUBITS} qubits, got {n}"
        )));
    }
    if !is_hermitian(effect, tol) {
        return Err(Error::InvalidEffect("effect is not Hermitian".into()));
    }
    let eig = hermitian_eigenvalues(effect)?;
    if eig[0] < -tol {
        return Err(Error::InvalidEffect(format!(
            "effect is not positive semidefinite (min eigenvalue {:e})",
            eig[0]
        )));
    }
    if eig[eig.len() - 1] > T::one() + tol {
        return Err(Error::InvalidEffect(format!(
            "effect exceeds the identity (max eigenvalue {:e})",
            eig[eig.len() - 1]
        )));
    }
    // xi[g][chi] = (-1)^{chi.g} sum_h M[g][h] (-1)^{chi.h}.
    let mut table = effect.clone();
    for mut row in table.rows_mut() {
        sign_transform_row(row.as_slice_mut().expect("contiguous row"));
    }
    for ((g, chi), x) in table.indexed_iter_mut() {
        if (g & chi).count_ones() & 1 == 1 {
            *x = -*x;
        }
    }
    Ok(KdSymbol { table, n })
}

/// The overlap formula: `Tr(M rho) = sum_{g,chi} xi_M(g,chi) Q_{g,chi}(rho)`,
/// evaluated through the two tables. The imaginary residue must stay below
/// `1e-10`; larger residues signal an implementation bug and are an error.
pub fn overlap_probability<T: Scalar>(
    effect: &Array2<C<T>>,
    rho: &DensityMatrix<T>,
) -> Result<T> {
    let symbol = kd_symbol(effect, real::<T>(DEFAULT_TOL))?;
    if symbol.n() != rho.n() {
        return Err(Error::LengthMismatch(symbol.n(), rho.n()));
    }
    let q = kd_distribution(rho);
    let total: C<T> = symbol
        .table
        .iter()
        .zip(q.table.iter())
        .map(|(a, b)| a * b)
        .sum();
    if total.im.abs() > real::<T>(1e-10) {
        return Err(Error::Numeric(format!(
            "overlap formula returned imaginary residue {:e}",
            total.im
        )));
    }
    Ok(total.re)
}

/// The effect `(I + (-1)^b Z_j)/2` selecting outcome `b` of a computational
/// measurement on qubit `j`.
pub fn z_outcome_effect<T: Scalar>(j: usize, b: u8, n: usize) -> Result<Array2<C<T>>> {
    if j >= n {
        return Err(Error::QubitOutOfRange { index: j, n });
    }
    let d = 1usize << n;
    let half = real::<T>(0.5);
    let mut m = Array2::zeros((d, d));
    for g in BitVector::all(n) {
        let zval = if g.get(j) { -T::one() } else { T::one() };
        let sval = if b == 0 { zval } else { -zval };
        m[[g.index(), g.index()]] = Complex::new(half + half * sval, T::zero());
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// Measurement update and mana
// ---------------------------------------------------------------------------

/// KD table after a computational measurement of qubit `j` (outcome
/// forgotten): `Q'[g][chi] = (Q[g][chi] + Q[g][chi + e_j]) / 2`.
pub fn measurement_update<T: Scalar>(
    q: &KdDistribution<T>,
    j: usize,
) -> Result<KdDistribution<T>> {
    let n = q.n();
    if j >= n {
        return Err(Error::QubitOutOfRange { index: j, n });
    }
    let flip = 1usize << (n - 1 - j);
    let half = real::<T>(0.5);
    let d = q.dim();
    let table = Array2::from_shape_fn((d, d), |(g, chi)| {
        (q.table[[g, chi]] + q.table[[g, chi ^ flip]]) * half
    });
    Ok(KdDistribution { table, n })
}

/// The KD mana of a state, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManaValue<T: Scalar> {
    bits: T,
}

impl<T: Scalar> ManaValue<T> {
    /// Mana in bits (base-2 logarithm; the base is this crate's convention
    /// and is recorded in CLI metadata).
    pub fn bits(&self) -> T {
        self.bits
    }

    /// Whether the mana vanishes at tolerance `tol`.
    pub fn is_zero(&self, tol: T) -> bool {
        self.bits <= tol
    }
}

/// `M(rho) = log2 sum_{g,chi} |Q_{g,chi}(rho)|`, clamped to `>= 0` (the sum
/// is mathematically `>= 1`; the clamp absorbs rounding).
pub fn kd_mana<T: Scalar>(rho: &DensityMatrix<T>) -> ManaValue<T> {
    let total = kd_distribution(rho).total_abs();
    ManaValue {
        bits: total.log2().max(T::zero()),
    }
}

/// Lower bound on the number of copies of `rho` needed to distill `sigma`:
/// `M(sigma) / M(rho)`. Errors when `M(rho) <= zero_tol` (a free input
/// state admits no finite bound).
pub fn distillation_lower_bound<T: Scalar>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
    zero_tol: T,
) -> Result<T> {
    let m_rho = kd_mana(rho);
    if m_rho.is_zero(zero_tol) {
        return Err(Error::ZeroMana);
    }
    Ok(kd_mana(sigma).bits() / m_rho.bits())
}

// ---------------------------------------------------------------------------
// JSON interchange
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct KdTableRepr {
    n: usize,
    re: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

impl<T: Scalar> Serialize for KdDistribution<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let re = (0..d)
            .map(|g| (0..d).map(|x| self.table[[g, x]].re.to_f64().unwrap_or(f64::NAN)).collect())
            .collect();
        let im: Vec<Vec<f64>> = (0..d)
            .map(|g| (0..d).map(|x| self.table[[g, x]].im.to_f64().unwrap_or(f64::NAN)).collect())
            .collect();
        let all_real = im.iter().flatten().all(|&x| x == 0.0);
        KdTableRepr {
            n: self.n,
            re,
            im: if all_real { None } else { Some(im) },
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for KdDistribution<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let repr = KdTableRepr::deserialize(deserializer)?;
        let d = 1usize << repr.n;
        if repr.re.len() != d
            || repr.re.iter().any(|r| r.len() != d)
            || repr.im.as_ref().is_some_and(|m| m.len() != d || m.iter().any(|r| r.len() != d))
        {
            return Err(D::Error::custom(format!(
                "KD table must be {d}x{d} for n={}",
                repr.n
            )));
        }
        let table = Array2::from_shape_fn((d, d), |(i, j)| {
            Complex::new(
                real::<T>(repr.re[i][j]),
                repr.im.as_ref().map(|m| real::<T>(m[i][j])).unwrap_or_else(T::zero),
            )
        });
        KdDistribution::from_table(table).map_err(|e| D::Error::custom(e.to_string()))
    }
}

// ---------------------------------------------------------------------------

/// Sum of all `B_{g,chi}` over phase points (the identity, by completeness);
/// exposed for tests.
pub fn sum_of_b_operators<T: Scalar>(n: usize) -> Array2<C<T>> {
    let mut acc = Array2::zeros((1 << n, 1 << n));
    for g in BitVector::all(n) {
        for chi in BitVector::all(n) {
            acc = acc + phase_point_operator_b::<T>(&g, &chi).expect("equal lengths");
        }
    }
    acc
}
