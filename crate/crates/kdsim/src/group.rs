//! Binary-group phase space: `Z2^n` arithmetic, characters, real Pauli
//! strings and the index maps induced by CNOT.
//!
//! A [`BitVector`] plays three roles, depending on context: a group element
//! `g`, a character index `chi`, and one half of a Pauli label `(u, v)`.
//! Group addition is bitwise XOR, so every element is its own inverse.
//!
//! Conventions fixed here and used everywhere else in the crate:
//! * qubit 0 is the leftmost tensor factor and the most significant bit of a
//!   computational-basis index;
//! * `P_{u,v} = prod_j Z_j^{v_j} X_j^{u_j}` (Z applied after X on each
//!   qubit), so every Pauli string is a real signed permutation matrix;
//! * bit vectors render as strings of `0`/`1` with qubit 0 leftmost.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{inv_sqrt_dim, Scalar, C};

/// Largest qubit count representable by the bitmask storage.
pub const MAX_QUBITS: usize = 24;

/// An element of `Z2^n`, stored as a bitmask plus its length.
///
/// The mask equals the computational-basis index of the element, so
/// `BitVector` doubles as a matrix row/column index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    mask: u32,
    n: usize,
}

impl BitVector {
    /// The all-zeros vector (group identity) on `n` qubits.
    pub fn zero(n: usize) -> Self {
        assert!(
            (1..=MAX_QUBITS).contains(&n),
            "qubit count {n} outside 1..={MAX_QUBITS}"
        );
        BitVector { mask: 0, n }
    }

    /// Builds a vector from its basis index. Bits above `n` must be clear.
    pub fn from_index(index: usize, n: usize) -> Self {
        let mut v = Self::zero(n);
        assert!(index < (1usize << n), "index {index} out of range for n={n}");
        v.mask = index as u32;
        v
    }

    /// The unit vector `e_j` with a single 1 at qubit `j`.
    pub fn unit(j: usize, n: usize) -> Self {
        let mut v = Self::zero(n);
        v.set(j, true);
        v
    }

    /// Number of qubits.
    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether this is the all-zeros vector.
    #[inline]
    pub fn is_zero(&self) -> bool {
        self.mask == 0
    }

    /// The computational-basis index of this vector (qubit 0 = MSB).
    #[inline]
    pub fn index(&self) -> usize {
        self.mask as usize
    }

    /// Bit of qubit `j`.
    #[inline]
    pub fn get(&self, j: usize) -> bool {
        assert!(j < self.n, "qubit {j} out of range for n={}", self.n);
        (self.mask >> (self.n - 1 - j)) & 1 == 1
    }

    /// Sets the bit of qubit `j`.
    #[inline]
    pub fn set(&mut self, j: usize, value: bool) {
        assert!(j < self.n, "qubit {j} out of range for n={}", self.n);
        let bit = 1u32 << (self.n - 1 - j);
        if value {
            self.mask |= bit;
        } else {
            self.mask &= !bit;
        }
    }

    /// Flips the bit of qubit `j`.
    #[inline]
    pub fn flip(&mut self, j: usize) {
        assert!(j < self.n, "qubit {j} out of range for n={}", self.n);
        self.mask ^= 1u32 << (self.n - 1 - j);
    }

    /// Mod-2 inner product `self . other`, as a parity bit.
    #[inline]
    pub fn dot(&self, other: &BitVector) -> u32 {
        debug_assert_eq!(self.n, other.n);
        (self.mask & other.mask).count_ones() & 1
    }

    /// Integer inner product (number of positions where both bits are 1).
    #[inline]
    pub fn dot_int(&self, other: &BitVector) -> u32 {
        debug_assert_eq!(self.n, other.n);
        (self.mask & other.mask).count_ones()
    }

    /// Concatenates `self` (leading qubits) with `tail` (trailing qubits).
    pub fn concat(&self, tail: &BitVector) -> BitVector {
        let n = self.n + tail.n;
        assert!(n <= MAX_QUBITS, "concatenation exceeds {MAX_QUBITS} qubits");
        BitVector {
            mask: (self.mask << tail.n) | tail.mask,
            n,
        }
    }

    /// Splits off the first `k` qubits: `(head on k, tail on n-k)`.
    pub fn split(&self, k: usize) -> (BitVector, BitVector) {
        assert!(k >= 1 && k < self.n);
        let tail_n = self.n - k;
        let head = BitVector {
            mask: self.mask >> tail_n,
            n: k,
        };
        let tail = BitVector {
            mask: self.mask & ((1u32 << tail_n) - 1),
            n: tail_n,
        };
        (head, tail)
    }

    /// Iterates over all `2^n` vectors of length `n` in index order.
    pub fn all(n: usize) -> impl Iterator<Item = BitVector> {
        assert!((1..=MAX_QUBITS).contains(&n));
        (0..1usize << n).map(move |i| BitVector::from_index(i, n))
    }
}

/// Group addition (bitwise XOR) with a length check.
pub fn group_add(a: &BitVector, b: &BitVector) -> Result<BitVector> {
    if a.n != b.n {
        return Err(Error::LengthMismatch(a.n, b.n));
    }
    Ok(BitVector {
        mask: a.mask ^ b.mask,
        n: a.n,
    })
}

impl std::ops::Add for BitVector {
    type Output = BitVector;

    fn add(self, rhs: BitVector) -> BitVector {
        assert_eq!(self.n, rhs.n, "bit-vector length mismatch");
        BitVector {
            mask: self.mask ^ rhs.mask,
            n: self.n,
        }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.n {
            write!(f, "{}", u8::from(self.get(j)))?;
        }
        Ok(())
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > MAX_QUBITS {
            return Err(Error::Input(format!(
                "bit string must have 1..={MAX_QUBITS} characters, got {:?}",
                s
            )));
        }
        let mut v = BitVector::zero(s.len());
        for (j, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => v.set(j, true),
                other => {
                    return Err(Error::Input(format!(
                        "bit string may contain only '0'/'1', found {other:?}"
                    )))
                }
            }
        }
        Ok(v)
    }
}

/// A point `(g, chi)` of the discrete phase space `G x G^`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhasePoint {
    pub g: BitVector,
    pub chi: BitVector,
}

impl PhasePoint {
    pub fn new(g: BitVector, chi: BitVector) -> Result<Self> {
        if g.len() != chi.len() {
            return Err(Error::LengthMismatch(g.len(), chi.len()));
        }
        Ok(PhasePoint { g, chi })
    }
}

/// Label `(u, v)` of the real Pauli string `P_{u,v}`.
///
/// Labels form a group under componentwise XOR; the sign picked up by the
/// matrix product is tracked separately (see [`pauli_product_sign`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliLabel {
    pub u: BitVector,
    pub v: BitVector,
}

impl PauliLabel {
    pub fn new(u: BitVector, v: BitVector) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::LengthMismatch(u.len(), v.len()));
        }
        Ok(PauliLabel { u, v })
    }

    pub fn identity(n: usize) -> Self {
        PauliLabel {
            u: BitVector::zero(n),
            v: BitVector::zero(n),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.u.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn is_identity(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    /// Componentwise sum of labels (signs not included).
    pub fn compose(&self, other: &PauliLabel) -> PauliLabel {
        PauliLabel {
            u: self.u + other.u,
            v: self.v + other.v,
        }
    }

    /// Whether the two Pauli strings commute: the symplectic form
    /// `u_a.v_b + u_b.v_a` vanishes mod 2.
    pub fn commutes_with(&self, other: &PauliLabel) -> bool {
        (self.u.dot(&other.v) + other.u.dot(&self.v)) & 1 == 0
    }

    /// Iterates over all `4^n` labels.
    pub fn all(n: usize) -> impl Iterator<Item = PauliLabel> {
        BitVector::all(n)
            .flat_map(move |u| BitVector::all(n).map(move |v| PauliLabel { u, v }))
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P[u={},v={}]", self.u, self.v)
    }
}

/// Character evaluation `chi(g) = (-1)^{chi . g}`, returned as `+1`/`-1`.
pub fn character_eval(chi: &BitVector, g: &BitVector) -> Result<i32> {
    if chi.len() != g.len() {
        return Err(Error::LengthMismatch(chi.len(), g.len()));
    }
    Ok(if chi.dot(g) == 0 { 1 } else { -1 })
}

/// Overlap `<g|chi> = (-1)^{g.chi} / 2^{n/2}` between the computational and
/// character bases. Always real; returned as a complex scalar for use in
/// complex expressions.
pub fn dual_overlap<T: Scalar>(g: &BitVector, chi: &BitVector) -> Result<C<T>> {
    if g.len() != chi.len() {
        return Err(Error::LengthMismatch(g.len(), chi.len()));
    }
    let mag: T = inv_sqrt_dim(g.len());
    let sign = if g.dot(chi) == 0 { mag } else { -mag };
    Ok(Complex::new(sign, T::zero()))
}

/// Dense matrix of the real Pauli string `P_{u,v} = prod_j Z_j^{v_j} X_j^{u_j}`.
///
/// Acting on a basis state, `P_{u,v}|g> = (-1)^{v.(g+u)} |g+u>`, so the
/// matrix is a signed permutation with entries in `{0, +1, -1}`.
pub fn pauli_matrix<T: Scalar>(label: &PauliLabel) -> Array2<C<T>> {
    let n = label.len();
    let d = 1usize << n;
    let mut m = Array2::zeros((d, d));
    for g in BitVector::all(n) {
        let target = g + label.u;
        let sign = if label.v.dot(&target) == 0 {
            T::one()
        } else {
            -T::one()
        };
        m[[target.index(), g.index()]] = Complex::new(sign, T::zero());
    }
    m
}

/// Hermitian Pauli `i^{u.v} P_{u,v}`, the conventional self-adjoint
/// representative of the label (`u.v` counted as an integer).
pub fn hermitian_pauli_matrix<T: Scalar>(label: &PauliLabel) -> Array2<C<T>> {
    let phase = match label.u.dot_int(&label.v) % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    };
    pauli_matrix::<T>(label).mapv(|x| x * phase)
}

/// Sign `s` in `P_a P_b = s P_{a+b}`, namely `(-1)^{u_a . v_b}` for the
/// Z-after-X factor ordering. Together with its mirror image this yields the
/// commutation rule `P_a P_b = (-1)^{u_a.v_b + u_b.v_a} P_b P_a`.
pub fn pauli_product_sign(a: &PauliLabel, b: &PauliLabel) -> i32 {
    if a.u.dot(&b.v) == 0 {
        1
    } else {
        -1
    }
}

/// The pair of mod-2 index maps induced by `CX_{ct}` on phase-space points:
/// `g -> A_{ct} g` adds bit `c` into bit `t`, and `chi -> B_{ct} chi` adds
/// bit `t` into bit `c`. Both maps are involutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CnotMaps {
    c: usize,
    t: usize,
}

impl CnotMaps {
    pub fn control(&self) -> usize {
        self.c
    }

    pub fn target(&self) -> usize {
        self.t
    }

    /// `A_{ct} g`: flips `g_t` when `g_c` is set.
    pub fn apply_g(&self, g: &BitVector) -> BitVector {
        let mut out = *g;
        if g.get(self.c) {
            out.flip(self.t);
        }
        out
    }

    /// `B_{ct} chi`: flips `chi_c` when `chi_t` is set.
    pub fn apply_chi(&self, chi: &BitVector) -> BitVector {
        let mut out = *chi;
        if chi.get(self.t) {
            out.flip(self.c);
        }
        out
    }
}

/// Builds the CNOT index-map pair for control `c` and target `t` on `n` qubits.
pub fn cnot_index_maps(c: usize, t: usize, n: usize) -> Result<CnotMaps> {
    if c >= n {
        return Err(Error::QubitOutOfRange { index: c, n });
    }
    if t >= n {
        return Err(Error::QubitOutOfRange { index: t, n });
    }
    if c == t {
        return Err(Error::ControlEqualsTarget(c));
    }
    Ok(CnotMaps { c, t })
}

/// Basis of the null space `{x : x . g = 0 for every generator g}` over
/// GF(2), by Gaussian elimination. Input vectors must share one length.
///
/// The returned basis spans the character subgroup trivial on the span of
/// `generators`; its size is `n - rank(generators)`.
pub fn gf2_nullspace(generators: &[BitVector], n: usize) -> Vec<BitVector> {
    // Row-reduce the generator matrix, remembering pivot columns.
    let mut rows: Vec<u32> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for g in generators {
        assert_eq!(g.len(), n, "generator length mismatch");
        let mut r = g.mask;
        for (&p, &row) in pivots.iter().zip(rows.iter()) {
            if (r >> p) & 1 == 1 {
                r ^= row;
            }
        }
        if r != 0 {
            let p = 31 - r.leading_zeros() as usize;
            // Eliminate the new pivot from existing rows.
            for row in rows.iter_mut() {
                if (*row >> p) & 1 == 1 {
                    *row ^= r;
                }
            }
            rows.push(r);
            pivots.push(p);
        }
    }
    // Free columns parametrize the null space.
    let mut basis = Vec::new();
    for free in 0..n {
        if pivots.contains(&free) {
            continue;
        }
        let mut x = 1u32 << free;
        for (&p, &row) in pivots.iter().zip(rows.iter()) {
            // Row has a single pivot bit p; x_p is fixed by the free bits.
            if (row >> free) & 1 == 1 {
                x |= 1u32 << p;
            }
        }
        basis.push(BitVector { mask: x, n });
    }
    basis
}

/// Reduces a generating set to an independent basis in reduced row-echelon
/// form (each pivot bit appears in exactly one basis vector), sorted by
/// descending pivot. Returns an empty vector for the trivial span.
pub fn gf2_basis(generators: &[BitVector], n: usize) -> Vec<BitVector> {
    let mut basis: Vec<u32> = Vec::new();
    for g in generators {
        assert_eq!(g.len(), n, "generator length mismatch");
        let mut r = g.mask;
        for &b in &basis {
            let p = 31 - b.leading_zeros();
            if (r >> p) & 1 == 1 {
                r ^= b;
            }
        }
        if r != 0 {
            let p = 31 - r.leading_zeros();
            for b in basis.iter_mut() {
                if (*b >> p) & 1 == 1 {
                    *b ^= r;
                }
            }
            basis.push(r);
        }
    }
    basis.sort_unstable_by(|a, b| b.cmp(a));
    basis.into_iter().map(|mask| BitVector { mask, n }).collect()
}

/// Span of a GF(2) generating set: every XOR combination, each exactly once,
/// in ascending index order. The identity is always included.
pub fn gf2_span(generators: &[BitVector], n: usize) -> Vec<BitVector> {
    let mut members: Vec<u32> = vec![0];
    for g in generators {
        assert_eq!(g.len(), n, "generator length mismatch");
        if members.contains(&g.mask) {
            continue;
        }
        let mut extended = Vec::with_capacity(members.len() * 2);
        for &m in &members {
            extended.push(m);
            extended.push(m ^ g.mask);
        }
        members = extended;
    }
    members.sort_unstable();
    members.dedup();
    members
        .into_iter()
        .map(|mask| BitVector { mask, n })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn addition_is_xor_with_identity_and_self_inverse() {
        assert_eq!(group_add(&bv("01"), &bv("11")).unwrap(), bv("10"));
        let v = bv("1011");
        assert_eq!(group_add(&v, &v).unwrap(), BitVector::zero(4));
        assert_eq!(group_add(&v, &BitVector::zero(4)).unwrap(), v);
        assert!(group_add(&bv("01"), &bv("011")).is_err());
    }

    #[test]
    fn character_values() {
        assert_eq!(character_eval(&bv("10"), &bv("11")).unwrap(), -1);
        assert_eq!(character_eval(&bv("00"), &bv("10")).unwrap(), 1);
        assert_eq!(character_eval(&bv("11"), &bv("11")).unwrap(), 1);
    }

    #[test]
    fn character_sum_is_group_order_times_delta() {
        for n in 1..=3 {
            for chi in BitVector::all(n) {
                let total: i32 = BitVector::all(n)
                    .map(|g| character_eval(&chi, &g).unwrap())
                    .sum();
                let expected = if chi.is_zero() { 1 << n } else { 0 };
                assert_eq!(total, expected, "chi={chi}");
            }
        }
    }

    #[test]
    fn pauli_matrix_single_qubit() {
        let id = pauli_matrix::<f64>(&PauliLabel::identity(1));
        assert_eq!(id, Array2::eye(2));

        let zx = pauli_matrix::<f64>(&PauliLabel::new(bv("1"), bv("1")).unwrap());
        let c = |x: f64| Complex64::new(x, 0.0);
        assert_eq!(zx, array![[c(0.0), c(1.0)], [c(-1.0), c(0.0)]]);
    }

    #[test]
    fn pauli_matrix_tensor_structure() {
        // u=(1,0), v=(0,0) is X on qubit 0: X (x) I with qubit 0 leftmost.
        let m = pauli_matrix::<f64>(&PauliLabel::new(bv("10"), bv("00")).unwrap());
        for g in 0..4usize {
            assert_eq!(m[[g ^ 0b10, g]].re, 1.0);
        }
    }

    #[test]
    fn pauli_matrices_are_real_orthogonal() {
        for label in PauliLabel::all(2) {
            let m = pauli_matrix::<f64>(&label);
            assert!(m.iter().all(|x| x.im == 0.0));
            let mt = m.t().mapv(|x| x.conj());
            let prod = mt.dot(&m);
            for i in 0..4 {
                for j in 0..4 {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((prod[[i, j]].re - expected).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn product_sign_matches_matrix_multiplication() {
        for a in PauliLabel::all(2) {
            for b in PauliLabel::all(2) {
                let lhs = pauli_matrix::<f64>(&a).dot(&pauli_matrix::<f64>(&b));
                let sign = pauli_product_sign(&a, &b) as f64;
                let rhs = pauli_matrix::<f64>(&a.compose(&b)).mapv(|x| x * sign);
                assert!(
                    lhs.iter()
                        .zip(rhs.iter())
                        .all(|(x, y)| (x - y).norm() < 1e-14),
                    "a={a} b={b}"
                );
            }
        }
    }

    #[test]
    fn commutation_rule_matches_symplectic_form() {
        for a in PauliLabel::all(2) {
            for b in PauliLabel::all(2) {
                let ab = pauli_matrix::<f64>(&a).dot(&pauli_matrix::<f64>(&b));
                let ba = pauli_matrix::<f64>(&b).dot(&pauli_matrix::<f64>(&a));
                let same = ab
                    .iter()
                    .zip(ba.iter())
                    .all(|(x, y)| (x - y).norm() < 1e-14);
                assert_eq!(same, a.commutes_with(&b));
            }
        }
    }

    #[test]
    fn cnot_maps_match_examples() {
        let maps = cnot_index_maps(0, 1, 2).unwrap();
        assert_eq!(maps.apply_g(&bv("10")), bv("11"));
        assert_eq!(maps.apply_chi(&bv("01")), bv("11"));
        assert!(cnot_index_maps(1, 1, 2).is_err());
        assert!(cnot_index_maps(2, 0, 2).is_err());
    }

    #[test]
    fn dual_overlap_values() {
        let one_qubit = dual_overlap::<f64>(&bv("0"), &bv("0")).unwrap();
        assert!((one_qubit.re - 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
        let two_qubit = dual_overlap::<f64>(&bv("11"), &bv("10")).unwrap();
        assert!((two_qubit.re + 0.5).abs() < 1e-15);
        assert_eq!(two_qubit.im, 0.0);
    }

    #[test]
    fn bit_string_round_trip() {
        let v = bv("0110");
        assert_eq!(v.to_string(), "0110");
        assert!(v.get(1) && v.get(2));
        assert!(!v.get(0) && !v.get(3));
        assert_eq!(v.index(), 0b0110);
        assert!("01a1".parse::<BitVector>().is_err());
        assert!("".parse::<BitVector>().is_err());
    }

    #[test]
    fn nullspace_is_orthogonal_complement() {
        for n in 1..=4usize {
            for gens_mask in 0..(1usize << n) {
                let gens: Vec<BitVector> = (0..n)
                    .filter(|j| (gens_mask >> j) & 1 == 1)
                    .map(|j| BitVector::unit(j, n))
                    .collect();
                let basis = gf2_nullspace(&gens, n);
                let dual = gf2_span(&basis, n);
                let brute: Vec<BitVector> = BitVector::all(n)
                    .filter(|x| gens.iter().all(|g| x.dot(g) == 0))
                    .collect();
                assert_eq!(dual, brute);
            }
        }
    }

    #[test]
    fn nullspace_of_nontrivial_generators() {
        let gens = vec![bv("110"), bv("011")];
        let basis = gf2_nullspace(&gens, 3);
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0], bv("111"));
    }

    proptest! {
        #[test]
        fn character_is_a_homomorphism(a in 0usize..16, b in 0usize..16, c in 0usize..16) {
            let chi = BitVector::from_index(c, 4);
            let ga = BitVector::from_index(a, 4);
            let gb = BitVector::from_index(b, 4);
            let lhs = character_eval(&chi, &(ga + gb)).unwrap();
            let rhs = character_eval(&chi, &ga).unwrap() * character_eval(&chi, &gb).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn cnot_maps_are_involutions(g in 0usize..32, c in 0usize..5, t in 0usize..5) {
            prop_assume!(c != t);
            let maps = cnot_index_maps(c, t, 5).unwrap();
            let v = BitVector::from_index(g, 5);
            prop_assert_eq!(maps.apply_g(&maps.apply_g(&v)), v);
            prop_assert_eq!(maps.apply_chi(&maps.apply_chi(&v)), v);
        }

        #[test]
        fn overlap_magnitude_is_fixed(g in 0usize..8, chi in 0usize..8) {
            let gv = BitVector::from_index(g, 3);
            let cv = BitVector::from_index(chi, 3);
            let ov = dual_overlap::<f64>(&gv, &cv).unwrap();
            prop_assert!((ov.norm() - 1.0 / 8.0f64.sqrt()).abs() < 1e-15);
        }
    }
}
