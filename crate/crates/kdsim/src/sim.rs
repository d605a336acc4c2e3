//! Phase-space simulation of free circuits on KD-positive inputs.
//!
//! A trajectory carries a single phase point `(g, chi)` sampled from the
//! input's KD table. Every free gate updates the point in `O(n)` bit
//! operations — Paulis translate it, the global Hadamard swaps its halves,
//! CX applies transposed index maps, and a measurement of qubit `j` emits
//! the bit `g_j`, then flips `chi_j` with probability one half. Histograms
//! over many trajectories reproduce the quantum circuit's outcome
//! distribution exactly (in expectation); `exact_simulate` provides the
//! dense Born-rule oracle the test suite compares against.

use std::collections::BTreeMap;
use std::fmt;

use ndarray::Array2;
use rayon::prelude::*;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::group::{cnot_index_maps, gf2_nullspace, pauli_matrix, BitVector, PauliLabel, PhasePoint};
use crate::kd::{kd_distribution, z_outcome_effect, KdDistribution};
use crate::matrix::{adjoint, trace};
use crate::rng::CounterRng;
use crate::scalar::{real, Scalar, C};
use crate::state::{cx_unitary, hadamard_all, DensityMatrix, Subgroup};

/// The sequence of measurement outcomes emitted by one trajectory, in
/// program order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ShotRecord {
    bits: Vec<u8>,
}

impl ShotRecord {
    pub fn new() -> Self {
        ShotRecord { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<u8>) -> Self {
        ShotRecord { bits }
    }

    pub fn push(&mut self, b: u8) {
        self.bits.push(b & 1);
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// XOR of the outcomes at the given positions.
    pub fn parity(&self, positions: &[usize]) -> u8 {
        positions.iter().fold(0, |acc, &i| acc ^ self.bits[i])
    }
}

impl fmt::Display for ShotRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for ShotRecord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                other => {
                    return Err(Error::Input(format!(
                        "shot record must be over '0'/'1', got '{other}'"
                    )))
                }
            }
        }
        Ok(ShotRecord { bits })
    }
}

/// Counts of each outcome record over a batch of trajectories.
pub type Histogram = BTreeMap<ShotRecord, u64>;

/// Renders a histogram as TSV lines `<bitstring>\t<count>`.
pub fn histogram_to_tsv(hist: &Histogram) -> String {
    let mut out = String::new();
    for (record, count) in hist {
        out.push_str(&format!("{record}\t{count}\n"));
    }
    out
}

// ---------------------------------------------------------------------------
// Phase-point samplers
// ---------------------------------------------------------------------------

/// Draws phase points from a KD-positive distribution.
///
/// The `Table` variant inverts the cumulative table of an explicit KD
/// distribution. The `Css` variant never builds a table: the KD support of
/// `|H;g,chi>` is the coset `(g + H) x (chi + H^perp)` with uniform weights,
/// so points are drawn by flipping one coin per basis vector, which scales
/// to widths far beyond the dense cap.
#[derive(Debug, Clone)]
pub enum PhaseSampler<T: Scalar> {
    Table {
        n: usize,
        /// Phase points with nonzero clamped weight, as `(g, chi)` indices.
        points: Vec<(u32, u32)>,
        /// Cumulative probabilities aligned with `points`; last entry is 1.
        cdf: Vec<T>,
    },
    Css {
        n: usize,
        g: BitVector,
        chi: BitVector,
        h_basis: Vec<BitVector>,
        hperp_basis: Vec<BitVector>,
    },
}

impl<T: Scalar> PhaseSampler<T> {
    /// Builds an inverse-CDF sampler from a KD table. Entries may be
    /// negative or imaginary by at most `tol` (they are clamped to `[0, 1]`
    /// and the table renormalized); anything worse is an error naming the
    /// worst offending phase point.
    pub fn from_kd(q: &KdDistribution<T>, tol: T) -> Result<Self> {
        if !q.is_positive(tol) {
            let (point, value) = q.worst_entry();
            return Err(Error::NotKdPositive {
                g: point.g.to_string(),
                chi: point.chi.to_string(),
                re: value.re.to_f64().unwrap_or(f64::NAN),
                im: value.im.to_f64().unwrap_or(f64::NAN),
                tol: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        let n = q.n();
        let d = q.dim();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut total = T::zero();
        for g in 0..d {
            for chi in 0..d {
                let w = q.table()[[g, chi]].re.max(T::zero());
                if w > T::zero() {
                    points.push((g as u32, chi as u32));
                    weights.push(w);
                    total += w;
                }
            }
        }
        let mut cdf = Vec::with_capacity(weights.len());
        let mut acc = T::zero();
        for w in &weights {
            acc += *w / total;
            cdf.push(acc);
        }
        if let Some(last) = cdf.last_mut() {
            *last = T::one();
        }
        Ok(PhaseSampler::Table { n, points, cdf })
    }

    /// Matrix-free sampler over the KD support of the CSS state
    /// `|H; g, chi>`.
    pub fn from_css(subgroup: &Subgroup, g: &BitVector, chi: &BitVector) -> Result<Self> {
        let n = subgroup.n();
        if g.len() != n {
            return Err(Error::LengthMismatch(g.len(), n));
        }
        if chi.len() != n {
            return Err(Error::LengthMismatch(chi.len(), n));
        }
        let h_basis = subgroup.generators().to_vec();
        let hperp_basis = gf2_nullspace(subgroup.generators(), n);
        Ok(PhaseSampler::Css {
            n,
            g: *g,
            chi: *chi,
            h_basis,
            hperp_basis,
        })
    }

    pub fn n(&self) -> usize {
        match self {
            PhaseSampler::Table { n, .. } | PhaseSampler::Css { n, .. } => *n,
        }
    }

    /// Draws one phase point.
    pub fn sample(&self, rng: &mut CounterRng) -> PhasePoint {
        match self {
            PhaseSampler::Table { n, points, cdf } => {
                let u = real::<T>(rng.uniform());
                let idx = cdf.partition_point(|c| *c < u).min(points.len() - 1);
                let (g, chi) = points[idx];
                PhasePoint::new(
                    BitVector::from_index(g as usize, *n),
                    BitVector::from_index(chi as usize, *n),
                )
                .expect("equal lengths")
            }
            PhaseSampler::Css {
                g,
                chi,
                h_basis,
                hperp_basis,
                ..
            } => {
                let mut gp = *g;
                for b in h_basis {
                    if rng.bit() {
                        gp = gp + *b;
                    }
                }
                let mut cp = *chi;
                for b in hperp_basis {
                    if rng.bit() {
                        cp = cp + *b;
                    }
                }
                PhasePoint::new(gp, cp).expect("equal lengths")
            }
        }
    }
}

/// Draws one phase point from a KD table (a convenience wrapper that builds
/// the inverse-CDF sampler and samples once; batch callers should reuse a
/// [`PhaseSampler`]).
pub fn sample_phase_point<T: Scalar>(
    q: &KdDistribution<T>,
    rng: &mut CounterRng,
    tol: T,
) -> Result<PhasePoint> {
    Ok(PhaseSampler::from_kd(q, tol)?.sample(rng))
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

/// Runs the gate-by-gate phase-point update for one trajectory whose initial
/// point was already drawn.
fn advance(circuit: &Circuit, mut point: PhasePoint, rng: &mut CounterRng) -> ShotRecord {
    let n = circuit.n();
    let mut record = ShotRecord::new();
    for gate in circuit.gates() {
        match gate {
            Gate::Pauli { u, v } => {
                point.g = point.g + *u;
                point.chi = point.chi + *v;
            }
            Gate::Hall => std::mem::swap(&mut point.g, &mut point.chi),
            Gate::Cx { control, target } => {
                let maps = cnot_index_maps(*control, *target, n).expect("validated circuit");
                point.g = maps.apply_g(&point.g);
                point.chi = maps.apply_chi(&point.chi);
            }
            Gate::Measure { qubit } => {
                record.push(u8::from(point.g.get(*qubit)));
                if rng.bit() {
                    point.chi = point.chi + BitVector::unit(*qubit, n);
                }
            }
            Gate::CondPauli { u, v, outcomes } => {
                if record.parity(outcomes) == 1 {
                    point.g = point.g + *u;
                    point.chi = point.chi + *v;
                }
            }
        }
    }
    record
}

/// Samples an initial point from `q` and plays the circuit once.
pub fn run_trajectory<T: Scalar>(
    circuit: &Circuit,
    q: &KdDistribution<T>,
    rng: &mut CounterRng,
    tol: T,
) -> Result<ShotRecord> {
    if q.n() != circuit.n() {
        return Err(Error::LengthMismatch(q.n(), circuit.n()));
    }
    let point = sample_phase_point(q, rng, tol)?;
    Ok(advance(circuit, point, rng))
}

/// Runs `shots` independent trajectories from a prebuilt sampler.
///
/// Trajectory `i` draws every random number from the stream `(seed, i)`, so
/// the histogram is a pure function of `(circuit, sampler, shots, seed)` —
/// independent of thread count and scheduling.
pub fn run_shots_sampled<T: Scalar>(
    circuit: &Circuit,
    sampler: &PhaseSampler<T>,
    shots: u64,
    seed: u64,
) -> Result<Histogram> {
    if sampler.n() != circuit.n() {
        return Err(Error::LengthMismatch(sampler.n(), circuit.n()));
    }
    let hist = (0..shots)
        .into_par_iter()
        .fold(Histogram::new, |mut acc, i| {
            let mut rng = CounterRng::new(seed, i);
            let point = sampler.sample(&mut rng);
            let record = advance(circuit, point, &mut rng);
            *acc.entry(record).or_insert(0) += 1;
            acc
        })
        .reduce(Histogram::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    Ok(hist)
}

/// Runs `shots` independent trajectories of `circuit` on the state `rho`,
/// which must be KD-positive within `tol`.
pub fn run_shots<T: Scalar>(
    circuit: &Circuit,
    rho: &DensityMatrix<T>,
    shots: u64,
    seed: u64,
    tol: T,
) -> Result<Histogram> {
    if rho.n() != circuit.n() {
        return Err(Error::LengthMismatch(rho.n(), circuit.n()));
    }
    let sampler = PhaseSampler::from_kd(&kd_distribution(rho), tol)?;
    run_shots_sampled(circuit, &sampler, shots, seed)
}

// ---------------------------------------------------------------------------
// Exact oracle
// ---------------------------------------------------------------------------

/// Width cap for the dense Born-rule oracle.
pub const MAX_EXACT_QUBITS: usize = 6;
/// Measurement cap for the dense Born-rule oracle (branch count `2^m`).
pub const MAX_EXACT_MEASUREMENTS: usize = 12;

/// Dense Born-rule simulation: branches on every measurement with the
/// projectors `(I ± Z_j)/2`, weighting branches by trace, and returns the
/// exact probability of each outcome record. Conditional Paulis consult the
/// branch's own earlier outcomes.
pub fn exact_simulate<T: Scalar>(
    circuit: &Circuit,
    rho: &DensityMatrix<T>,
) -> Result<BTreeMap<ShotRecord, T>> {
    let n = circuit.n();
    if n > MAX_EXACT_QUBITS {
        return Err(Error::SizeCap(format!(
            "exact simulation caps at {MAX_EXACT_QUBITS} qubits, got {n}"
        )));
    }
    if circuit.measurements() > MAX_EXACT_MEASUREMENTS {
        return Err(Error::SizeCap(format!(
            "exact simulation caps at {MAX_EXACT_MEASUREMENTS} measurements, got {}",
            circuit.measurements()
        )));
    }
    if rho.n() != n {
        return Err(Error::LengthMismatch(rho.n(), n));
    }

    // Branches carry unnormalized post-measurement states; the trace of a
    // branch is the probability of its outcome prefix.
    struct Branch<T: Scalar> {
        mat: Array2<C<T>>,
        outcomes: ShotRecord,
    }
    let prune = real::<T>(1e-15);
    let mut branches = vec![Branch {
        mat: rho.matrix().clone(),
        outcomes: ShotRecord::new(),
    }];

    let conjugate = |m: &Array2<C<T>>, u: &Array2<C<T>>| u.dot(m).dot(&adjoint(u));

    for gate in circuit.gates() {
        match gate {
            Gate::Pauli { u, v } => {
                let p = pauli_matrix::<T>(&PauliLabel::new(*u, *v).expect("validated circuit"));
                for b in &mut branches {
                    b.mat = conjugate(&b.mat, &p);
                }
            }
            Gate::Hall => {
                let h = hadamard_all::<T>(n);
                for b in &mut branches {
                    b.mat = conjugate(&b.mat, &h);
                }
            }
            Gate::Cx { control, target } => {
                let u = cx_unitary::<T>(*control, *target, n).expect("validated circuit");
                for b in &mut branches {
                    b.mat = conjugate(&b.mat, &u);
                }
            }
            Gate::Measure { qubit } => {
                let mut next = Vec::with_capacity(branches.len() * 2);
                for b in branches {
                    for bit in 0..2u8 {
                        let pi = z_outcome_effect::<T>(*qubit, bit, n)?;
                        let child = pi.dot(&b.mat).dot(&pi);
                        let weight = trace(&child).re;
                        if weight > prune {
                            let mut outcomes = b.outcomes.clone();
                            outcomes.push(bit);
                            next.push(Branch {
                                mat: child,
                                outcomes,
                            });
                        }
                    }
                }
                branches = next;
            }
            Gate::CondPauli { u, v, outcomes } => {
                let p = pauli_matrix::<T>(&PauliLabel::new(*u, *v).expect("validated circuit"));
                for b in &mut branches {
                    if b.outcomes.parity(outcomes) == 1 {
                        b.mat = conjugate(&b.mat, &p);
                    }
                }
            }
        }
    }

    let mut probs: BTreeMap<ShotRecord, T> = BTreeMap::new();
    let mut total = T::zero();
    for b in branches {
        let p = trace(&b.mat).re;
        total += p;
        *probs.entry(b.outcomes).or_insert_with(T::zero) += p;
    }
    if (total - T::one()).abs() > real::<T>(1e-10) {
        return Err(Error::Numeric(format!(
            "exact simulation probabilities sum to {total}, expected 1"
        )));
    }
    Ok(probs)
}

/// Total-variation distance between an empirical histogram and an exact
/// probability map: `(1/2) sum_r |hist(r)/shots - exact(r)|` over the union
/// of outcome records.
pub fn total_variation_distance<T: Scalar>(
    hist: &Histogram,
    exact: &BTreeMap<ShotRecord, T>,
) -> T {
    let shots: u64 = hist.values().sum();
    if shots == 0 {
        return T::one();
    }
    let denom = real::<T>(shots as f64);
    let mut keys: Vec<&ShotRecord> = hist.keys().chain(exact.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut acc = T::zero();
    for k in keys {
        let emp = real::<T>(hist.get(k).copied().unwrap_or(0) as f64) / denom;
        let exa = exact.get(k).copied().unwrap_or_else(T::zero);
        acc += (emp - exa).abs();
    }
    acc / real::<T>(2.0)
}
