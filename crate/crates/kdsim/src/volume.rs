//! Monte Carlo estimation of the relative Hilbert-Schmidt volumes of the
//! four classification categories of two-qubit rebit states.
//!
//! Each Hilbert-Schmidt (real Ginibre) draw is classified by two
//! independent predicates: KD positivity of its quasiprobability table and
//! membership in the 60-vertex two-qubit stabilizer polytope. Membership
//! runs through a floating-point simplex pre-pass whose verdict is
//! accepted only when the phase-one objective is clearly away from the
//! feasibility boundary; anything within the gray band (and any pre-pass
//! failure) escalates to the exact rational LP, so counting error is
//! confined to states within float roundoff of the polytope surface.
//! Sample `i` is generated from its own counter-based stream keyed by
//! `(seed, i)`, which makes the tally bit-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::hermitian_pauli_matrix;
use crate::kd::kd_distribution;
use crate::polytope::{
    membership_in_coords, pauli_coords, vertex_pauli_coords, PauliCoords, VertexSet,
};
use crate::rng::CounterRng;
use crate::state::{ginibre_rebit_sample, DensityMatrix};

use ndarray::Array2;
use num::ToPrimitive;
use num_complex::Complex64;

/// KD-positivity tolerance used by classification. The KD-positive region
/// has positive volume and a measure-zero boundary, so estimates are
/// insensitive to the exact value; it is pinned for reproducibility.
pub const CLASSIFY_KD_TOL: f64 = 1e-9;

/// Float pre-pass objectives at or below this are accepted as feasible.
const LP_FEASIBLE_BAND: f64 = 1e-9;
/// Float pre-pass objectives at or above this are accepted as infeasible;
/// verdicts between the bands escalate to the exact rational LP.
const LP_INFEASIBLE_BAND: f64 = 1e-7;

/// Classification of a rebit state by stabilizer membership and KD
/// positivity (mutually exclusive and exhaustive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    /// Stabilizer mixture with a nonnegative KD table.
    #[serde(rename = "STAB_KDPOS")]
    StabKdpos,
    /// Stabilizer mixture with a negative or complex KD entry.
    #[serde(rename = "STAB_KDNEG")]
    StabKdneg,
    /// Outside the stabilizer polytope yet KD-positive (bound magic).
    #[serde(rename = "MAGIC_KDPOS")]
    MagicKdpos,
    /// Outside the stabilizer polytope with a nonpositive KD table.
    #[serde(rename = "MAGIC_KDNEG")]
    MagicKdneg,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::StabKdpos,
        Category::StabKdneg,
        Category::MagicKdpos,
        Category::MagicKdneg,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Category::StabKdpos => "STAB_KDPOS",
            Category::StabKdneg => "STAB_KDNEG",
            Category::MagicKdpos => "MAGIC_KDPOS",
            Category::MagicKdneg => "MAGIC_KDNEG",
        }
    }

    fn index(&self) -> usize {
        Category::ALL.iter().position(|c| c == self).unwrap()
    }

    fn from_flags(member: bool, kd_positive: bool) -> Category {
        match (member, kd_positive) {
            (true, true) => Category::StabKdpos,
            (true, false) => Category::StabKdneg,
            (false, true) => Category::MagicKdpos,
            (false, false) => Category::MagicKdneg,
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Prebuilt classification context: the 60 stabilizer vertices in float
/// and exact coordinates, the Pauli basis for fast coordinate extraction,
/// and the KD tolerance.
pub struct Classifier {
    sigma: Vec<Array2<Complex64>>,
    verts_f64: Vec<Vec<f64>>,
    verts_exact: Vec<PauliCoords>,
    kd_tol: f64,
}

impl Classifier {
    pub fn new(kd_tol: f64) -> Result<Self> {
        let verts_exact = vertex_pauli_coords(VertexSet::Stabilizer)?;
        let rows = verts_exact[0].entries().len();
        let verts_f64: Vec<Vec<f64>> = (0..rows)
            .map(|i| {
                verts_exact
                    .iter()
                    .map(|v| v.entries()[i].to_f64().unwrap_or(f64::NAN))
                    .collect()
            })
            .collect();
        let sigma = (0..16)
            .map(|idx| hermitian_pauli_matrix::<f64>(&crate::polytope::pauli_label(idx, 2)))
            .collect();
        Ok(Classifier {
            sigma,
            verts_f64,
            verts_exact,
            kd_tol,
        })
    }

    pub fn kd_tol(&self) -> f64 {
        self.kd_tol
    }

    /// Float Pauli coordinates `Tr(rho sigma_P) / 4`.
    fn float_coords(&self, rho: &DensityMatrix<f64>) -> Vec<f64> {
        let m = rho.matrix();
        self.sigma
            .iter()
            .map(|s| {
                let mut acc = 0.0f64;
                for i in 0..4 {
                    for j in 0..4 {
                        let a = s[[i, j]];
                        let b = m[[j, i]];
                        acc += a.re * b.re - a.im * b.im;
                    }
                }
                acc * 0.25
            })
            .collect()
    }

    /// Stabilizer membership via the float pre-pass, escalating to the
    /// exact LP when the verdict falls in the gray band or the pre-pass
    /// fails outright.
    fn stabilizer_member(&self, rho: &DensityMatrix<f64>) -> Result<bool> {
        let b = self.float_coords(rho);
        match crate::polytope::simplex::phase_one(&self.verts_f64, &b, 1e-9, 4_000) {
            Ok(out) if out.objective <= LP_FEASIBLE_BAND => Ok(true),
            Ok(out) if out.objective >= LP_INFEASIBLE_BAND => Ok(false),
            _ => {
                let target = pauli_coords(rho)?;
                Ok(membership_in_coords(&target, &self.verts_exact)?.is_member())
            }
        }
    }

    /// Classifies a two-qubit rebit state.
    pub fn classify(&self, rho: &DensityMatrix<f64>) -> Result<Category> {
        if rho.n() != 2 {
            return Err(Error::SizeCap(format!(
                "classification is two-qubit, got {} qubits",
                rho.n()
            )));
        }
        if !rho.is_real(1e-9) {
            return Err(Error::InvalidState(
                "classification needs a rebit (real) state".into(),
            ));
        }
        let kd_positive = kd_distribution(rho).is_positive(self.kd_tol);
        let member = self.stabilizer_member(rho)?;
        Ok(Category::from_flags(member, kd_positive))
    }
}

/// One-off classification of a two-qubit rebit state.
pub fn classify_state(rho: &DensityMatrix<f64>, kd_tol: f64) -> Result<Category> {
    Classifier::new(kd_tol)?.classify(rho)
}

/// One category line of a volume report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryRow {
    pub category: Category,
    pub count: u64,
    pub fraction: f64,
    pub stderr: f64,
}

/// Monte Carlo volume estimate over the four categories.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeReport {
    pub samples: u64,
    pub seed: u64,
    pub kd_tol: f64,
    pub rows: Vec<CategoryRow>,
}

impl VolumeReport {
    fn from_counts(counts: [u64; 4], samples: u64, seed: u64, kd_tol: f64) -> Self {
        let n = samples as f64;
        let rows = Category::ALL
            .iter()
            .zip(counts)
            .map(|(&category, count)| {
                let p = count as f64 / n;
                CategoryRow {
                    category,
                    count,
                    fraction: p,
                    stderr: (p * (1.0 - p) / n).sqrt(),
                }
            })
            .collect();
        VolumeReport {
            samples,
            seed,
            kd_tol,
            rows,
        }
    }

    pub fn fraction(&self, category: Category) -> f64 {
        self.rows[category.index()].fraction
    }

    pub fn count(&self, category: Category) -> u64 {
        self.rows[category.index()].count
    }

    /// Table-shaped TSV with header `category count fraction stderr`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("category\tcount\tfraction\tstderr\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                row.category, row.count, row.fraction, row.stderr
            ));
        }
        out
    }
}

/// Estimates category volumes from `samples` Hilbert-Schmidt rebit draws.
///
/// Sample `i` uses the counter stream `(seed, i)`, so the result is
/// bit-identical for any `workers` (0 picks the rayon default).
pub fn estimate_volumes(samples: u64, seed: u64, workers: usize) -> Result<VolumeReport> {
    estimate_volumes_with(samples, seed, workers, CLASSIFY_KD_TOL)
}

/// [`estimate_volumes`] with an explicit KD tolerance.
pub fn estimate_volumes_with(
    samples: u64,
    seed: u64,
    workers: usize,
    kd_tol: f64,
) -> Result<VolumeReport> {
    if samples == 0 {
        return Err(Error::Input("volume estimation needs samples >= 1".into()));
    }
    let classifier = Classifier::new(kd_tol)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Solver(format!("thread pool: {e}")))?;
    let counts = pool.install(|| {
        (0..samples)
            .into_par_iter()
            .try_fold(
                || [0u64; 4],
                |mut acc, i| -> Result<[u64; 4]> {
                    let mut rng = CounterRng::new(seed, i);
                    let rho = ginibre_rebit_sample::<f64>(2, &mut rng)?;
                    acc[classifier.classify(&rho)?.index()] += 1;
                    Ok(acc)
                },
            )
            .try_reduce(
                || [0u64; 4],
                |a, b| Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]),
            )
    })?;
    Ok(VolumeReport::from_counts(counts, samples, seed, kd_tol))
}
