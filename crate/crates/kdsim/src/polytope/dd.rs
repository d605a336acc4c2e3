//! Facets of a point set by the double description method, in exact
//! rational arithmetic.
//!
//! Given vertices, the pipeline is: reduce to the affine hull (row
//! reduction over the differences), translate the centroid to the origin,
//! and homogenize the polar `{a : a . z_i <= 1}` into a pointed cone whose
//! extreme rays are enumerated by incremental double description with the
//! combinatorial adjacency test. Rays with positive homogenizing
//! coordinate descale to polar vertices, i.e. facets of the original hull.
//! Everything stays in `BigRational`, so facet counts and canonical facet
//! identities are exact.

use num::{BigInt, BigRational, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

fn rzero() -> Rat {
    Rat::zero()
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter()
        .zip(b)
        .fold(rzero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Scales a rational vector to coprime integers, preserving direction.
pub(super) fn primitive_integer(v: &[Rat]) -> Vec<BigInt> {
    let mut lcm = BigInt::from(1);
    for x in v {
        lcm = num::integer::lcm(lcm, x.denom().clone());
    }
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    let mut gcd = BigInt::from(0);
    for x in &ints {
        gcd = num::integer::gcd(gcd, x.abs());
    }
    if gcd.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &gcd).collect()
}

/// Normalizes a ray to primitive-integer form (as rationals), taming
/// coefficient growth during the incremental insertion.
fn normalize_ray(v: &mut [Rat]) {
    let ints = primitive_integer(v);
    for (slot, int) in v.iter_mut().zip(ints) {
        *slot = Rat::from_integer(int);
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
#[allow(clippy::needless_range_loop)]
pub fn rref(rows: &mut Vec<Vec<Rat>>) -> Vec<usize> {
    let nrows = rows.len();
    if nrows == 0 {
        return Vec::new();
    }
    let ncols = rows[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(pr) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = x.clone() / inv.clone();
        }
        for i in 0..nrows {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..ncols {
                    let sub = f.clone() * rows[r][j].clone();
                    rows[i][j] = rows[i][j].clone() - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Inverse of a square rational matrix, or `None` when singular.
fn invert(mat: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let d = mat.len();
    let mut aug: Vec<Vec<Rat>> = mat
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            for k in 0..d {
                r.push(if k == i {
                    Rat::from_integer(1.into())
                } else {
                    rzero()
                });
            }
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots != (0..d).collect::<Vec<_>>() {
        return None;
    }
    Some(aug.into_iter().map(|row| row[d..].to_vec()).collect())
}

/// Extreme rays of the pointed cone `{x : H x <= 0}`.
///
/// Requires `rank(H) = dim` (pointedness); supports up to 128 inequality
/// rows (zero-sets are tracked as `u128` bitmasks).
#[allow(clippy::needless_range_loop)]
pub fn cone_extreme_rays(ineqs: &[Vec<Rat>]) -> Result<Vec<Vec<Rat>>> {
    let nrows = ineqs.len();
    if nrows == 0 {
        return Err(Error::Input("cone needs at least one inequality".into()));
    }
    if nrows > 128 {
        return Err(Error::SizeCap(format!(
            "double description supports at most 128 inequalities, got {nrows}"
        )));
    }
    let dim = ineqs[0].len();
    if ineqs.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch(
            "cone inequalities have unequal lengths".into(),
        ));
    }

    // Greedily pick `dim` linearly independent rows for the initial
    // simplicial cone.
    let mut chosen: Vec<usize> = Vec::new();
    let mut probe: Vec<Vec<Rat>> = Vec::new();
    for i in 0..nrows {
        let mut trial = probe.clone();
        trial.push(ineqs[i].clone());
        if rref(&mut trial).len() > probe.len() {
            probe = {
                let mut p: Vec<Vec<Rat>> = chosen.iter().map(|&k| ineqs[k].clone()).collect();
                p.push(ineqs[i].clone());
                let _ = rref(&mut p);
                p
            };
            chosen.push(i);
            if chosen.len() == dim {
                break;
            }
        }
    }
    if chosen.len() < dim {
        return Err(Error::Numeric(format!(
            "cone is not pointed: inequality rank {} below dimension {dim}",
            chosen.len()
        )));
    }

    let a: Vec<Vec<Rat>> = chosen.iter().map(|&i| ineqs[i].clone()).collect();
    let ainv = invert(&a).ok_or_else(|| Error::Numeric("initial cone basis not invertible".into()))?;

    // Generators of {x : A x <= 0} for invertible A: the negated columns of
    // A^-1. Generator j is tight on every chosen row except the j-th.
    struct Ray {
        v: Vec<Rat>,
        /// Bitset over inequality indices (0..nrows) tight at this ray.
        zero: u128,
    }
    let mut rays: Vec<Ray> = (0..dim)
        .map(|j| {
            let mut v: Vec<Rat> = (0..dim).map(|i| -ainv[i][j].clone()).collect();
            normalize_ray(&mut v);
            let mut zero = 0u128;
            for (pos, &row) in chosen.iter().enumerate() {
                if pos != j {
                    zero |= 1 << row;
                }
            }
            Ray { v, zero }
        })
        .collect();

    let mut processed: u128 = chosen.iter().fold(0u128, |acc, &i| acc | (1 << i));

    for h in 0..nrows {
        if processed & (1 << h) != 0 {
            continue;
        }
        let vals: Vec<Rat> = rays.iter().map(|r| dot(&ineqs[h], &r.v)).collect();
        let mut keep: Vec<Ray> = Vec::new();
        let mut plus: Vec<usize> = Vec::new(); // violating: h.v > 0
        let mut minus: Vec<usize> = Vec::new(); // strictly feasible: h.v < 0
        for (i, val) in vals.iter().enumerate() {
            if val.is_zero() {
                continue;
            } else if val > &rzero() {
                plus.push(i);
            } else {
                minus.push(i);
            }
        }

        // Pairs (p, m) adjacent in the old cone produce the new boundary rays.
        let mut newcomers: Vec<Ray> = Vec::new();
        for &p in &plus {
            for &m in &minus {
                let common = rays[p].zero & rays[m].zero;
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, r)| k == p || k == m || (common & !r.zero) != 0);
                if !adjacent {
                    continue;
                }
                // val_p * v_m - val_m * v_p: positive combination, tight on h.
                let mut v: Vec<Rat> = (0..dim)
                    .map(|j| {
                        vals[p].clone() * rays[m].v[j].clone()
                            - vals[m].clone() * rays[p].v[j].clone()
                    })
                    .collect();
                normalize_ray(&mut v);
                newcomers.push(Ray {
                    v,
                    zero: common | (1 << h),
                });
            }
        }

        for (i, ray) in rays.into_iter().enumerate() {
            if vals[i].is_zero() {
                keep.push(Ray {
                    v: ray.v,
                    zero: ray.zero | (1 << h),
                });
            } else if vals[i] < rzero() {
                keep.push(ray);
            }
        }
        keep.extend(newcomers);
        rays = keep;
        processed |= 1 << h;
    }

    Ok(rays.into_iter().map(|r| r.v).collect())
}

/// A facet inequality `normal . x <= offset` in canonical integer form
/// (coprime entries, orientation holding on the polytope).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Facet {
    pub normal: Vec<BigInt>,
    pub offset: BigInt,
}

impl Facet {
    /// Evaluates `normal . x - offset` (nonpositive inside).
    pub fn slack(&self, x: &[Rat]) -> Rat {
        let mut acc = rzero();
        for (a, v) in self.normal.iter().zip(x) {
            acc += Rat::from_integer(a.clone()) * v.clone();
        }
        acc - Rat::from_integer(self.offset.clone())
    }

    /// Text form `a1 a2 ... | b`.
    pub fn to_line(&self) -> String {
        let coords: Vec<String> = self.normal.iter().map(|a| a.to_string()).collect();
        format!("{} | {}", coords.join(" "), self.offset)
    }
}

/// Facets of `conv(points)` relative to its affine hull.
pub struct PointFacets {
    pub facets: Vec<Facet>,
    pub affine_dim: usize,
}

/// Enumerates the facets of the convex hull of exact rational points
/// (relative to their affine hull), with canonical integer inequalities in
/// the original coordinates.
pub fn facets_of_points(points: &[Vec<Rat>]) -> Result<PointFacets> {
    if points.len() < 2 {
        return Err(Error::Input(format!(
            "facet enumeration needs at least 2 points, got {}",
            points.len()
        )));
    }
    if points.len() > 64 {
        return Err(Error::SizeCap(format!(
            "facet enumeration caps at 64 vertices, got {}",
            points.len()
        )));
    }
    let ambient = points[0].len();
    if points.iter().any(|p| p.len() != ambient) {
        return Err(Error::DimensionMismatch(
            "points have unequal lengths".into(),
        ));
    }

    // Affine hull: RREF over the differences from the first point. In
    // reduced form, the coordinates of any difference vector with respect
    // to the basis rows are just its pivot-column entries.
    let v0 = &points[0];
    let mut diffs: Vec<Vec<Rat>> = points[1..]
        .iter()
        .map(|p| {
            p.iter()
                .zip(v0)
                .map(|(a, b)| a.clone() - b.clone())
                .collect()
        })
        .collect();
    let pivots = rref(&mut diffs);
    let k = pivots.len();
    if k == 0 {
        return Err(Error::Input(
            "all points coincide; no facets exist".into(),
        ));
    }
    if k > 9 {
        return Err(Error::SizeCap(format!(
            "facet enumeration caps at affine dimension 9, got {k}"
        )));
    }

    // Hull coordinates y (dimension k) and centered coordinates z.
    let ys: Vec<Vec<Rat>> = points
        .iter()
        .map(|p| {
            pivots
                .iter()
                .map(|&c| p[c].clone() - v0[c].clone())
                .collect()
        })
        .collect();
    let count = Rat::from_integer(BigInt::from(points.len() as i64));
    let centroid: Vec<Rat> = (0..k)
        .map(|j| {
            ys.iter().fold(rzero(), |acc, y| acc + y[j].clone()) / count.clone()
        })
        .collect();
    let zs: Vec<Vec<Rat>> = ys
        .iter()
        .map(|y| {
            y.iter()
                .zip(&centroid)
                .map(|(a, c)| a.clone() - c.clone())
                .collect()
        })
        .collect();

    // Polar polytope {a : z_i . a <= 1}, homogenized to the pointed cone
    // {(a, t) : z_i . a - t <= 0, -t <= 0}. Its extreme rays with t > 0 are
    // the polar's vertices, i.e. the primal facets a . z <= 1.
    let mut cone_rows: Vec<Vec<Rat>> = zs
        .iter()
        .map(|z| {
            let mut row = z.clone();
            row.push(Rat::from_integer((-1).into()));
            row
        })
        .collect();
    let mut last = vec![rzero(); k];
    last.push(Rat::from_integer((-1).into()));
    cone_rows.push(last);

    let rays = cone_extreme_rays(&cone_rows)?;

    let mut facets: Vec<Facet> = Vec::new();
    for ray in rays {
        let t = ray[k].clone();
        if t.is_zero() || t < rzero() {
            return Err(Error::Numeric(
                "polar polytope produced a ray at infinity; centroid was not interior".into(),
            ));
        }
        let a: Vec<Rat> = ray[..k].iter().map(|x| x.clone() / t.clone()).collect();

        // Translate a . z <= 1 back through z = y - c and y_j = r[p_j] - v0[p_j].
        let b_hull = Rat::from_integer(1.into()) + dot(&a, &centroid);
        let mut normal = vec![rzero(); ambient];
        for (j, &c) in pivots.iter().enumerate() {
            normal[c] = a[j].clone();
        }
        let offset = b_hull
            + pivots
                .iter()
                .enumerate()
                .fold(rzero(), |acc, (j, &c)| acc + a[j].clone() * v0[c].clone());

        let mut combined = normal.clone();
        combined.push(offset);
        let ints = primitive_integer(&combined);
        facets.push(Facet {
            normal: ints[..ambient].to_vec(),
            offset: ints[ambient].clone(),
        });
    }
    facets.sort();
    facets.dedup();
    Ok(PointFacets {
        facets,
        affine_dim: k,
    })
}
