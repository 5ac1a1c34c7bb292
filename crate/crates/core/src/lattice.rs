//! Bounded L♮-convex sets given by difference constraints.
//!
//! A domain is the integer point set of
//! `{ x : lower_i <= x_i <= upper_i, x_i - x_j <= gamma_ij }`. Extremal
//! values over its convex hull are shortest-path distances in the
//! constraint graph, which carries one node per coordinate plus an origin
//! node pinned at zero:
//!
//! * `x_i - x_j <= gamma_ij` is an arc `j -> i` of weight `gamma_ij`,
//! * `x_i <= upper_i` is an arc `origin -> i` of weight `upper_i`,
//! * `-x_i <= -lower_i` is an arc `i -> origin` of weight `-lower_i`.
//!
//! The maximum of `x_i - x_j` is then the distance from `j` to `i`. With
//! integer data the polyhedron is integral, so these maxima are attained at
//! lattice points and are exact integers.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::rational::{from_int, Rational};

/// An integer point. Coordinates are 0-based throughout the API.
pub type LatticePoint = Vec<i64>;

pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Raw linear-inequality description, not yet validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    dim: usize,
    lower: Vec<i64>,
    upper: Vec<i64>,
    /// Row-major `dim x dim`; entry `(i, j)` bounds `x_i - x_j`. `None` is an
    /// absent arc (+∞).
    gamma: Vec<Option<i64>>,
}

/// Extra single-coordinate bounds `lower <= y_coord <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Refinement {
    pub coord: usize,
    pub lower: i64,
    pub upper: i64,
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    from: usize,
    to: usize,
    weight: i64,
}

impl ConstraintSystem {
    pub fn new(lower: Vec<i64>, upper: Vec<i64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        for (index, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if lo > hi {
                return Err(Error::EmptyBox { index, lower: lo, upper: hi });
            }
        }
        let dim = lower.len();
        Ok(Self { dim, lower, upper, gamma: vec![None; dim * dim] })
    }

    /// Adds `x_i - x_j <= bound`, keeping the tighter value if one exists.
    pub fn with_difference(mut self, i: usize, j: usize, bound: i64) -> Result<Self> {
        self.add_difference(i, j, bound)?;
        Ok(self)
    }

    pub fn add_difference(&mut self, i: usize, j: usize, bound: i64) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::InvalidArgument(format!("difference bound on the diagonal ({}, {})", i + 1, j + 1)));
        }
        let slot = &mut self.gamma[i * self.dim + j];
        *slot = Some(slot.map_or(bound, |g| g.min(bound)));
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn upper(&self) -> &[i64] {
        &self.upper
    }

    pub fn gamma(&self, i: usize, j: usize) -> Option<i64> {
        if i == j {
            Some(0)
        } else {
            self.gamma[i * self.dim + j]
        }
    }

    /// Finite off-diagonal entries `(i, j, gamma_ij)` in lexicographic order.
    pub fn differences(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        let d = self.dim;
        self.gamma.iter().enumerate().filter_map(move |(k, g)| g.map(|g| (k / d, k % d, g)))
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.dim {
            Err(Error::IndexOutOfRange { index: i, dim: self.dim })
        } else {
            Ok(())
        }
    }

    fn origin(&self) -> usize {
        self.dim
    }

    fn arcs(&self) -> Vec<Arc> {
        let o = self.origin();
        let mut arcs = Vec::with_capacity(2 * self.dim + self.gamma.len());
        for i in 0..self.dim {
            arcs.push(Arc { from: o, to: i, weight: self.upper[i] });
            arcs.push(Arc { from: i, to: o, weight: -self.lower[i] });
        }
        for (i, j, g) in self.differences() {
            arcs.push(Arc { from: j, to: i, weight: g });
        }
        arcs
    }

    /// All-pairs shortest-path matrix over `dim + 1` nodes (origin last).
    fn distances(&self) -> Result<Vec<i64>> {
        let n = self.dim + 1;
        let arcs = self.arcs();
        let mut out = Vec::with_capacity(n * n);
        for s in 0..n {
            let row = bellman_ford(n, &arcs, s).ok_or(Error::DomainEmpty)?;
            // Finite bounds make every node reachable through the origin.
            out.extend(row.into_iter().map(|v| v.expect("bounded system is strongly connected")));
        }
        Ok(out)
    }

    /// Whether the convex hull contains an open ball: every box is
    /// non-degenerate and no two graph nodes (origin included) have their
    /// difference fixed, i.e. the constraint graph has no zero-weight cycle.
    pub fn is_full_dimensional(&self) -> bool {
        self.full_dimensionality_defect().is_none()
    }

    fn full_dimensionality_defect(&self) -> Option<String> {
        for i in 0..self.dim {
            if self.lower[i] == self.upper[i] {
                return Some(format!("coordinate {} is pinned to {}", i + 1, self.lower[i]));
            }
        }
        let dist = match self.distances() {
            Ok(d) => d,
            Err(_) => return Some("constraint system is infeasible".into()),
        };
        let n = self.dim + 1;
        for u in 0..n {
            for v in (u + 1)..n {
                if dist[u * n + v] + dist[v * n + u] == 0 {
                    return Some(if v == self.origin() {
                        format!("coordinate {} is pinned by the difference constraints", u + 1)
                    } else {
                        format!("x_{} - x_{} is fixed by the difference constraints", v + 1, u + 1)
                    });
                }
            }
        }
        None
    }
}

/// Label-correcting single-source shortest paths. `None` on a negative
/// cycle reachable from `source`; unreachable nodes stay `None` in the row.
fn bellman_ford(n: usize, arcs: &[Arc], source: usize) -> Option<Vec<Option<i64>>> {
    let mut dist: Vec<Option<i64>> = vec![None; n];
    dist[source] = Some(0);
    // n - 1 relaxation passes, then one detection pass.
    for pass in 0..n {
        let mut changed = false;
        for a in arcs {
            if let Some(du) = dist[a.from] {
                let cand = du + a.weight;
                if dist[a.to].is_none_or(|dv| cand < dv) {
                    if pass == n - 1 {
                        return None;
                    }
                    dist[a.to] = Some(cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Some(dist)
}

/// A validated, nonempty, bounded, full-dimensional L♮-convex set.
///
/// Immutable after construction; all queries are read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct LNatDomain {
    system: ConstraintSystem,
    /// `(dim + 1)^2` closed distances; node `dim` is the origin.
    dist: Vec<i64>,
    interior: Vec<f64>,
}

impl LNatDomain {
    pub fn new(system: ConstraintSystem) -> Result<Self> {
        let dist = system.distances()?;
        if let Some(reason) = system.full_dimensionality_defect() {
            return Err(Error::NotFullDimensional(reason));
        }
        let interior = strict_interior_point(&system);
        Ok(Self { system, dist, interior })
    }

    /// The integer box `[lower, upper]` with no difference constraints.
    pub fn boxed(lower: Vec<i64>, upper: Vec<i64>) -> Result<Self> {
        Self::new(ConstraintSystem::new(lower, upper)?)
    }

    /// `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: i64, hi: i64) -> Result<Self> {
        Self::boxed(vec![lo; dim], vec![hi; dim])
    }

    pub fn system(&self) -> &ConstraintSystem {
        &self.system
    }

    pub fn dim(&self) -> usize {
        self.system.dim
    }

    pub fn lower(&self) -> &[i64] {
        &self.system.lower
    }

    pub fn upper(&self) -> &[i64] {
        &self.system.upper
    }

    pub fn gamma(&self, i: usize, j: usize) -> Option<i64> {
        self.system.gamma(i, j)
    }

    /// `max_i (upper_i - lower_i)`.
    pub fn width(&self) -> i64 {
        self.lower().iter().zip(self.upper()).map(|(l, u)| u - l).max().unwrap_or(0)
    }

    /// True when no finite difference constraint is present.
    pub fn is_box(&self) -> bool {
        self.system.differences().next().is_none()
    }

    /// A point with slack at least `1 / 2^k` (`2^k >= 2(dim + 1)`) on every
    /// inequality. Coordinates are dyadic, hence exact in `f64`.
    pub fn interior_point(&self) -> &[f64] {
        &self.interior
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.system.is_full_dimensional()
    }

    fn node_dist(&self, from: usize, to: usize) -> i64 {
        self.dist[from * (self.dim() + 1) + to]
    }

    /// `max { y_i - y_j : y in conv(K) }`.
    pub fn tightest_difference(&self, i: usize, j: usize) -> Result<i64> {
        self.system.check_index(i)?;
        self.system.check_index(j)?;
        if i == j {
            return Err(Error::InvalidArgument("tightest_difference needs i != j".into()));
        }
        Ok(self.node_dist(j, i))
    }

    /// Largest value of coordinate `i` over the hull.
    pub fn coordinate_upper(&self, i: usize) -> i64 {
        self.node_dist(self.dim(), i)
    }

    /// Smallest value of coordinate `i` over the hull.
    pub fn coordinate_lower(&self, i: usize) -> i64 {
        -self.node_dist(i, self.dim())
    }

    /// `max y_i` over the hull intersected with the extra coordinate bounds.
    pub fn coordinate_max(&self, refinements: &[Refinement], i: usize) -> Result<i64> {
        self.system.check_index(i)?;
        if self.is_box() {
            return self.box_coordinate_max(refinements, i);
        }
        let mut arcs = self.system.arcs();
        let o = self.dim();
        for r in refinements {
            self.system.check_index(r.coord)?;
            arcs.push(Arc { from: o, to: r.coord, weight: r.upper });
            arcs.push(Arc { from: r.coord, to: o, weight: -r.lower });
        }
        let dist = bellman_ford(o + 1, &arcs, o).ok_or(Error::InfeasibleRegion)?;
        Ok(dist[i].expect("coordinates are reachable from the origin"))
    }

    fn box_coordinate_max(&self, refinements: &[Refinement], i: usize) -> Result<i64> {
        let mut lo = self.lower().to_vec();
        let mut hi = self.upper().to_vec();
        for r in refinements {
            self.system.check_index(r.coord)?;
            lo[r.coord] = lo[r.coord].max(r.lower);
            hi[r.coord] = hi[r.coord].min(r.upper);
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::InfeasibleRegion);
        }
        Ok(hi[i])
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            Err(Error::DimensionMismatch { expected: self.dim(), got: len })
        } else {
            Ok(())
        }
    }

    pub fn contains(&self, z: &[i64]) -> Result<bool> {
        self.check_len(z.len())?;
        let in_box = z.iter().zip(self.lower().iter().zip(self.upper())).all(|(v, (lo, hi))| lo <= v && v <= hi);
        Ok(in_box && self.system.differences().all(|(i, j, g)| z[i] - z[j] <= g))
    }

    /// Exact membership of a rational point in `conv(K)`.
    pub fn contains_rational(&self, x: &[Rational]) -> Result<bool> {
        self.check_len(x.len())?;
        for (i, v) in x.iter().enumerate() {
            if *v < from_int(self.lower()[i]) || *v > from_int(self.upper()[i]) {
                return Ok(false);
            }
        }
        Ok(self.system.differences().all(|(i, j, g)| &x[i] - &x[j] <= from_int(g)))
    }

    /// Exact membership of a float point in `conv(K)`.
    pub fn contains_real(&self, x: &[f64]) -> Result<bool> {
        self.check_len(x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Ok(false);
        }
        // Integer bounds are exact in f64, so the box test needs no rationals.
        let in_box = x
            .iter()
            .zip(self.lower().iter().zip(self.upper()))
            .all(|(&v, (&lo, &hi))| lo as f64 <= v && v <= hi as f64);
        if !in_box {
            return Ok(false);
        }
        Ok(self.system.differences().all(|(i, j, g)| difference_at_most(x[i], x[j], g)))
    }

    /// Largest violation of any inequality at `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (i, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower()[i] as f64 - v).max(v - self.upper()[i] as f64);
        }
        for (i, j, g) in self.system.differences() {
            worst = worst.max(x[i] - x[j] - g as f64);
        }
        worst
    }

    pub fn enumerate(&self) -> Result<Vec<LatticePoint>> {
        self.enumerate_with_cap(DEFAULT_ENUMERATION_CAP)
    }

    /// All members of `K` in lexicographic order.
    pub fn enumerate_with_cap(&self, cap: usize) -> Result<Vec<LatticePoint>> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(self.dim());
        self.enumerate_rec(&mut current, &mut out, cap)?;
        Ok(out)
    }

    fn enumerate_rec(&self, current: &mut Vec<i64>, out: &mut Vec<LatticePoint>, cap: usize) -> Result<()> {
        let k = current.len();
        if k == self.dim() {
            if out.len() == cap {
                return Err(Error::TooLarge { cap });
            }
            out.push(current.clone());
            return Ok(());
        }
        // The distance matrix is closed under composition, so pairwise
        // consistency with the assigned prefix guarantees an extension.
        let mut lo = self.coordinate_lower(k);
        let mut hi = self.coordinate_upper(k);
        for (j, &zj) in current.iter().enumerate() {
            lo = lo.max(zj - self.node_dist(k, j));
            hi = hi.min(zj + self.node_dist(j, k));
        }
        for v in lo..=hi {
            current.push(v);
            self.enumerate_rec(current, out, cap)?;
            current.pop();
        }
        Ok(())
    }
}

/// Exact test of `a - b <= g` for finite floats.
///
/// TwoSum recovers the rounding error `e` with `a - b = s + e` exactly. Since
/// `g` is representable, round-to-nearest gives `s < g => a - b < g` and
/// `s > g => a - b > g`; only `s == g` needs the sign of `e`.
fn difference_at_most(a: f64, b: f64, g: i64) -> bool {
    let nb = -b;
    let s = a + nb;
    let bv = s - a;
    let av = s - bv;
    let e = (a - av) + (nb - bv);
    let g = g as f64;
    s < g || (s == g && e <= 0.0)
}

fn strict_interior_point(system: &ConstraintSystem) -> Vec<f64> {
    let n = system.dim + 1;
    let mut scale: i64 = 1;
    while scale < 2 * n as i64 {
        scale *= 2;
    }
    // Every simple cycle has integer weight >= 1 and at most n arcs, so
    // tightening each arc by 1/scale keeps all cycles positive.
    let arcs: Vec<Arc> = system.arcs().into_iter().map(|a| Arc { weight: a.weight * scale - 1, ..a }).collect();
    let dist = bellman_ford(n, &arcs, system.origin()).expect("full-dimensional system");
    let origin = dist[system.origin()].expect("origin is the source");
    (0..system.dim).map(|i| (dist[i].expect("reachable") - origin) as f64 / scale as f64).collect()
}

/// Whether a finite set is closed under rounded-up and rounded-down
/// componentwise midpoints.
pub fn verify_lnatural_set(points: &[LatticePoint]) -> bool {
    let set: HashSet<&[i64]> = points.iter().map(|p| p.as_slice()).collect();
    for (a, p) in points.iter().enumerate() {
        for q in &points[a..] {
            if p.len() != q.len() {
                return false;
            }
            let up: Vec<i64> = p.iter().zip(q).map(|(x, y)| (x + y + 1).div_euclid(2)).collect();
            let down: Vec<i64> = p.iter().zip(q).map(|(x, y)| (x + y).div_euclid(2)).collect();
            if !set.contains(up.as_slice()) || !set.contains(down.as_slice()) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(lo: i64, hi: i64) -> ConstraintSystem {
        ConstraintSystem::new(vec![lo, lo], vec![hi, hi]).unwrap()
    }

    #[test]
    fn membership() {
        let k = LNatDomain::new(square(1, 3)).unwrap();
        assert!(k.contains(&[2, 3]).unwrap());
        assert!(!k.contains(&[0, 1]).unwrap());
        let k = LNatDomain::new(square(1, 3).with_difference(0, 1, 1).unwrap()).unwrap();
        assert!(!k.contains(&[3, 1]).unwrap());
        assert!(k.contains(&[3, 2]).unwrap());
        assert!(matches!(k.contains(&[1]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn tightest_difference_examples() {
        let k = LNatDomain::new(square(1, 3)).unwrap();
        assert_eq!(k.tightest_difference(0, 1).unwrap(), 2);
        let k = LNatDomain::new(square(1, 3).with_difference(0, 1, 1).unwrap()).unwrap();
        assert_eq!(k.tightest_difference(0, 1).unwrap(), 1);
        assert!(k.tightest_difference(1, 1).is_err());
    }

    #[test]
    fn tightest_difference_chains_through_constraints() {
        let sys = ConstraintSystem::new(vec![0; 3], vec![3; 3])
            .unwrap()
            .with_difference(0, 1, 1)
            .unwrap()
            .with_difference(1, 2, 1)
            .unwrap();
        let k = LNatDomain::new(sys).unwrap();
        let brute = k.enumerate().unwrap().iter().map(|z| z[0] - z[2]).max().unwrap();
        assert_eq!(brute, 2);
        assert_eq!(k.tightest_difference(0, 2).unwrap(), 2);
    }

    #[test]
    fn coordinate_max_examples() {
        let k = LNatDomain::new(square(0, 2)).unwrap();
        assert_eq!(k.coordinate_max(&[], 0).unwrap(), 2);
        let r = [Refinement { coord: 0, lower: 0, upper: 1 }];
        assert_eq!(k.coordinate_max(&r, 0).unwrap(), 1);
        // y2 <= y1
        let k = LNatDomain::new(square(0, 2).with_difference(1, 0, 0).unwrap()).unwrap();
        assert_eq!(k.coordinate_max(&r, 1).unwrap(), 1);
        let bad = [Refinement { coord: 0, lower: 5, upper: 6 }];
        assert_eq!(k.coordinate_max(&bad, 1), Err(Error::InfeasibleRegion));
    }

    #[test]
    fn full_dimensionality() {
        assert!(square(1, 3).is_full_dimensional());
        let pinned = ConstraintSystem::new(vec![0, 0], vec![0, 2]).unwrap();
        assert!(!pinned.is_full_dimensional());
        let diagonal = square(0, 2).with_difference(0, 1, 0).unwrap().with_difference(1, 0, 0).unwrap();
        assert!(!diagonal.is_full_dimensional());
        assert!(matches!(LNatDomain::new(diagonal), Err(Error::NotFullDimensional(_))));
        // Pinned through a chain of constraints rather than directly.
        let squeezed = ConstraintSystem::new(vec![0, 0], vec![2, 2]).unwrap().with_difference(0, 1, -2).unwrap();
        assert!(!squeezed.is_full_dimensional());
    }

    #[test]
    fn infeasible_system_is_rejected() {
        let sys = square(0, 2).with_difference(0, 1, -3).unwrap();
        assert_eq!(LNatDomain::new(sys), Err(Error::DomainEmpty));
        assert!(ConstraintSystem::new(vec![2], vec![1]).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let k = LNatDomain::new(square(0, 1)).unwrap();
        assert_eq!(k.enumerate().unwrap(), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let k = LNatDomain::new(square(0, 1).with_difference(0, 1, 0).unwrap()).unwrap();
        assert_eq!(k.enumerate().unwrap(), vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        let k = LNatDomain::boxed(vec![0], vec![2]).unwrap();
        assert_eq!(k.enumerate().unwrap(), vec![vec![0], vec![1], vec![2]]);
        let k = LNatDomain::cube(3, 0, 9).unwrap();
        assert_eq!(k.enumerate_with_cap(999), Err(Error::TooLarge { cap: 999 }));
        assert_eq!(k.enumerate_with_cap(1000).unwrap().len(), 1000);
    }

    #[test]
    fn lnatural_set_examples() {
        assert!(verify_lnatural_set(&[vec![0, 0], vec![1, 1]]));
        assert!(!verify_lnatural_set(&[vec![0, 0], vec![1, 1], vec![2, 0]]));
    }

    #[test]
    fn interior_point_has_slack() {
        let sys = ConstraintSystem::new(vec![0, 0, 0], vec![2, 3, 2])
            .unwrap()
            .with_difference(0, 1, 0)
            .unwrap()
            .with_difference(2, 0, 1)
            .unwrap();
        let k = LNatDomain::new(sys).unwrap();
        let c = k.interior_point();
        assert!(k.contains_real(c).unwrap());
        let eps = 1.0 / 8.0;
        for i in 0..3 {
            assert!(c[i] - k.lower()[i] as f64 >= eps && k.upper()[i] as f64 - c[i] >= eps);
        }
        assert!(c[1] - c[0] >= eps && 1.0 - (c[2] - c[0]) >= eps);
    }

    #[test]
    fn real_difference_test_is_exact() {
        let tiny = 2f64.powi(-60);
        assert!(difference_at_most(2.0, 0.0, 2));
        // 2 + 2^-60 rounds to 2 in f64 but exceeds the bound.
        assert!(!difference_at_most(2.0, -tiny, 2));
        assert!(difference_at_most(2.0, tiny, 2));
        assert!(difference_at_most(1.0 - 2f64.powi(-53), -1.0, 2));
        let sys = ConstraintSystem::new(vec![-3, -3], vec![3, 3]).unwrap().with_difference(0, 1, 2).unwrap();
        let k = LNatDomain::new(sys).unwrap();
        assert!(k.contains_real(&[2.0, 0.0]).unwrap());
        assert!(!k.contains_real(&[2.0, -tiny]).unwrap());
    }
}
