//! Maximal chains associated with a point of the convex hull.
//!
//! Given `x` in `conv(K)`, [`maximal_chain`] finds a base point `z` with
//! `z <= x <= z + 1` whose unit cube meets `conv(K)` full-dimensionally, a
//! permutation `pi` compatible with the poset of that cube's lattice, and
//! coefficients `mu` with `x = z + sum_i mu_i chi(A_i)` where
//! `A_i = {pi(1), ..., pi(i)}`.
//!
//! Everything here is exact rational arithmetic: the base point depends on
//! an equality test between `x_i` and a polyhedral maximum.

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::lattice::{LNatDomain, LatticePoint, Refinement};
use crate::rational::{floor_i64, from_int, is_integer, one, Rational};

/// Ordering among poset-available coordinates whose fractional parts tie.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    SmallestIndex,
    LargestIndex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximalChain {
    point: Vec<Rational>,
    base: LatticePoint,
    perm: Vec<usize>,
    coeffs: Vec<Rational>,
}

impl MaximalChain {
    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// The point the chain was built from.
    pub fn point(&self) -> &[Rational] {
        &self.point
    }

    pub fn base(&self) -> &[i64] {
        &self.base
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// `mu_0, ..., mu_d`.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(crate::rational::to_f64).collect()
    }

    /// `A_k = {pi(1), ..., pi(k)}` as 0-based coordinates.
    pub fn set(&self, k: usize) -> &[usize] {
        &self.perm[..k]
    }

    /// `z + chi(A_k)`.
    pub fn vertex(&self, k: usize) -> LatticePoint {
        let mut z = self.base.clone();
        for &i in self.set(k) {
            z[i] += 1;
        }
        z
    }

    /// All `d + 1` chain vertices, bottom to top.
    pub fn vertices(&self) -> Vec<LatticePoint> {
        let mut out = Vec::with_capacity(self.dim() + 1);
        let mut z = self.base.clone();
        out.push(z.clone());
        for &i in &self.perm {
            z[i] += 1;
            out.push(z.clone());
        }
        out
    }

    /// Fractional parts `r_k = x_k - z_k`, each in `[0, 1]`.
    pub fn fractional_parts(&self) -> Vec<Rational> {
        self.point.iter().zip(&self.base).map(|(x, &z)| x - from_int(z)).collect()
    }

    /// Index `k` of the chain vertex equal to `z + chi(S_tau)`.
    pub fn level_index(&self, tau: &Rational) -> usize {
        self.point.iter().zip(&self.base).filter(|(x, &z)| *x - from_int(z) > *tau).count()
    }
}

/// Builds the maximal chain associated with `x` with the default tie-break.
pub fn maximal_chain(domain: &LNatDomain, x: &[Rational]) -> Result<MaximalChain> {
    maximal_chain_with(domain, x, TieBreak::default())
}

pub fn maximal_chain_with(domain: &LNatDomain, x: &[Rational], tie_break: TieBreak) -> Result<MaximalChain> {
    if !domain.contains_rational(x)? {
        return Err(Error::OutOfDomain);
    }
    let d = domain.dim();

    // Base point: walk coordinates, refining the region one unit slab at a time.
    let mut base = Vec::with_capacity(d);
    let mut refinements: Vec<Refinement> = Vec::with_capacity(d);
    for (i, xi) in x.iter().enumerate() {
        let zi = if !is_integer(xi) {
            floor_i64(xi)
        } else {
            let xi = floor_i64(xi);
            if domain.coordinate_max(&refinements, i)? == xi {
                xi - 1
            } else {
                xi
            }
        };
        base.push(zi);
        refinements.push(Refinement { coord: i, lower: zi, upper: zi + 1 });
    }

    // Poset on the cube: (i, j) tight means i in A forces j in A, so j must
    // precede i in the order.
    let mut must_precede: Vec<Vec<usize>> = vec![Vec::new(); d];
    for i in 0..d {
        for j in 0..d {
            if i != j && base[i] - base[j] == domain.tightest_difference(i, j)? {
                must_precede[i].push(j);
            }
        }
    }

    let frac: Vec<Rational> = x.iter().zip(&base).map(|(xi, &zi)| xi - from_int(zi)).collect();
    let perm = topological_order(&must_precede, &frac, tie_break)
        .ok_or_else(|| Error::NotFullDimensional("cube poset has a cycle".into()))?;
    let coeffs = decompose(&base, &perm, x)?;
    Ok(MaximalChain { point: x.to_vec(), base, perm, coeffs })
}

/// Kahn's algorithm choosing, among available coordinates, the largest
/// fractional part. This yields descending fractional parts along the
/// order whenever `x` is feasible.
fn topological_order(must_precede: &[Vec<usize>], frac: &[Rational], tie_break: TieBreak) -> Option<Vec<usize>> {
    let d = must_precede.len();
    let mut placed = vec![false; d];
    let mut order = Vec::with_capacity(d);
    while order.len() < d {
        let mut best: Option<usize> = None;
        for k in 0..d {
            if placed[k] || !must_precede[k].iter().all(|&j| placed[j]) {
                continue;
            }
            best = match best {
                None => Some(k),
                Some(b) if frac[k] > frac[b] => Some(k),
                Some(b) if frac[k] == frac[b] && tie_break == TieBreak::LargestIndex => Some(k),
                keep => keep,
            };
        }
        let k = best?;
        placed[k] = true;
        order.push(k);
    }
    Some(order)
}

/// Coefficients of `x` along the chain given by `base` and `perm`:
/// `mu_0 = 1 - r_pi(1)`, `mu_i = r_pi(i) - r_pi(i+1)`, `mu_d = r_pi(d)`.
pub fn decompose(base: &[i64], perm: &[usize], x: &[Rational]) -> Result<Vec<Rational>> {
    let d = base.len();
    if x.len() != d || perm.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len().min(perm.len()) });
    }
    let mut seen = vec![false; d];
    for &p in perm {
        if p >= d || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidPermutation);
        }
    }
    let r: Vec<Rational> = perm.iter().map(|&k| &x[k] - from_int(base[k])).collect();
    if r.iter().any(|ri| ri.is_negative() || *ri > Rational::one()) {
        return Err(Error::OutOfDomain);
    }
    if r.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidPermutation);
    }
    let mut mu = Vec::with_capacity(d + 1);
    mu.push(one() - &r[0]);
    for w in r.windows(2) {
        mu.push(&w[0] - &w[1]);
    }
    mu.push(r[d - 1].clone());
    Ok(mu)
}

/// `z + chi(S_tau)` with `S_tau = { i : x_i > z_i + tau }`.
pub fn round_by_threshold(chain: &MaximalChain, tau: &Rational) -> LatticePoint {
    chain.point.iter().zip(&chain.base).map(|(x, &z)| if x - from_int(z) > *tau { z + 1 } else { z }).collect()
}
