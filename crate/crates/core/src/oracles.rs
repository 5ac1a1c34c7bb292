//! Brute-force and property checks used to certify the rest of the crate
//! on small instances, plus seeded generators of random instances.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::Serialize;

use crate::chain::maximal_chain;
use crate::error::{Error, Result};
use crate::extension::{chain_values, extension_from_values, subgradient_from_values, CostOracle, LatticeFunction};
use crate::functions::{FunctionSpec, Term};
use crate::lattice::{ConstraintSystem, LNatDomain, LatticePoint};
use crate::rational::{from_int, ratio, to_f64, Rational};
use crate::solvers::{bandit_estimate, sampling_probabilities};

/// Absolute tolerance for real-valued checks.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Pair {
        x: LatticePoint,
        y: LatticePoint,
    },
    /// A lattice point `y` violating an inequality anchored at `x`.
    Point {
        x: Vec<String>,
        y: LatticePoint,
    },
    Outcomes {
        rows: Vec<Outcome>,
    },
}

/// One atom of the bandit estimator's distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub index: usize,
    pub sign: Option<i8>,
    pub probability: f64,
    pub estimate: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    /// Worst violation found; the check passes iff `metric <= tolerance`.
    pub metric: f64,
    pub tolerance: f64,
    pub witness: Option<Witness>,
    pub details: BTreeMap<String, f64>,
}

impl CheckReport {
    fn new(metric: f64, tolerance: f64, witness: Option<Witness>) -> Self {
        let passed = metric <= tolerance;
        Self { passed, metric, tolerance, witness: if passed { None } else { witness }, details: BTreeMap::new() }
    }
}

/// Exact minimizer over `K`; the first minimizer in lexicographic order wins.
pub fn brute_force_min(f: &dyn LatticeFunction, domain: &LNatDomain) -> Result<(LatticePoint, f64)> {
    let mut best: Option<(LatticePoint, f64)> = None;
    for z in domain.enumerate()? {
        let v = f.value(&z);
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((z, v));
        }
    }
    best.ok_or(Error::DomainEmpty)
}

fn midpoints(p: &[i64], q: &[i64]) -> (LatticePoint, LatticePoint) {
    let up = p.iter().zip(q).map(|(a, b)| (a + b + 1).div_euclid(2)).collect();
    let down = p.iter().zip(q).map(|(a, b)| (a + b).div_euclid(2)).collect();
    (up, down)
}

struct MidpointScan {
    worst: f64,
    witness: Option<Witness>,
    pairs: usize,
}

impl MidpointScan {
    fn new() -> Self {
        Self { worst: f64::NEG_INFINITY, witness: None, pairs: 0 }
    }

    fn visit(&mut self, p: &[i64], q: &[i64], fp: f64, fq: f64, mid: Option<(f64, f64)>) {
        self.pairs += 1;
        let gap = match mid {
            Some((fu, fd)) => fu + fd - fp - fq,
            // A rounded midpoint outside K means the set itself is not L♮.
            None => f64::INFINITY,
        };
        if gap > self.worst {
            self.worst = gap;
            self.witness = Some(Witness::Pair { x: p.to_vec(), y: q.to_vec() });
        }
    }

    fn report(self) -> CheckReport {
        let mut r = CheckReport::new(self.worst.max(0.0), CHECK_TOLERANCE, self.witness);
        r.details.insert("pairs".into(), self.pairs as f64);
        r
    }
}

/// Discrete midpoint convexity over every pair of members of `K`.
pub fn check_midpoint_convexity(f: &dyn LatticeFunction, domain: &LNatDomain) -> Result<CheckReport> {
    let points = domain.enumerate()?;
    let values: Vec<f64> = points.iter().map(|z| f.value(z)).collect();
    let index: HashMap<&[i64], usize> = points.iter().enumerate().map(|(k, z)| (z.as_slice(), k)).collect();
    let mut scan = MidpointScan::new();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let (up, down) = midpoints(&points[a], &points[b]);
            let mid = match (index.get(up.as_slice()), index.get(down.as_slice())) {
                (Some(&u), Some(&d)) => Some((values[u], values[d])),
                _ => None,
            };
            scan.visit(&points[a], &points[b], values[a], values[b], mid);
        }
    }
    Ok(scan.report())
}

/// Midpoint convexity on `samples` random pairs, for domains too large to
/// scan pairwise.
pub fn check_midpoint_convexity_sampled<R: Rng>(
    f: &dyn LatticeFunction,
    domain: &LNatDomain,
    samples: usize,
    rng: &mut R,
) -> Result<CheckReport> {
    let mut scan = MidpointScan::new();
    for _ in 0..samples {
        let p = random_member(domain, rng);
        let q = random_member(domain, rng);
        let (up, down) = midpoints(&p, &q);
        let mid =
            if domain.contains(&up)? && domain.contains(&down)? { Some((f.value(&up), f.value(&down))) } else { None };
        scan.visit(&p, &q, f.value(&p), f.value(&q), mid);
    }
    Ok(scan.report())
}

fn rational_strings(x: &[Rational]) -> Vec<String> {
    x.iter().map(|v| v.to_string()).collect()
}

/// `f(y) >= f̂(x) + g.(y - x)` for every `y` in `K`.
pub fn check_subgradient(f: &CostOracle, x: &[Rational]) -> Result<CheckReport> {
    let chain = maximal_chain(f.domain(), x)?;
    let values = chain_values(f, &chain)?;
    let fx = extension_from_values(&chain, &values);
    let g = subgradient_from_values(&chain, &values);
    let xf: Vec<f64> = x.iter().map(to_f64).collect();
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    for y in f.domain().enumerate()? {
        let lin: f64 = g.iter().zip(y.iter().zip(&xf)).map(|(gi, (&yi, xi))| gi * (yi as f64 - xi)).sum();
        let gap = fx + lin - f.eval(&y)?;
        if gap > worst {
            worst = gap;
            witness = Some(Witness::Point { x: rational_strings(x), y });
        }
    }
    Ok(CheckReport::new(worst.max(0.0), CHECK_TOLERANCE, witness))
}

fn normalized(value: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        value / bound
    } else if value <= CHECK_TOLERANCE {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Exact first and second moments of the bandit estimator at `x`.
///
/// The metric is the largest of the normalized quantities
/// `|E[ĝ] - g|_∞ / 1e-9`, `E|ĝ|² / (16 M² d² / δ)` and
/// `|E f(z) - f̂(x)| / (2 δ M)`, so the check passes iff each is at most 1.
pub fn check_estimator_moments(f: &CostOracle, x: &[Rational], delta: f64) -> Result<CheckReport> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1], got {delta}")));
    }
    let chain = maximal_chain(f.domain(), x)?;
    let d = chain.dim();
    let values = chain_values(f, &chain)?;
    let g = subgradient_from_values(&chain, &values);
    let fhat = extension_from_values(&chain, &values);
    let rho = sampling_probabilities(&chain.coeffs_f64(), delta);

    let mut rows = Vec::new();
    for i in 0..=d {
        if i == 0 || i == d {
            rows.push(Outcome {
                index: i,
                sign: None,
                probability: rho[i],
                estimate: bandit_estimate(chain.perm(), i, true, values[i], &rho),
            });
        } else {
            for (sign, positive) in [(1i8, true), (-1i8, false)] {
                rows.push(Outcome {
                    index: i,
                    sign: Some(sign),
                    probability: rho[i] / 2.0,
                    estimate: bandit_estimate(chain.perm(), i, positive, values[i], &rho),
                });
            }
        }
    }

    let mut mean = vec![0.0; d];
    let mut second = 0.0;
    for r in &rows {
        for (m, e) in mean.iter_mut().zip(&r.estimate) {
            *m += r.probability * e;
        }
        second += r.probability * r.estimate.iter().map(|e| e * e).sum::<f64>();
    }
    let bias = mean.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let played_mean: f64 = rho.iter().zip(&values).map(|(p, v)| p * v).sum();
    let gap = (played_mean - fhat).abs();
    let m = f.bound();
    let moment_bound = 16.0 * m * m * (d * d) as f64 / delta;
    let gap_bound = 2.0 * delta * m;

    let metric = (bias / CHECK_TOLERANCE).max(normalized(second, moment_bound)).max(normalized(gap, gap_bound));
    let mut report = CheckReport::new(metric, 1.0, Some(Witness::Outcomes { rows }));
    report.details.insert("bias".into(), bias);
    report.details.insert("second_moment".into(), second);
    report.details.insert("second_moment_bound".into(), moment_bound);
    report.details.insert("surrogate_gap".into(), gap);
    report.details.insert("surrogate_gap_bound".into(), gap_bound);
    Ok(report)
}

/// Uniformly random member of `K` by coordinate-wise sampling within the
/// closed distance bounds (not uniform over `K` unless it is a box).
pub fn random_member<R: Rng>(domain: &LNatDomain, rng: &mut R) -> LatticePoint {
    let d = domain.dim();
    let mut z: Vec<i64> = Vec::with_capacity(d);
    for k in 0..d {
        let mut lo = domain.coordinate_lower(k);
        let mut hi = domain.coordinate_upper(k);
        for (j, &zj) in z.iter().enumerate() {
            lo = lo.max(zj - domain.tightest_difference(j, k).expect("valid indices"));
            hi = hi.min(zj + domain.tightest_difference(k, j).expect("valid indices"));
        }
        z.push(rng.gen_range(lo..=hi));
    }
    z
}

/// Shape of random domains drawn by [`random_domain`].
#[derive(Debug, Clone, Copy)]
pub struct DomainShape {
    pub max_dim: usize,
    pub max_width: i64,
    /// Chance that each ordered pair gets a difference constraint.
    pub difference_probability: f64,
    pub max_points: usize,
}

impl Default for DomainShape {
    fn default() -> Self {
        Self { max_dim: 3, max_width: 3, difference_probability: 0.3, max_points: 10_000 }
    }
}

/// A random full-dimensional domain with at most `shape.max_points` points.
pub fn random_domain<R: Rng>(shape: &DomainShape, rng: &mut R) -> LNatDomain {
    loop {
        let d = rng.gen_range(1..=shape.max_dim);
        let lower: Vec<i64> = (0..d).map(|_| rng.gen_range(-2..=2)).collect();
        let upper: Vec<i64> = lower.iter().map(|l| l + rng.gen_range(1..=shape.max_width)).collect();
        let Ok(mut sys) = ConstraintSystem::new(lower.clone(), upper.clone()) else { continue };
        for i in 0..d {
            for j in 0..d {
                if i != j && rng.gen_bool(shape.difference_probability) {
                    let g = rng.gen_range(lower[i] - upper[j] + 1..=upper[i] - lower[j]);
                    sys.add_difference(i, j, g).expect("off-diagonal");
                }
            }
        }
        if let Ok(k) = LNatDomain::new(sys) {
            if k.enumerate_with_cap(shape.max_points).is_ok() {
                return k;
            }
        }
    }
}

/// A random L♮-convex function on `domain`: a separable quadratic plus a
/// plain and a negated maximum-component term plus a linear term.
pub fn random_lnat_function<R: Rng>(domain: &LNatDomain, rng: &mut R) -> FunctionSpec {
    let d = domain.dim();
    let w = domain.width() as f64;
    let lo: Vec<f64> = (0..d).map(|i| domain.coordinate_lower(i) as f64).collect();
    let hi: Vec<f64> = (0..d).map(|i| domain.coordinate_upper(i) as f64).collect();
    let mut terms = vec![Term::Quadratic {
        a: (0..d).map(|_| rng.gen_range(0.0..1.0)).collect(),
        b: (0..d).map(|i| rng.gen_range(lo[i]..=hi[i])).collect(),
    }];
    for negate in [false, true] {
        terms.push(Term::MaxComponent {
            weight: rng.gen_range(0.0..2.0),
            tau0: rng.gen_range(-w..=w),
            tau: (0..d).map(|_| rng.gen_range(-w..=w)).collect(),
            negate,
        });
    }
    terms.push(Term::Linear { c: (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect() });
    FunctionSpec::new(terms)
}

/// A random point of `conv(K)`: a lattice point, or a convex combination
/// of lattice points with small-denominator rational weights.
pub fn random_hull_point<R: Rng>(domain: &LNatDomain, rng: &mut R) -> Vec<Rational> {
    let d = domain.dim();
    let as_rational = |z: &[i64]| z.iter().map(|&v| from_int(v)).collect::<Vec<_>>();
    match rng.gen_range(0..4) {
        0 => as_rational(&random_member(domain, rng)),
        1 => {
            // A corner: greedily push each coordinate to its extreme.
            let mut z = random_member(domain, rng);
            for k in 0..d {
                let up = rng.gen_bool(0.5);
                loop {
                    let mut next = z.clone();
                    next[k] += if up { 1 } else { -1 };
                    if !domain.contains(&next).expect("dimension matches") {
                        break;
                    }
                    z = next;
                }
            }
            as_rational(&z)
        }
        _ => {
            let parts = rng.gen_range(2..=d + 2);
            let den: i64 = [2, 3, 4, 6, 8, 16, 1024][rng.gen_range(0..7)];
            let mut weights: Vec<i64> = vec![0; parts];
            for _ in 0..den {
                weights[rng.gen_range(0..parts)] += 1;
            }
            let mut x = vec![from_int(0); d];
            for &wk in &weights {
                let z = random_member(domain, rng);
                for k in 0..d {
                    x[k] += ratio(wk * z[k], den);
                }
            }
            x
        }
    }
}
