//! Euclidean projection onto the hull of a domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LNatDomain;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionConfig {
    /// Change between successive sweeps, iterate and corrections together,
    /// at which iteration stops.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_sweeps: 100_000 }
    }
}

impl ProjectionConfig {
    pub fn new(tolerance: f64, max_sweeps: usize) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::InvalidArgument(format!("projection tolerance must be positive, got {tolerance}")));
        }
        if max_sweeps == 0 {
            return Err(Error::InvalidArgument("max_sweeps must be at least 1".into()));
        }
        Ok(Self { tolerance, max_sweeps })
    }
}

/// Componentwise clamp of `y` into `[lower, upper]`.
pub fn project_box(y: &[f64], lower: &[i64], upper: &[i64]) -> Vec<f64> {
    y.iter().zip(lower.iter().zip(upper)).map(|(&v, (&lo, &hi))| v.clamp(lo as f64, hi as f64)).collect()
}

#[derive(Debug, Clone, Copy)]
enum HalfSpace {
    Upper(usize, f64),
    Lower(usize, f64),
    /// `x_i - x_j <= b`.
    Diff(usize, usize, f64),
}

fn half_spaces(domain: &LNatDomain) -> Vec<HalfSpace> {
    let mut hs = Vec::new();
    for i in 0..domain.dim() {
        hs.push(HalfSpace::Upper(i, domain.upper()[i] as f64));
        hs.push(HalfSpace::Lower(i, domain.lower()[i] as f64));
    }
    for (i, j, g) in domain.system().differences() {
        hs.push(HalfSpace::Diff(i, j, g as f64));
    }
    hs
}

/// Projection of `y` onto `conv(K)`.
///
/// Box domains are clamped. Otherwise Dykstra's method cycles through
/// the bound and difference half-spaces in a fixed order. The constraints
/// active at its output are then solved as equalities, which is kept when the
/// multipliers certify it as the projection. Finally the result is pulled
/// toward the domain's interior point just far enough to satisfy every
/// inequality exactly.
pub fn project(domain: &LNatDomain, y: &[f64], cfg: &ProjectionConfig) -> Result<Vec<f64>> {
    if y.len() != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), got: y.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("projection input has a non-finite coordinate".into()));
    }
    if domain.is_box() {
        return Ok(project_box(y, domain.lower(), domain.upper()));
    }
    if domain.contains_real(y)? {
        return Ok(y.to_vec());
    }
    let x = dykstra(domain, y, cfg)?;
    let x = polish(domain, y, x, cfg);
    nudge_inside(domain, x)
}

impl HalfSpace {
    /// Normal vector and offset of `a . x <= b`.
    fn row(&self, d: usize) -> (Vec<f64>, f64) {
        let mut a = vec![0.0; d];
        let b = match *self {
            HalfSpace::Upper(i, b) => {
                a[i] = 1.0;
                b
            }
            HalfSpace::Lower(i, b) => {
                a[i] = -1.0;
                -b
            }
            HalfSpace::Diff(i, j, b) => {
                a[i] = 1.0;
                a[j] = -1.0;
                b
            }
        };
        (a, b)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Largest number of nearly active rows whose subsets are searched.
const POLISH_SUBSET_LIMIT: usize = 12;

/// Replaces `x` with the exact solution of an equality system built from
/// the constraints nearly active at `x`, when that solution is feasible and
/// has nonnegative multipliers (which certifies it as the projection).
/// The greedy independent subset is tried first, then every small subset.
fn polish(domain: &LNatDomain, y: &[f64], x: Vec<f64>, cfg: &ProjectionConfig) -> Vec<f64> {
    let d = domain.dim();
    let near = (1e3 * cfg.tolerance).max(1e-7);
    let active: Vec<(Vec<f64>, f64)> =
        half_spaces(domain).iter().map(|h| h.row(d)).filter(|(a, b)| dot(a, &x) >= b - near).collect();
    if active.is_empty() {
        return x;
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut greedy = Vec::new();
    for (k, (a, _)) in active.iter().enumerate() {
        let mut r = a.clone();
        for q in &basis {
            let c = dot(&r, q);
            r.iter_mut().zip(q).for_each(|(v, w)| *v -= c * w);
        }
        let n = dot(&r, &r).sqrt();
        if n > 1e-9 {
            basis.push(r.into_iter().map(|v| v / n).collect());
            greedy.push(k);
        }
    }
    if let Some(z) = certified_solution(domain, y, &active, &greedy, cfg) {
        return z;
    }
    if active.len() <= POLISH_SUBSET_LIMIT {
        for mask in 1u32..(1 << active.len()) {
            if mask.count_ones() as usize > d {
                continue;
            }
            let rows: Vec<usize> = (0..active.len()).filter(|k| mask >> k & 1 == 1).collect();
            if let Some(z) = certified_solution(domain, y, &active, &rows, cfg) {
                return z;
            }
        }
    }
    x
}

fn certified_solution(
    domain: &LNatDomain,
    y: &[f64],
    active: &[(Vec<f64>, f64)],
    rows: &[usize],
    cfg: &ProjectionConfig,
) -> Option<Vec<f64>> {
    let m = rows.len();
    let mut g: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| {
            let (a, b) = &active[r];
            let mut line: Vec<f64> = rows.iter().map(|&c| dot(a, &active[c].0)).collect();
            line.push(dot(a, y) - b);
            line
        })
        .collect();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| g[i][col].abs().total_cmp(&g[j][col].abs()))?;
        g.swap(col, piv);
        if g[col][col].abs() < 1e-12 {
            return None;
        }
        for r in 0..m {
            if r != col {
                let f = g[r][col] / g[col][col];
                for c in col..=m {
                    g[r][c] -= f * g[col][c];
                }
            }
        }
    }
    let mut z = y.to_vec();
    for (i, &r) in rows.iter().enumerate() {
        let lambda = g[i][m] / g[i][i];
        if lambda < -cfg.tolerance {
            return None;
        }
        z.iter_mut().zip(&active[r].0).for_each(|(v, w)| *v -= lambda * w);
    }
    (domain.max_violation(&z) <= cfg.tolerance).then_some(z)
}

fn dykstra(domain: &LNatDomain, y: &[f64], cfg: &ProjectionConfig) -> Result<Vec<f64>> {
    let hs = half_spaces(domain);
    // Each correction is a multiple of the half-space normal, so one scalar
    // per constraint suffices.
    let mut corr = vec![0.0f64; hs.len()];
    let mut x = y.to_vec();
    let mut prev = x.clone();
    let mut prev_corr = corr.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_sweeps {
        prev.copy_from_slice(&x);
        prev_corr.copy_from_slice(&corr);
        for (h, q) in hs.iter().zip(corr.iter_mut()) {
            match *h {
                HalfSpace::Upper(i, b) => {
                    let u = x[i] + *q;
                    x[i] = u.min(b);
                    *q = u - x[i];
                }
                HalfSpace::Lower(i, b) => {
                    let u = x[i] - *q;
                    x[i] = u.max(b);
                    *q = x[i] - u;
                }
                HalfSpace::Diff(i, j, b) => {
                    let ui = x[i] + *q;
                    let uj = x[j] - *q;
                    let t = ((ui - uj - b) / 2.0).max(0.0);
                    x[i] = ui - t;
                    x[j] = uj + t;
                    *q = t;
                }
            }
        }
        // The iterate can repeat while the corrections still drift, so both count.
        let moved: f64 = x.iter().zip(&prev).map(|(a, b)| (a - b) * (a - b)).sum();
        let drift: f64 = corr.iter().zip(&prev_corr).map(|(a, b)| (a - b) * (a - b)).sum();
        residual = (moved + drift).sqrt();
        if residual <= cfg.tolerance && domain.max_violation(&x) <= cfg.tolerance {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence { sweeps: cfg.max_sweeps, residual })
}

/// Moves `x` along the segment toward the interior point until it is
/// exactly feasible. The interior point has slack at least `1/2^k` on
/// every inequality, so a step of order `violation * 2^k` suffices.
fn nudge_inside(domain: &LNatDomain, x: Vec<f64>) -> Result<Vec<f64>> {
    if domain.contains_real(&x)? {
        return Ok(x);
    }
    let c = domain.interior_point();
    let mut lambda = 2f64.powi(-40);
    while lambda < 1.0 {
        let moved: Vec<f64> = x.iter().zip(c).map(|(&xi, &ci)| xi + lambda * (ci - xi)).collect();
        if domain.contains_real(&moved)? {
            return Ok(moved);
        }
        lambda *= 2.0;
    }
    Ok(c.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ConstraintSystem;

    fn chain_domain() -> LNatDomain {
        // y_0 <= y_1 on [0,2]^2.
        LNatDomain::new(ConstraintSystem::new(vec![0, 0], vec![2, 2]).unwrap().with_difference(0, 1, 0).unwrap())
            .unwrap()
    }

    #[test]
    fn clamp_example() {
        assert_eq!(project_box(&[4.2, 0.5, 2.0], &[1, 1, 1], &[3, 3, 3]), vec![3.0, 1.0, 2.0]);
        assert_eq!(project_box(&[1.0, 3.0], &[1, 1], &[3, 3]), vec![1.0, 3.0]);
    }

    #[test]
    fn half_plane_example() {
        let k = chain_domain();
        let x = project(&k, &[2.0, 0.0], &ProjectionConfig::default()).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
        assert!(k.contains_real(&x).unwrap());
    }

    #[test]
    fn feasible_input_is_fixed() {
        let k = chain_domain();
        assert_eq!(project(&k, &[0.25, 1.5], &ProjectionConfig::default()).unwrap(), vec![0.25, 1.5]);
    }

    #[test]
    fn box_domain_delegates_to_clamp() {
        let k = LNatDomain::cube(3, 0, 2).unwrap();
        let y = [-1.0, 2.5, 0.75];
        assert_eq!(project(&k, &y, &ProjectionConfig::default()).unwrap(), project_box(&y, k.lower(), k.upper()));
    }

    #[test]
    fn sweep_cap_reports_residual() {
        let sys = ConstraintSystem::new(vec![0, 0, 0], vec![4, 4, 4])
            .unwrap()
            .with_difference(0, 1, 0)
            .unwrap()
            .with_difference(1, 2, 0)
            .unwrap();
        let k = LNatDomain::new(sys).unwrap();
        let cfg = ProjectionConfig::new(1e-300, 1).unwrap();
        match project(&k, &[4.0, 2.0, 0.0], &cfg) {
            Err(Error::NonConvergence { sweeps: 1, residual }) => assert!(residual > 0.0),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(ProjectionConfig::new(0.0, 10).is_err());
        assert!(ProjectionConfig::new(1e-9, 0).is_err());
    }
}
