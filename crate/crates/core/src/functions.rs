//! Cost functions assembled from a small vocabulary of terms.
//!
//! A [`FunctionSpec`] is what the command line reads from a file and what
//! the random streams draw. Each term carries analytic bounds on `|f|` and
//! on its ℓ∞-Lipschitz constant over a domain's bounding box, so costs can
//! be declared without enumerating the domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::LatticeFunction;
use crate::lattice::LNatDomain;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    Constant {
        value: f64,
    },
    /// `sum_i c_i z_i`.
    Linear {
        c: Vec<f64>,
    },
    /// `sum_i a_i (z_i - b_i)^2` with `a >= 0`.
    Quadratic {
        a: Vec<f64>,
        b: Vec<f64>,
    },
    /// `weight * max(tau0, s z_1 + tau_1, ..., s z_d + tau_d)` with
    /// `s = -1` when `negate` is set, else `s = 1`.
    MaxComponent {
        weight: f64,
        tau0: f64,
        tau: Vec<f64>,
        #[serde(default)]
        negate: bool,
    },
    /// `coef * z_i * z_j` with 1-based `i`, `j`. Not L♮-convex in general;
    /// useful for exercising the checkers.
    Bilinear {
        coef: f64,
        i: usize,
        j: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FunctionSpec {
    #[serde(rename = "term", default)]
    pub terms: Vec<Term>,
}

fn check_len(name: &str, len: usize, dim: usize) -> Result<()> {
    if len != dim {
        return Err(Error::Parse(format!("{name} has length {len}, domain dimension is {dim}")));
    }
    Ok(())
}

fn check_finite(name: &str, vals: &[f64]) -> Result<()> {
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parse(format!("{name} has a non-finite entry")));
    }
    Ok(())
}

impl Term {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Term::Constant { value } => check_finite("value", &[*value]),
            Term::Linear { c } => {
                check_len("c", c.len(), dim)?;
                check_finite("c", c)
            }
            Term::Quadratic { a, b } => {
                check_len("a", a.len(), dim)?;
                check_len("b", b.len(), dim)?;
                check_finite("a", a)?;
                check_finite("b", b)?;
                if a.iter().any(|&v| v < 0.0) {
                    return Err(Error::Parse("quadratic coefficients must be nonnegative".into()));
                }
                Ok(())
            }
            Term::MaxComponent { weight, tau0, tau, .. } => {
                check_len("tau", tau.len(), dim)?;
                check_finite("tau", tau)?;
                check_finite("weight", &[*weight, *tau0])?;
                if *weight < 0.0 {
                    return Err(Error::Parse("max_component weight must be nonnegative".into()));
                }
                Ok(())
            }
            Term::Bilinear { coef, i, j } => {
                check_finite("coef", &[*coef])?;
                for &k in [i, j] {
                    if k == 0 || k > dim {
                        return Err(Error::Parse(format!("bilinear index {k} outside 1..={dim}")));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, z: &[i64]) -> f64 {
        match self {
            Term::Constant { value } => *value,
            Term::Linear { c } => c.iter().zip(z).map(|(ci, &zi)| ci * zi as f64).sum(),
            Term::Quadratic { a, b } => a
                .iter()
                .zip(b)
                .zip(z)
                .map(|((ai, bi), &zi)| {
                    let r = zi as f64 - bi;
                    ai * r * r
                })
                .sum(),
            Term::MaxComponent { weight, tau0, tau, negate } => {
                let s = if *negate { -1.0 } else { 1.0 };
                let m = tau.iter().zip(z).fold(*tau0, |m, (t, &zi)| m.max(s * zi as f64 + t));
                weight * m
            }
            Term::Bilinear { coef, i, j } => coef * z[i - 1] as f64 * z[j - 1] as f64,
        }
    }

    /// `(M, L̂)` valid on the bounding box of `domain`.
    pub fn bounds(&self, domain: &LNatDomain) -> (f64, f64) {
        let d = domain.dim();
        let lo: Vec<f64> = (0..d).map(|i| domain.coordinate_lower(i) as f64).collect();
        let hi: Vec<f64> = (0..d).map(|i| domain.coordinate_upper(i) as f64).collect();
        let absmax = |i: usize| lo[i].abs().max(hi[i].abs());
        match self {
            Term::Constant { value } => (value.abs(), 0.0),
            Term::Linear { c } => {
                (c.iter().enumerate().map(|(i, ci)| ci.abs() * absmax(i)).sum(), c.iter().map(|ci| ci.abs()).sum())
            }
            Term::Quadratic { a, b } => {
                let mut m = 0.0;
                let mut l = 0.0;
                for i in 0..d {
                    m += a[i] * (lo[i] - b[i]).powi(2).max((hi[i] - b[i]).powi(2));
                    if hi[i] > lo[i] {
                        // Unit steps z -> z + 1 for z in [lo, hi - 1].
                        let first = (2.0 * (lo[i] - b[i]) + 1.0).abs();
                        let last = (2.0 * (hi[i] - 1.0 - b[i]) + 1.0).abs();
                        l += a[i] * first.max(last);
                    }
                }
                (m, l)
            }
            Term::MaxComponent { weight, tau0, tau, negate } => {
                let s = if *negate { -1.0 } else { 1.0 };
                let mut m = tau0.abs();
                for i in 0..d {
                    m = m.max((s * lo[i] + tau[i]).abs()).max((s * hi[i] + tau[i]).abs());
                }
                (weight * m, *weight)
            }
            Term::Bilinear { coef, i, j } => {
                let (ai, aj) = (absmax(i - 1), absmax(j - 1));
                (coef.abs() * ai * aj, coef.abs() * (ai + aj))
            }
        }
    }
}

impl FunctionSpec {
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        self.terms.iter().try_for_each(|t| t.validate(dim))
    }

    /// Sum of per-term `(M, L̂)`.
    pub fn bounds(&self, domain: &LNatDomain) -> (f64, f64) {
        self.terms.iter().map(|t| t.bounds(domain)).fold((0.0, 0.0), |(m, l), (tm, tl)| (m + tm, l + tl))
    }
}

impl LatticeFunction for FunctionSpec {
    fn value(&self, z: &[i64]) -> f64 {
        self.terms.iter().map(|t| t.value(z)).sum()
    }
}
