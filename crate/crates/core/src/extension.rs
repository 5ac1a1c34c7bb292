//! Convex extension of an L♮-convex function and its chain subgradients.

use std::fmt;
use std::sync::Arc;

use crate::chain::MaximalChain;
use crate::error::{Error, Result};
use crate::lattice::{LNatDomain, LatticePoint};
use crate::rational::{from_int, one, to_f64, zero, Rational};

/// A real-valued function on integer points.
///
/// Implementations must be reentrant: experiment runs evaluate shared
/// oracles from several threads.
pub trait LatticeFunction: Send + Sync {
    fn value(&self, z: &[i64]) -> f64;
}

impl<F> LatticeFunction for F
where
    F: Fn(&[i64]) -> f64 + Send + Sync,
{
    fn value(&self, z: &[i64]) -> f64 {
        self(z)
    }
}

/// A cost function on a domain together with its declared bound `M`
/// (`|f| <= M`) and ℓ∞-Lipschitz constant `L̂`.
#[derive(Clone)]
pub struct CostOracle {
    domain: Arc<LNatDomain>,
    function: Arc<dyn LatticeFunction>,
    bound: f64,
    lipschitz: f64,
}

impl fmt::Debug for CostOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CostOracle")
            .field("dim", &self.domain.dim())
            .field("bound", &self.bound)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl CostOracle {
    pub fn new(domain: Arc<LNatDomain>, function: Arc<dyn LatticeFunction>, bound: f64, lipschitz: f64) -> Self {
        Self { domain, function, bound, lipschitz }
    }

    /// Measures `M` and `L̂` by exhaustive scans over the domain.
    pub fn certified(domain: Arc<LNatDomain>, function: Arc<dyn LatticeFunction>) -> Result<Self> {
        let bound = measure_bound(function.as_ref(), &domain)?;
        let lipschitz = certify_lipschitz(function.as_ref(), &domain)?;
        Ok(Self::new(domain, function, bound, lipschitz))
    }

    pub fn domain(&self) -> &LNatDomain {
        &self.domain
    }

    pub fn shared_domain(&self) -> &Arc<LNatDomain> {
        &self.domain
    }

    pub fn function(&self) -> &Arc<dyn LatticeFunction> {
        &self.function
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Evaluates the oracle, rejecting non-finite values.
    pub fn eval(&self, z: &[i64]) -> Result<f64> {
        let v = self.function.value(z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::OracleFailure { point: z.to_vec(), value: v })
        }
    }
}

/// `f(z + chi(A_k))` for `k = 0..=d`.
pub fn chain_values(f: &CostOracle, chain: &MaximalChain) -> Result<Vec<f64>> {
    chain.vertices().iter().map(|z| f.eval(z)).collect()
}

/// `sum_k mu_k f(z + chi(A_k))`; exactly `d + 1` oracle calls.
pub fn extension_value(f: &CostOracle, chain: &MaximalChain) -> Result<f64> {
    let values = chain_values(f, chain)?;
    Ok(extension_from_values(chain, &values))
}

pub fn extension_from_values(chain: &MaximalChain, values: &[f64]) -> f64 {
    chain.coeffs().iter().zip(values).map(|(mu, v)| to_f64(mu) * v).sum()
}

/// `g_{pi(i)} = f(z + chi(A_i)) - f(z + chi(A_{i-1}))`.
pub fn subgradient(f: &CostOracle, chain: &MaximalChain) -> Result<Vec<f64>> {
    let values = chain_values(f, chain)?;
    Ok(subgradient_from_values(chain, &values))
}

pub fn subgradient_from_values(chain: &MaximalChain, values: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; chain.dim()];
    for (i, &coord) in chain.perm().iter().enumerate() {
        g[coord] = values[i + 1] - values[i];
    }
    g
}

/// `E_tau[f(z + chi(S_tau))]` for `tau ~ U[0, 1]`, integrated exactly over
/// the breakpoints of the piecewise-constant integrand.
///
/// Works from the chain's point and base only: each segment between
/// consecutive distinct fractional parts is probed at its midpoint.
pub fn expected_rounding_value(f: &CostOracle, chain: &MaximalChain) -> Result<f64> {
    let x = chain.point();
    let z = chain.base();
    let mut cuts: Vec<Rational> = x.iter().zip(z).map(|(xi, &zi)| xi - from_int(zi)).collect();
    cuts.push(zero());
    cuts.push(one());
    cuts.sort();
    cuts.dedup();
    let two = from_int(2);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let mid = (lo + hi) / &two;
        let level: LatticePoint =
            x.iter().zip(z).map(|(xi, &zi)| if xi > &(from_int(zi) + &mid) { zi + 1 } else { zi }).collect();
        total += to_f64(&(hi - lo)) * f.eval(&level)?;
    }
    Ok(total)
}

/// `max |f|` over the domain.
pub fn measure_bound(f: &dyn LatticeFunction, domain: &LNatDomain) -> Result<f64> {
    let mut m = 0.0f64;
    for z in domain.enumerate()? {
        m = m.max(f.value(&z).abs());
    }
    Ok(m)
}

/// ℓ∞-Lipschitz constant from exhaustive neighbor differences: the largest
/// `|f(z') - f(z)|` over members `z, z'` with `||z - z'||_∞ = 1`.
pub fn certify_lipschitz(f: &dyn LatticeFunction, domain: &LNatDomain) -> Result<f64> {
    let points = domain.enumerate()?;
    let d = domain.dim();
    let steps = 3usize.pow(d as u32);
    let mut best = 0.0f64;
    let mut nb = vec![0i64; d];
    for z in &points {
        let fz = f.value(z);
        for code in 1..steps {
            // Offsets in {-1, 0, 1}^d, skipping the all-zero code.
            let mut c = code;
            for k in 0..d {
                nb[k] = z[k] + (c % 3) as i64 - 1;
                c /= 3;
            }
            if nb == *z || !domain.contains(&nb)? {
                continue;
            }
            best = best.max((f.value(&nb) - fz).abs());
        }
    }
    Ok(best)
}
