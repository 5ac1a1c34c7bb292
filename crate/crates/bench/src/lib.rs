//! Fixed instances shared by the benchmarks.

use std::sync::Arc;

use lnat_core::adversaries::{random_lnat_stream, Family, StreamParams};
use lnat_core::lattice::{ConstraintSystem, LNatDomain};
use lnat_core::oracles::random_member;
use lnat_core::rational::{ratio, Rational};
use lnat_core::CostSequence;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `[0, n]^d` with `x_i - x_{i+1} <= 1` for every consecutive pair.
pub fn banded_domain(d: usize, n: i64) -> LNatDomain {
    let mut sys = ConstraintSystem::new(vec![0; d], vec![n; d]).expect("valid bounds");
    for i in 0..d.saturating_sub(1) {
        sys.add_difference(i, i + 1, 1).expect("valid difference");
    }
    LNatDomain::new(sys).expect("full-dimensional")
}

/// The average of a few random members, a generic point of the hull.
pub fn hull_point(domain: &LNatDomain, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<_> = (0..5).map(|_| random_member(domain, &mut rng)).collect();
    (0..domain.dim()).map(|i| ratio(picks.iter().map(|z| z[i]).sum(), picks.len() as i64)).collect()
}

/// Real points spread around and outside the hull.
pub fn outside_points(domain: &LNatDomain, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = domain.width() as f64;
    (0..count).map(|_| (0..domain.dim()).map(|_| rng.gen_range(-width..2.0 * width)).collect()).collect()
}

pub fn mixed_stream(domain: LNatDomain, horizon: usize, seed: u64) -> CostSequence {
    let params = StreamParams { certify: false, ..StreamParams::new(Family::Mixed) };
    random_lnat_stream(Arc::new(domain), &params, horizon, seed).expect("valid stream")
}
