//! Projected-subgradient learners for full-information and bandit feedback.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversaries::CostSequence;
use crate::chain::{maximal_chain, round_by_threshold, MaximalChain};
use crate::error::{Error, Result};
use crate::extension::{chain_values, subgradient_from_values, CostOracle};
use crate::lattice::{LNatDomain, LatticePoint, DEFAULT_ENUMERATION_CAP};
use crate::projection::{project, ProjectionConfig};
use crate::rational::{from_f64, vec_from_f64};
use crate::trace::{RegretTrace, RoundRecord, TraceMeta};

/// RNG stream used by learners.
pub const LEARNER_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Full,
    Bandit,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Algorithm::Full),
            "bandit" => Ok(Algorithm::Bandit),
            other => Err(Error::Parse(format!("unknown algorithm {other:?}, expected full or bandit"))),
        }
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

fn require_positive_int(name: &str, v: u64) -> Result<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive")))
    }
}

/// `sqrt(d N^2 / (T (1.5 L̂)^2))`.
pub fn theoretical_eta(d: usize, n: i64, horizon: usize, lipschitz: f64) -> Result<f64> {
    require_positive_int("d", d as u64)?;
    require_positive("N", n as f64)?;
    require_positive_int("T", horizon as u64)?;
    require_positive("L", lipschitz)?;
    let nn = (n * n) as f64;
    Ok((d as f64 * nn / (horizon as f64 * (1.5 * lipschitz).powi(2))).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BanditParams {
    pub eta: f64,
    pub delta: f64,
    /// Set when `d / T^(1/3)` exceeded 1 and was clamped.
    pub clamped: bool,
}

/// `delta = min(1, d / T^(1/3))`, `eta = N / (4 M T^(2/3))`.
pub fn theoretical_bandit_params(d: usize, n: i64, horizon: usize, bound: f64) -> Result<BanditParams> {
    require_positive_int("d", d as u64)?;
    require_positive("N", n as f64)?;
    require_positive_int("T", horizon as u64)?;
    require_positive("M", bound)?;
    let t = horizon as f64;
    let raw = d as f64 / t.cbrt();
    Ok(BanditParams { eta: n as f64 / (4.0 * bound * t.cbrt().powi(2)), delta: raw.min(1.0), clamped: raw > 1.0 })
}

/// `0.75 N L̂ sqrt(d T)`.
pub fn full_info_bound(d: usize, n: i64, horizon: usize, lipschitz: f64) -> f64 {
    0.75 * n as f64 * lipschitz * ((d * horizon) as f64).sqrt()
}

/// `6 d N M T^(2/3)`.
pub fn bandit_bound(d: usize, n: i64, horizon: usize, bound: f64) -> f64 {
    6.0 * d as f64 * n as f64 * bound * (horizon as f64).cbrt().powi(2)
}

/// `rho_i = (1 - delta) mu_i + delta / (d + 1)`.
pub fn sampling_probabilities(mu: &[f64], delta: f64) -> Vec<f64> {
    let uniform = delta / mu.len() as f64;
    mu.iter().map(|m| (1.0 - delta) * m + uniform).collect()
}

/// The bandit gradient estimate after playing chain vertex `index` and
/// observing `value`. `positive` is the Rademacher sign, consulted only for
/// interior indices.
pub fn bandit_estimate(perm: &[usize], index: usize, positive: bool, value: f64, rho: &[f64]) -> Vec<f64> {
    let d = perm.len();
    let mut g = vec![0.0; d];
    if index == 0 {
        g[perm[0]] = -value / rho[0];
    } else if index == d {
        g[perm[d - 1]] = value / rho[d];
    } else if positive {
        g[perm[index - 1]] = 2.0 * value / rho[index];
    } else {
        g[perm[index]] = -2.0 * value / rho[index];
    }
    g
}

/// `(lower + upper) / 2` projected onto the hull.
pub fn initial_point(domain: &LNatDomain, cfg: &ProjectionConfig) -> Result<Vec<f64>> {
    let mid: Vec<f64> = domain.lower().iter().zip(domain.upper()).map(|(&l, &u)| (l as f64 + u as f64) / 2.0).collect();
    project(domain, &mid, cfg)
}

#[derive(Debug, Clone)]
pub struct LearnerState {
    pub x: Vec<f64>,
    pub eta: f64,
    /// Exploration rate; unused by the full-information learner.
    pub delta: f64,
    pub rng: ChaCha8Rng,
    pub round: usize,
}

impl LearnerState {
    pub fn new(x: Vec<f64>, eta: f64, delta: f64, seed: u64) -> Result<Self> {
        require_positive("eta", eta)?;
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidArgument(format!("delta must lie in [0, 1], got {delta}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(LEARNER_STREAM);
        Ok(Self { x, eta, delta, rng, round: 0 })
    }

    fn chain(&self, domain: &LNatDomain) -> Result<MaximalChain> {
        maximal_chain(domain, &vec_from_f64(&self.x)?)
    }

    fn update(&mut self, domain: &LNatDomain, g: &[f64], cfg: &ProjectionConfig) -> Result<()> {
        let y: Vec<f64> = self.x.iter().zip(g).map(|(x, gi)| x - self.eta * gi).collect();
        self.x = project(domain, &y, cfg)?;
        self.round += 1;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub played: LatticePoint,
    pub loss: f64,
    /// The exact subgradient in full information, the estimate in bandit.
    pub estimate: Vec<f64>,
}

/// Plays the threshold rounding of `x_t` at a uniform `tau`, then steps
/// along the exact chain subgradient. Consumes one `f64` from the stream.
pub fn full_info_step(state: &mut LearnerState, f: &CostOracle, cfg: &ProjectionConfig) -> Result<RoundOutcome> {
    let tau: f64 = state.rng.gen();
    let chain = state.chain(f.domain())?;
    let played = round_by_threshold(&chain, &from_f64(tau)?);
    let values = chain_values(f, &chain)?;
    // The played point is a chain vertex, so its value is already known.
    let loss = values[chain.level_index(&from_f64(tau)?)];
    let g = subgradient_from_values(&chain, &values);
    state.update(f.domain(), &g, cfg)?;
    Ok(RoundOutcome { played, loss, estimate: g })
}

/// Samples a chain vertex, queries `f` there once, and steps along the
/// importance-weighted estimate. Consumes one `f64` for the vertex and, for
/// interior vertices only, one `bool` for the sign.
pub fn bandit_step(state: &mut LearnerState, f: &CostOracle, cfg: &ProjectionConfig) -> Result<RoundOutcome> {
    let chain = state.chain(f.domain())?;
    let rho = sampling_probabilities(&chain.coeffs_f64(), state.delta);
    let u: f64 = state.rng.gen();
    let d = chain.dim();
    let mut index = d;
    let mut acc = 0.0;
    for (i, p) in rho.iter().enumerate() {
        acc += p;
        if u < acc {
            index = i;
            break;
        }
    }
    let positive = if index > 0 && index < d { state.rng.gen::<bool>() } else { true };
    let played = chain.vertex(index);
    let loss = f.eval(&played)?;
    let g = bandit_estimate(chain.perm(), index, positive, loss, &rho);
    state.update(f.domain(), &g, cfg)?;
    Ok(RoundOutcome { played, loss, estimate: g })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOptions {
    pub algorithm: Algorithm,
    /// Overrides the theoretical step size.
    pub eta: Option<f64>,
    /// Overrides the theoretical exploration rate (bandit only).
    pub delta: Option<f64>,
    pub projection: ProjectionConfig,
    /// Overrides the projected box midpoint.
    pub x1: Option<Vec<f64>>,
    pub regret_per_round: bool,
    pub enumeration_cap: usize,
}

impl ExperimentOptions {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            eta: None,
            delta: None,
            projection: ProjectionConfig::default(),
            x1: None,
            regret_per_round: false,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Resolved step parameters and the matching regret bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedParams {
    pub eta: f64,
    pub delta: Option<f64>,
    pub delta_clamped: bool,
    pub theoretical_bound: f64,
}

/// Step parameters for a run. A zero `L̂` (full) or `M` (bandit) means
/// every gradient vanishes, so any step size is equivalent; 1 is used.
pub fn resolve_params(opts: &ExperimentOptions, seq: &CostSequence) -> Result<ResolvedParams> {
    let d = seq.domain().dim();
    let n = seq.domain().width();
    let t = seq.horizon();
    match opts.algorithm {
        Algorithm::Full => {
            let l = seq.lipschitz();
            let eta = match opts.eta {
                Some(e) => e,
                None if l > 0.0 => theoretical_eta(d, n, t, l)?,
                None => 1.0,
            };
            require_positive("eta", eta)?;
            Ok(ResolvedParams {
                eta,
                delta: None,
                delta_clamped: false,
                theoretical_bound: full_info_bound(d, n, t, l),
            })
        }
        Algorithm::Bandit => {
            let m = seq.bound();
            let theory = if m > 0.0 { Some(theoretical_bandit_params(d, n, t, m)?) } else { None };
            let eta = opts.eta.or(theory.map(|p| p.eta)).unwrap_or(1.0);
            let (delta, clamped) = match opts.delta {
                Some(v) => (v, false),
                None => match theory {
                    Some(p) => (p.delta, p.clamped),
                    None => ((d as f64 / (t as f64).cbrt()).min(1.0), d as f64 / (t as f64).cbrt() > 1.0),
                },
            };
            require_positive("eta", eta)?;
            if !(delta > 0.0 && delta <= 1.0) {
                return Err(Error::InvalidArgument(format!("delta must lie in (0, 1], got {delta}")));
            }
            Ok(ResolvedParams {
                eta,
                delta: Some(delta),
                delta_clamped: clamped,
                theoretical_bound: bandit_bound(d, n, t, m),
            })
        }
    }
}

/// Runs one learner against `seq` and records the regret against the best
/// fixed lattice point, found by enumerating `K`.
///
/// If `K` exceeds the enumeration cap, the trace keeps losses only and sets
/// `regret_omitted`.
pub fn run_experiment(opts: &ExperimentOptions, seq: &CostSequence, seed: u64) -> Result<RegretTrace> {
    let domain = seq.domain();
    let params = resolve_params(opts, seq)?;
    let x1 = match &opts.x1 {
        Some(x) => {
            if !domain.contains_real(x)? {
                return Err(Error::OutOfDomain);
            }
            x.clone()
        }
        None => initial_point(domain, &opts.projection)?,
    };
    let mut state = LearnerState::new(x1.clone(), params.eta, params.delta.unwrap_or(0.0), seed)?;

    let points = match domain.enumerate_with_cap(opts.enumeration_cap) {
        Ok(p) => Some(p),
        Err(Error::TooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut totals = points.as_ref().map(|p| vec![0.0f64; p.len()]);

    let horizon = seq.horizon();
    let mut records = Vec::with_capacity(horizon);
    let mut cumloss = 0.0;
    for t in 1..=horizon {
        let f = seq.cost(t);
        let out = match opts.algorithm {
            Algorithm::Full => full_info_step(&mut state, f, &opts.projection)?,
            Algorithm::Bandit => bandit_step(&mut state, f, &opts.projection)?,
        };
        cumloss += out.loss;
        let mut regret_to_date = None;
        if let (Some(points), Some(totals)) = (&points, totals.as_mut()) {
            for (acc, z) in totals.iter_mut().zip(points) {
                *acc += f.eval(z)?;
            }
            if opts.regret_per_round || t == horizon {
                regret_to_date = Some(cumloss - totals.iter().cloned().fold(f64::INFINITY, f64::min));
            }
        }
        records.push(RoundRecord { t, played: out.played, loss: out.loss, cumloss, regret_to_date });
    }

    let (best_fixed_point, best_fixed_loss) = match (&points, &totals) {
        (Some(points), Some(totals)) => {
            let mut best = 0;
            for (k, v) in totals.iter().enumerate() {
                if *v < totals[best] {
                    best = k;
                }
            }
            (Some(points[best].clone()), Some(totals[best]))
        }
        _ => (None, None),
    };
    let regret = best_fixed_loss.map(|b| cumloss - b);
    let meta = TraceMeta {
        algorithm: opts.algorithm,
        seed,
        horizon,
        dim: domain.dim(),
        width: domain.width(),
        lipschitz: seq.lipschitz(),
        bound: seq.bound(),
        eta: params.eta,
        delta: params.delta,
        delta_clamped: params.delta_clamped,
        theoretical_bound: params.theoretical_bound,
        projection_tolerance: opts.projection.tolerance,
        projection_max_sweeps: opts.projection.max_sweeps,
        x1,
        adversary: seq.meta.describe(),
        regret_omitted: points.is_none(),
    };
    Ok(RegretTrace { records, best_fixed_point, best_fixed_loss, regret, meta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    use crate::adversaries::{lower_bound_adversary, SequenceMeta};
    use crate::extension::LatticeFunction;

    fn meta() -> SequenceMeta {
        SequenceMeta { generator: "test".into(), seed: 0, params: vec![] }
    }

    #[test]
    fn eta_examples() {
        assert!((theoretical_eta(4, 3, 100, 2.0).unwrap() - 0.2).abs() < 1e-15);
        assert!((theoretical_eta(1, 1, 1, 2.0 / 3.0).unwrap() - 1.0).abs() < 1e-15);
        let ratio = theoretical_eta(3, 2, 200, 1.0).unwrap() / theoretical_eta(3, 2, 100, 1.0).unwrap();
        assert!((ratio - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(theoretical_eta(0, 1, 1, 1.0).is_err());
        assert!(theoretical_eta(1, 1, 1, 0.0).is_err());
    }

    #[test]
    fn bandit_param_examples() {
        let p = theoretical_bandit_params(8, 5, 1000, 2.0).unwrap();
        assert!((p.delta - 0.8).abs() < 1e-12 && (p.eta - 0.00625).abs() < 1e-15 && !p.clamped);
        let p = theoretical_bandit_params(10, 1, 8, 1.0).unwrap();
        assert_eq!(p.delta, 1.0);
        assert!(p.clamped);
        let a = theoretical_bandit_params(2, 3, 64, 1.0).unwrap();
        let b = theoretical_bandit_params(2, 3, 64, 2.0).unwrap();
        assert!((a.eta / b.eta - 2.0).abs() < 1e-12);
        assert!(theoretical_bandit_params(2, 3, 64, -1.0).is_err());
    }

    #[test]
    fn sampling_probability_example() {
        let rho = sampling_probabilities(&[0.5, 0.25, 0.25], 0.3);
        for (a, b) in rho.iter().zip([0.45, 0.275, 0.275]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn estimator_cases() {
        let rho = [0.45, 0.275, 0.275];
        let g = bandit_estimate(&[0, 1], 0, true, 1.0, &rho);
        assert!((g[0] + 1.0 / 0.45).abs() < 1e-12 && g[1] == 0.0);
        let g = bandit_estimate(&[0, 1], 1, true, 0.5, &rho);
        assert!((g[0] - 3.636_363_636_363_636).abs() < 1e-12 && g[1] == 0.0);
        let g = bandit_estimate(&[0, 1], 1, false, 0.5, &rho);
        assert!(g[0] == 0.0 && (g[1] + 3.636_363_636_363_636).abs() < 1e-12);
        let g = bandit_estimate(&[0, 1], 2, true, 0.5, &rho);
        assert!(g[0] == 0.0 && (g[1] - 0.5 / 0.275).abs() < 1e-12);
    }

    fn identity_oracle() -> CostOracle {
        let k = Arc::new(LNatDomain::cube(1, 0, 2).unwrap());
        CostOracle::new(k, Arc::new(|z: &[i64]| z[0] as f64), 2.0, 1.0)
    }

    #[test]
    fn full_info_hand_trace() {
        let f = identity_oracle();
        let mut s = LearnerState::new(vec![1.0], 0.5, 0.0, 0).unwrap();
        // The step draws tau internally; at x = 1 every tau plays z = 1.
        let out = full_info_step(&mut s, &f, &ProjectionConfig::default()).unwrap();
        assert_eq!(out.played, vec![1]);
        assert_eq!(out.loss, 1.0);
        assert_eq!(out.estimate, vec![1.0]);
        assert_eq!(s.x, vec![0.5]);
        assert_eq!(s.round, 1);
    }

    #[test]
    fn constant_cost_keeps_iterate() {
        let k = Arc::new(LNatDomain::cube(2, 0, 3).unwrap());
        let f = CostOracle::new(k, Arc::new(|_: &[i64]| 1.0), 1.0, 0.0);
        let mut s = LearnerState::new(vec![1.25, 2.5], 0.7, 0.0, 3).unwrap();
        for _ in 0..5 {
            let out = full_info_step(&mut s, &f, &ProjectionConfig::default()).unwrap();
            assert_eq!(out.estimate, vec![0.0, 0.0]);
        }
        assert_eq!(s.x, vec![1.25, 2.5]);
    }

    #[test]
    fn large_step_pins_linear_cost_to_facet() {
        let k = Arc::new(LNatDomain::cube(2, 0, 3).unwrap());
        let f = CostOracle::new(k, Arc::new(|z: &[i64]| 2.0 * z[0] as f64 - z[1] as f64), 9.0, 3.0);
        let mut s = LearnerState::new(vec![1.5, 1.5], 100.0, 0.0, 1).unwrap();
        full_info_step(&mut s, &f, &ProjectionConfig::default()).unwrap();
        assert_eq!(s.x, vec![0.0, 3.0]);
    }

    struct Counting(AtomicUsize);

    impl LatticeFunction for Counting {
        fn value(&self, z: &[i64]) -> f64 {
            self.0.fetch_add(1, Ordering::SeqCst);
            z.iter().sum::<i64>() as f64
        }
    }

    #[test]
    fn bandit_queries_once_per_round() {
        let k = Arc::new(LNatDomain::cube(3, 0, 2).unwrap());
        let counter = Arc::new(Counting(AtomicUsize::new(0)));
        let f = CostOracle::new(k.clone(), counter.clone(), 6.0, 1.0);
        let mut s = LearnerState::new(vec![0.5, 1.25, 1.0], 0.05, 0.5, 11).unwrap();
        for r in 1..=20 {
            let out = bandit_step(&mut s, &f, &ProjectionConfig::default()).unwrap();
            assert_eq!(counter.0.load(Ordering::SeqCst), r);
            assert!(k.contains(&out.played).unwrap());
            assert!(k.contains_real(&s.x).unwrap());
        }
    }

    #[test]
    fn zero_adversary_has_zero_regret() {
        let k = Arc::new(LNatDomain::cube(2, 0, 2).unwrap());
        let f = CostOracle::new(k, Arc::new(|_: &[i64]| 0.0), 0.0, 0.0);
        let seq = CostSequence::repeated(f, 30, meta()).unwrap();
        for algo in [Algorithm::Full, Algorithm::Bandit] {
            let tr = run_experiment(&ExperimentOptions::new(algo), &seq, 2).unwrap();
            assert_eq!(tr.regret, Some(0.0));
        }
    }

    #[test]
    fn single_round_regret_is_nonnegative() {
        for seed in 0..20 {
            let adv = lower_bound_adversary(2, 3, 1.0, 1, seed).unwrap();
            let tr = run_experiment(&ExperimentOptions::new(Algorithm::Full), &adv.sequence, seed).unwrap();
            assert!(tr.regret.unwrap() >= 0.0);
        }
    }

    #[test]
    fn trace_is_consistent() {
        let adv = lower_bound_adversary(2, 3, 1.0, 50, 8).unwrap();
        let mut opts = ExperimentOptions::new(Algorithm::Bandit);
        opts.regret_per_round = true;
        let tr = run_experiment(&opts, &adv.sequence, 8).unwrap();
        let mut acc = 0.0;
        for r in &tr.records {
            acc += r.loss;
            assert_eq!(r.cumloss, acc);
            assert!(r.regret_to_date.is_some());
        }
        assert_eq!(tr.records.last().unwrap().regret_to_date, tr.regret);
        assert_eq!(tr.best_fixed_point.as_deref(), Some(adv.best_fixed_point().as_slice()));
        let csv = tr.to_csv();
        assert_eq!(csv.lines().count(), 51);
        assert!(csv.starts_with("t,loss,cumloss,regret_to_date\n"));
    }

    #[test]
    fn oversized_domain_omits_regret() {
        let adv = lower_bound_adversary(3, 3, 1.0, 5, 0).unwrap();
        let mut opts = ExperimentOptions::new(Algorithm::Full);
        opts.enumeration_cap = 10;
        let tr = run_experiment(&opts, &adv.sequence, 0).unwrap();
        assert!(tr.meta.regret_omitted && tr.regret.is_none());
        assert_eq!(tr.records.len(), 5);
        assert!(tr.records.iter().all(|r| r.regret_to_date.is_none()));
    }

    #[test]
    fn runs_are_reproducible() {
        let adv = lower_bound_adversary(2, 2, 1.0, 40, 3).unwrap();
        for algo in [Algorithm::Full, Algorithm::Bandit] {
            let a = run_experiment(&ExperimentOptions::new(algo), &adv.sequence, 3).unwrap();
            let b = run_experiment(&ExperimentOptions::new(algo), &adv.sequence, 3).unwrap();
            assert_eq!(a, b);
        }
    }
}
