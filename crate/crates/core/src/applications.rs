//! Cost oracles for spare-parts inventory and shift scheduling.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversaries::{adversary_rng, CostSequence, SequenceMeta};
use crate::error::{Error, Result};
use crate::extension::{CostOracle, LatticeFunction};
use crate::lattice::{ConstraintSystem, LNatDomain};
use crate::oracles::{check_midpoint_convexity, CheckReport};

/// `p * max_j max(y_j - z_j, 0) + sum_j c_j z_j`.
pub fn inventory_cost(p: f64, c: &[f64], demand: &[i64], z: &[i64]) -> f64 {
    let shortage = demand.iter().zip(z).map(|(y, zj)| (y - zj).max(0)).max().unwrap_or(0);
    p * shortage as f64 + c.iter().zip(z).map(|(cj, &zj)| cj * zj as f64).sum::<f64>()
}

#[derive(Debug, Clone)]
struct InventoryCost {
    p: f64,
    c: Arc<Vec<f64>>,
    demand: Vec<i64>,
}

impl LatticeFunction for InventoryCost {
    fn value(&self, z: &[i64]) -> f64 {
        inventory_cost(self.p, &self.c, &self.demand, z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Demand {
    /// I.i.d. uniform on `0..=max` per part.
    Uniform { max: i64 },
    /// I.i.d. geometric with success probability `q`, conditioned on `<= cap`.
    TruncatedGeometric { q: f64, cap: i64 },
    /// Fixed per-round demands, used in order.
    Trace { rounds: Vec<Vec<i64>> },
}

impl Demand {
    fn cap(&self) -> i64 {
        match self {
            Demand::Uniform { max } => *max,
            Demand::TruncatedGeometric { cap, .. } => *cap,
            Demand::Trace { rounds } => rounds.iter().flatten().copied().max().unwrap_or(0),
        }
    }
}

/// One line per round, whitespace-separated integers.
pub fn parse_demand_trace(text: &str, d: usize) -> Result<Vec<Vec<i64>>> {
    let mut rounds = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<i64> = line
            .split_whitespace()
            .map(|tok| tok.parse().map_err(|_| Error::Parse(format!("line {}: bad integer {tok:?}", line_no + 1))))
            .collect::<Result<_>>()?;
        if row.len() != d {
            return Err(Error::Parse(format!("line {}: expected {d} demands, got {}", line_no + 1, row.len())));
        }
        rounds.push(row);
    }
    Ok(rounds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryModel {
    pub d: usize,
    pub p: f64,
    pub c: Vec<f64>,
    /// Largest order quantity per part.
    pub n: i64,
    pub demand: Demand,
}

impl InventoryModel {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n < 1 {
            return Err(Error::InvalidArgument("inventory needs d >= 1 and N >= 1".into()));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::InvalidArgument("penalty p must be positive".into()));
        }
        if self.c.len() != self.d || self.c.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("unit costs c must be d nonnegative numbers".into()));
        }
        match &self.demand {
            Demand::Uniform { max } if *max < 0 => Err(Error::InvalidArgument("demand max must be >= 0".into())),
            Demand::TruncatedGeometric { q, cap } if !(*q > 0.0 && *q <= 1.0) || *cap < 0 => {
                Err(Error::InvalidArgument("geometric demand needs 0 < q <= 1 and cap >= 0".into()))
            }
            Demand::Trace { rounds } if rounds.iter().any(|r| r.len() != self.d || r.iter().any(|&v| v < 0)) => {
                Err(Error::InvalidArgument("demand trace rows must have d nonnegative entries".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn domain(&self) -> Result<LNatDomain> {
        LNatDomain::cube(self.d, 0, self.n)
    }

    /// `horizon` demand vectors, drawn from the adversary stream of `seed`.
    pub fn demands(&self, horizon: usize, seed: u64) -> Result<Vec<Vec<i64>>> {
        let mut rng = adversary_rng(seed);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<i64> {
            (0..self.d)
                .map(|_| match &self.demand {
                    Demand::Uniform { max } => rng.gen_range(0..=*max),
                    Demand::TruncatedGeometric { q, cap } => loop {
                        let mut k = 0;
                        while k <= *cap && !rng.gen_bool(*q) {
                            k += 1;
                        }
                        if k <= *cap {
                            break k;
                        }
                    },
                    Demand::Trace { .. } => unreachable!(),
                })
                .collect()
        };
        match &self.demand {
            Demand::Trace { rounds } => {
                if rounds.len() < horizon {
                    return Err(Error::InvalidArgument(format!(
                        "demand trace has {} rounds, horizon is {horizon}",
                        rounds.len()
                    )));
                }
                Ok(rounds[..horizon].to_vec())
            }
            _ => Ok((0..horizon).map(|_| draw(&mut rng)).collect()),
        }
    }

    /// `p + sum_j c_j`: one unit in every coordinate moves the shortage term
    /// by at most `p` and the purchase term by at most `sum_j c_j`.
    pub fn lipschitz(&self) -> f64 {
        self.p + self.c.iter().sum::<f64>()
    }

    pub fn bound(&self) -> f64 {
        self.p * self.demand.cap() as f64 + self.c.iter().sum::<f64>() * self.n as f64
    }

    pub fn oracle(&self, domain: Arc<LNatDomain>, demand: Vec<i64>) -> CostOracle {
        let f = InventoryCost { p: self.p, c: Arc::new(self.c.clone()), demand };
        CostOracle::new(domain, Arc::new(f), self.bound(), self.lipschitz())
    }

    pub fn sequence(&self, horizon: usize, seed: u64) -> Result<CostSequence> {
        self.validate()?;
        let domain = Arc::new(self.domain()?);
        let costs = self.demands(horizon, seed)?.into_iter().map(|y| self.oracle(domain.clone(), y)).collect();
        let meta = SequenceMeta {
            generator: "inventory".into(),
            seed,
            params: vec![
                ("d".into(), self.d.to_string()),
                ("p".into(), format!("{:?}", self.p)),
                ("N".into(), self.n.to_string()),
            ],
        };
        CostSequence::new(domain, costs, meta)
    }
}

/// Service level of an M/M/n queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceLevel {
    pub value: f64,
    /// False when `lambda >= n mu`; `value` is then 0.
    pub stable: bool,
}

/// `P(wait <= c_wait) = 1 - C(n, a) exp(-(n mu - lambda) c_wait)` with
/// `a = lambda / mu` and `C` the Erlang-C delay probability.
pub fn erlang_service_level(n: u32, lambda: f64, mu: f64, c_wait: f64) -> Result<ServiceLevel> {
    if !(lambda >= 0.0 && lambda.is_finite()) || !(mu > 0.0 && mu.is_finite()) || c_wait.is_nan() || c_wait < 0.0 {
        return Err(Error::InvalidArgument("need lambda >= 0, mu > 0, c_wait >= 0".into()));
    }
    let nf = n as f64;
    if lambda >= nf * mu {
        return Ok(ServiceLevel { value: 0.0, stable: false });
    }
    let a = lambda / mu;
    let mut b = 1.0;
    for k in 1..=n {
        b = a * b / (k as f64 + a * b);
    }
    let c = nf * b / (nf - a * (1.0 - b));
    let value = 1.0 - c * (-(nf * mu - lambda) * c_wait).exp();
    Ok(ServiceLevel { value: value.clamp(0.0, 1.0), stable: true })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchedulingModel {
    /// 1-based start interval of each shift.
    pub shift_starts: Vec<usize>,
    pub intervals: usize,
    pub shift_length: usize,
    /// Largest staffing per shift.
    pub n: i64,
    pub labor: Vec<f64>,
    pub profit: f64,
    pub miss: f64,
    pub c_wait: f64,
    pub mu: f64,
    /// `lambda[t][i]`: arrival rate of round `t` (0-based) in interval `i`.
    pub lambda: Vec<Vec<f64>>,
}

impl SchedulingModel {
    pub fn shifts(&self) -> usize {
        self.shift_starts.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.shifts();
        if k == 0 || self.intervals == 0 || self.shift_length == 0 || self.n < 1 {
            return Err(Error::InvalidArgument("scheduling needs K, I, M, N >= 1".into()));
        }
        if self.shift_starts.iter().any(|&s| s == 0 || s > self.intervals) {
            return Err(Error::InvalidArgument("shift starts must lie in 1..=I".into()));
        }
        if self.labor.len() != k {
            return Err(Error::InvalidArgument("labor costs need one entry per shift".into()));
        }
        if !(self.miss >= 0.0 && self.miss <= 1.0) || !self.profit.is_finite() {
            return Err(Error::InvalidArgument("need finite G and r in [0, 1]".into()));
        }
        if self.lambda.is_empty() || self.lambda.iter().any(|row| row.len() != self.intervals) {
            return Err(Error::InvalidArgument("lambda needs rows of I rates".into()));
        }
        Ok(())
    }

    /// `h_i(y) = sum_{k : i - M < I_k <= i} y_k` for 1-based `i`.
    pub fn staffing(&self, y: &[i64]) -> Vec<i64> {
        (1..=self.intervals)
            .map(|i| {
                self.shift_starts
                    .iter()
                    .zip(y)
                    .filter(|(&s, _)| s <= i && i < s + self.shift_length)
                    .map(|(_, &v)| v)
                    .sum()
            })
            .collect()
    }

    fn coverage(&self) -> Vec<usize> {
        self.staffing(&vec![1; self.shifts()]).iter().map(|&v| v as usize).collect()
    }

    /// Largest staffing any interval can see.
    pub fn max_staffing(&self) -> i64 {
        self.coverage().iter().copied().max().unwrap_or(0) as i64 * self.n
    }

    pub fn domain(&self) -> Result<LNatDomain> {
        LNatDomain::cube(self.shifts(), 0, self.n)
    }

    /// `-G r S_t(y) + sum_k l_k y_k` for 0-based round `t`.
    pub fn scheduling_cost(&self, t: usize, y: &[i64]) -> Result<f64> {
        let mut s = 0.0;
        for (i, h) in self.staffing(y).into_iter().enumerate() {
            s += erlang_service_level(h.max(0) as u32, self.lambda[t][i], self.mu, self.c_wait)?.value;
        }
        Ok(-self.profit * self.miss * s + self.labor.iter().zip(y).map(|(l, &v)| l * v as f64).sum::<f64>())
    }

    /// The cost of round `t` with service levels tabulated over all
    /// reachable staffing levels.
    pub fn round_function(&self, t: usize) -> Result<ScheduleCost> {
        let top = self.max_staffing();
        let mut table = Vec::with_capacity(self.intervals);
        for i in 0..self.intervals {
            let row = (0..=top)
                .map(|n| Ok(erlang_service_level(n as u32, self.lambda[t][i], self.mu, self.c_wait)?.value))
                .collect::<Result<Vec<f64>>>()?;
            table.push(row);
        }
        Ok(ScheduleCost { model: Arc::new(self.clone()), table })
    }

    /// `(M, L̂)` for the shift-count cost over `[0, N]^K`.
    pub fn bounds(&self) -> (f64, f64) {
        let weight = (self.profit * self.miss).abs();
        let labor_abs: f64 = self.labor.iter().map(|l| l.abs()).sum();
        let m = weight * self.intervals as f64 + labor_abs * self.n as f64;
        // One unit per shift moves interval i's staffing by at most its
        // coverage, and a service level moves by at most 1 in total.
        let l = weight * self.coverage().iter().filter(|&&c| c > 0).count() as f64 + labor_abs;
        (m, l)
    }

    /// Rounds of transformed, L♮-convex costs on the prefix-sum domain.
    pub fn sequence(&self, seed: u64) -> Result<CostSequence> {
        self.validate()?;
        let domain = Arc::new(prefix_sum_domain(self.shifts(), self.n)?);
        let (m, l) = self.bounds();
        let mut costs = Vec::with_capacity(self.lambda.len());
        for t in 0..self.lambda.len() {
            let h = Arc::new(self.round_function(t)?);
            costs.push(CostOracle::new(domain.clone(), Arc::new(PrefixDifference::new(h)), m, 2.0 * l));
        }
        let meta = SequenceMeta {
            generator: "scheduling".into(),
            seed,
            params: vec![
                ("K".into(), self.shifts().to_string()),
                ("I".into(), self.intervals.to_string()),
                ("N".into(), self.n.to_string()),
            ],
        };
        CostSequence::new(domain, costs, meta)
    }
}

/// A tabulated round of the scheduling cost.
#[derive(Debug, Clone)]
pub struct ScheduleCost {
    model: Arc<SchedulingModel>,
    table: Vec<Vec<f64>>,
}

impl LatticeFunction for ScheduleCost {
    fn value(&self, y: &[i64]) -> f64 {
        let m = &self.model;
        let s: f64 = m
            .staffing(y)
            .into_iter()
            .zip(&self.table)
            .map(|(h, row)| row.get(h.max(0) as usize).copied().unwrap_or(f64::NAN))
            .sum();
        -m.profit * m.miss * s + m.labor.iter().zip(y).map(|(l, &v)| l * v as f64).sum::<f64>()
    }
}

/// Parameters of [`random_scheduling_instance`].
#[derive(Debug, Clone, Copy)]
pub struct SchedulingShape {
    pub max_shifts: usize,
    pub max_intervals: usize,
    pub max_n: i64,
    pub rounds: usize,
}

impl Default for SchedulingShape {
    fn default() -> Self {
        Self { max_shifts: 3, max_intervals: 4, max_n: 3, rounds: 1 }
    }
}

/// `g(0..=top)` is nondecreasing with nonincreasing increments.
fn is_concave_profile(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] >= w[0] - 1e-12) && values.windows(3).all(|w| w[2] - w[1] <= w[1] - w[0] + 1e-12)
}

/// A random instance whose per-interval service levels are concave over
/// every reachable staffing level. Arrival rates that break concavity are
/// halved until it holds.
pub fn random_scheduling_instance<R: Rng>(shape: &SchedulingShape, rng: &mut R) -> SchedulingModel {
    let k = rng.gen_range(1..=shape.max_shifts);
    let intervals = rng.gen_range(k.max(2)..=shape.max_intervals.max(k.max(2)));
    let mut starts: Vec<usize> = (1..=intervals).collect();
    for i in (1..starts.len()).rev() {
        starts.swap(i, rng.gen_range(0..=i));
    }
    starts.truncate(k);
    starts.sort_unstable();
    let mut model = SchedulingModel {
        shift_starts: starts,
        intervals,
        shift_length: rng.gen_range(1..=intervals),
        n: rng.gen_range(1..=shape.max_n),
        labor: (0..k).map(|_| rng.gen_range(0.0..2.0)).collect(),
        profit: rng.gen_range(1..=20) as f64,
        miss: rng.gen_range(0.0..=1.0),
        c_wait: rng.gen_range(0..=2) as f64,
        mu: 1.0,
        lambda: Vec::new(),
    };
    let top = model.max_staffing();
    for _ in 0..shape.rounds {
        let row = (0..intervals)
            .map(|_| {
                let mut lam: f64 = rng.gen_range(0.05..2.0);
                loop {
                    let profile: Vec<f64> = (0..=top)
                        .map(|n| {
                            erlang_service_level(n as u32, lam, model.mu, model.c_wait).expect("valid rates").value
                        })
                        .collect();
                    if is_concave_profile(&profile) {
                        break lam;
                    }
                    lam /= 2.0;
                }
            })
            .collect();
        model.lambda.push(row);
    }
    model
}

/// `{x : 0 <= x_1 <= N, 0 <= x_k - x_(k-1) <= N}`, the image of `[0, N]^K`
/// under prefix sums.
pub fn prefix_sum_domain(k: usize, n: i64) -> Result<LNatDomain> {
    let upper: Vec<i64> = (1..=k as i64).map(|j| j * n).collect();
    let mut sys = ConstraintSystem::new(vec![0; k], upper)?;
    for j in 1..k {
        sys.add_difference(j - 1, j, 0)?;
        sys.add_difference(j, j - 1, n)?;
    }
    LNatDomain::new(sys)
}

/// `f(x) = h(x_1, x_2 - x_1, ..., x_K - x_(K-1))`.
#[derive(Clone)]
pub struct PrefixDifference {
    inner: Arc<dyn LatticeFunction>,
}

impl PrefixDifference {
    pub fn new(inner: Arc<dyn LatticeFunction>) -> Self {
        Self { inner }
    }
}

impl LatticeFunction for PrefixDifference {
    fn value(&self, x: &[i64]) -> f64 {
        let mut y = Vec::with_capacity(x.len());
        let mut prev = 0;
        for &v in x {
            y.push(v - prev);
            prev = v;
        }
        self.inner.value(&y)
    }
}

/// Transforms a multimodular `h` on `[0, N]^K` into an L♮-convex cost on
/// the prefix-sum domain and certifies the result exhaustively.
///
/// `bound` and `lipschitz` describe `h`; differences at most double the
/// ℓ∞ step, so the transformed cost declares `2 * lipschitz`.
pub fn multimodular_to_lnatural(
    h: Arc<dyn LatticeFunction>,
    k: usize,
    n: i64,
    bound: f64,
    lipschitz: f64,
) -> Result<(CostOracle, CheckReport)> {
    let domain = Arc::new(prefix_sum_domain(k, n)?);
    let f = PrefixDifference::new(h);
    let report = check_midpoint_convexity(&f, &domain)?;
    let oracle = CostOracle::new(domain, Arc::new(f), bound, 2.0 * lipschitz);
    Ok((oracle, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::oracles::brute_force_min;

    #[test]
    fn inventory_examples() {
        assert_eq!(inventory_cost(2.0, &[1.0, 1.0], &[3, 0], &[2, 1]), 5.0);
        assert_eq!(inventory_cost(2.0, &[1.5, 0.5], &[1, 2], &[2, 2]), 4.0);
        let k = LNatDomain::cube(1, 0, 5).unwrap();
        let f = |z: &[i64]| inventory_cost(2.0, &[1.0], &[3], z);
        assert_eq!(brute_force_min(&f, &k).unwrap(), (vec![3], 3.0));
    }

    #[test]
    fn inventory_lipschitz_needs_the_sum() {
        // From z = 0 to z = 1 with no shortage: purchase cost rises by sum c.
        let m = InventoryModel { d: 2, p: 1.0, c: vec![1.0, 2.0], n: 2, demand: Demand::Uniform { max: 0 } };
        let k = m.domain().unwrap();
        let f = |z: &[i64]| inventory_cost(1.0, &[1.0, 2.0], &[0, 0], z);
        let measured = crate::extension::certify_lipschitz(&f, &k).unwrap();
        assert_eq!(measured, 3.0);
        assert!(measured > m.p + 2.0 - 1e-12 && measured <= m.lipschitz());
    }

    #[test]
    fn demand_streams() {
        let mut m = InventoryModel { d: 3, p: 2.0, c: vec![0.5; 3], n: 4, demand: Demand::Uniform { max: 4 } };
        let a = m.demands(50, 1).unwrap();
        assert_eq!(a, m.demands(50, 1).unwrap());
        assert!(a.iter().flatten().all(|&v| (0..=4).contains(&v)));
        m.demand = Demand::TruncatedGeometric { q: 0.4, cap: 3 };
        assert!(m.demands(200, 2).unwrap().iter().flatten().all(|&v| (0..=3).contains(&v)));
        m.demand = Demand::Trace { rounds: parse_demand_trace("1 2 3\n\n0 0 4\n", 3).unwrap() };
        m.validate().unwrap();
        assert_eq!(m.demands(2, 0).unwrap(), vec![vec![1, 2, 3], vec![0, 0, 4]]);
        assert!(m.demands(3, 0).is_err());
        assert!(parse_demand_trace("1 x", 2).is_err());
        assert!(parse_demand_trace("1 2 3", 2).is_err());
    }

    #[test]
    fn erlang_examples() {
        let s = erlang_service_level(1, 0.5, 1.0, 0.0).unwrap();
        assert!((s.value - 0.5).abs() < 1e-15 && s.stable);
        assert_eq!(erlang_service_level(3, 0.0, 1.0, 0.5).unwrap().value, 1.0);
        assert!((erlang_service_level(3, 1e-9, 1.0, 0.5).unwrap().value - 1.0).abs() < 1e-9);
        let u = erlang_service_level(2, 2.0, 1.0, 1.0).unwrap();
        assert!(!u.stable && u.value == 0.0);
        assert!(erlang_service_level(1, -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn erlang_two_servers_by_hand() {
        // a = 1, n = 2: B = 1/5, C = 2 B / (2 - (1 - B)) = 1/3.
        let s = erlang_service_level(2, 1.0, 1.0, 1.0).unwrap();
        assert!((s.value - (1.0 - (1.0 / 3.0) * (-1.0f64).exp())).abs() < 1e-14);
    }

    fn small_model() -> SchedulingModel {
        SchedulingModel {
            shift_starts: vec![1, 2],
            intervals: 3,
            shift_length: 2,
            n: 2,
            labor: vec![1.0, 0.5],
            profit: 10.0,
            miss: 0.5,
            c_wait: 0.0,
            mu: 1.0,
            lambda: vec![vec![0.5, 0.5, 0.5]],
        }
    }

    #[test]
    fn scheduling_hand_computation() {
        let m = small_model();
        m.validate().unwrap();
        // Shift 1 covers intervals 1-2, shift 2 covers 2-3.
        assert_eq!(m.staffing(&[1, 1]), vec![1, 2, 1]);
        let g1 = 0.5;
        // n = 2, a = 0.5: B = 1/13, C = 1/10.
        let g2 = 0.9;
        let expect = -10.0 * 0.5 * (g1 + g2 + g1) + 1.5;
        assert!((m.scheduling_cost(0, &[1, 1]).unwrap() - expect).abs() < 1e-12);
        let tab = m.round_function(0).unwrap();
        assert!((tab.value(&[1, 1]) - expect).abs() < 1e-12);
    }

    #[test]
    fn scheduling_without_profit_is_labor() {
        let mut m = small_model();
        m.profit = 0.0;
        assert_eq!(m.scheduling_cost(0, &[2, 1]).unwrap(), 2.5);
    }

    #[test]
    fn transform_examples() {
        let k1 = prefix_sum_domain(1, 3).unwrap();
        assert_eq!(k1, LNatDomain::cube(1, 0, 3).unwrap());
        let lin: Arc<dyn LatticeFunction> = Arc::new(|y: &[i64]| y[0] as f64 - 2.0 * y[1] as f64 + 0.5 * y[2] as f64);
        let (f, report) = multimodular_to_lnatural(lin, 3, 2, 10.0, 3.5).unwrap();
        assert!(report.passed);
        assert_eq!(f.domain().enumerate().unwrap().len(), 27);
        let tab: Arc<dyn LatticeFunction> = Arc::new(small_model().round_function(0).unwrap());
        let (_, report) = multimodular_to_lnatural(tab, 2, 2, 1.0, 1.0).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn transformed_domain_is_prefix_image() {
        let k = prefix_sum_domain(3, 2).unwrap();
        let mut image = Vec::new();
        for a in 0..=2 {
            for b in 0..=2 {
                for c in 0..=2 {
                    image.push(vec![a, a + b, a + b + c]);
                }
            }
        }
        image.sort();
        assert_eq!(k.enumerate().unwrap(), image);
    }

    #[test]
    fn random_instances_are_concave_and_certify() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let m = random_scheduling_instance(&SchedulingShape::default(), &mut rng);
            m.validate().unwrap();
            let seq = m.sequence(0).unwrap();
            let report = check_midpoint_convexity(seq.cost(1).function().as_ref(), seq.domain()).unwrap();
            assert!(report.passed, "{m:?} {report:?}");
        }
    }
}
