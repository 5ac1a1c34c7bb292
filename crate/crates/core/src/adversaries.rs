//! Oblivious cost-sequence generators.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{certify_lipschitz, measure_bound, CostOracle, LatticeFunction};
use crate::functions::{FunctionSpec, Term};
use crate::lattice::{LNatDomain, LatticePoint};
use crate::oracles::check_midpoint_convexity;

/// RNG stream reserved for adversary draws; learners use stream 1.
pub const ADVERSARY_STREAM: u64 = 0;

pub fn adversary_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ADVERSARY_STREAM);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceMeta {
    pub generator: String,
    pub seed: u64,
    pub params: Vec<(String, String)>,
}

impl SequenceMeta {
    pub fn describe(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.generator, params.join(","))
    }
}

/// A fixed horizon of costs on one shared domain.
#[derive(Debug, Clone)]
pub struct CostSequence {
    domain: Arc<LNatDomain>,
    costs: Vec<CostOracle>,
    pub meta: SequenceMeta,
}

impl CostSequence {
    pub fn new(domain: Arc<LNatDomain>, costs: Vec<CostOracle>, meta: SequenceMeta) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::InvalidArgument("cost sequence needs at least one round".into()));
        }
        if costs.iter().any(|c| c.domain() != domain.as_ref()) {
            return Err(Error::InvalidArgument("every cost must live on the sequence's domain".into()));
        }
        Ok(Self { domain, costs, meta })
    }

    /// The same cost in every round.
    pub fn repeated(cost: CostOracle, horizon: usize, meta: SequenceMeta) -> Result<Self> {
        let domain = cost.shared_domain().clone();
        Self::new(domain, vec![cost; horizon], meta)
    }

    pub fn domain(&self) -> &LNatDomain {
        &self.domain
    }

    pub fn shared_domain(&self) -> &Arc<LNatDomain> {
        &self.domain
    }

    pub fn horizon(&self) -> usize {
        self.costs.len()
    }

    /// Cost of round `t`, 1-based.
    pub fn cost(&self, t: usize) -> &CostOracle {
        &self.costs[t - 1]
    }

    pub fn costs(&self) -> &[CostOracle] {
        &self.costs
    }

    /// Largest declared `M` over the horizon.
    pub fn bound(&self) -> f64 {
        self.costs.iter().map(CostOracle::bound).fold(0.0, f64::max)
    }

    /// Largest declared `L̂` over the horizon.
    pub fn lipschitz(&self) -> f64 {
        self.costs.iter().map(CostOracle::lipschitz).fold(0.0, f64::max)
    }
}

/// `f(s) = sigma * L * s_i`.
#[derive(Debug, Clone, Copy)]
struct SignedCoordinate {
    coord: usize,
    scale: f64,
}

impl LatticeFunction for SignedCoordinate {
    fn value(&self, z: &[i64]) -> f64 {
        self.scale * z[self.coord] as f64
    }
}

/// The lower-bound construction on `[0, N]^d`: round `t` charges
/// `sigma_t * L * s_{i(t)}` with Rademacher `sigma_t` and `i(t)` cycling
/// through the coordinates starting from the second (1-based `(t mod d) + 1`).
#[derive(Debug, Clone)]
pub struct LowerBoundAdversary {
    pub sequence: CostSequence,
    pub sigmas: Vec<i8>,
}

impl LowerBoundAdversary {
    /// 0-based coordinate charged in round `t` (1-based).
    pub fn coordinate(t: usize, d: usize) -> usize {
        t % d
    }

    /// The best fixed point in closed form: coordinate `i` sits at the
    /// lower end when its signed total `X_i` is nonnegative, otherwise at `N`.
    pub fn best_fixed_point(&self) -> LatticePoint {
        let d = self.sequence.domain().dim();
        let n = self.sequence.domain().width();
        let mut totals = vec![0i64; d];
        for (k, &s) in self.sigmas.iter().enumerate() {
            totals[Self::coordinate(k + 1, d)] += s as i64;
        }
        totals.iter().map(|&x| if x >= 0 { 0 } else { n }).collect()
    }
}

pub fn lower_bound_adversary(d: usize, n: i64, l: f64, horizon: usize, seed: u64) -> Result<LowerBoundAdversary> {
    if d == 0 || n <= 0 || horizon == 0 || !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidArgument("lower-bound adversary needs positive d, N, L, T".into()));
    }
    let domain = Arc::new(LNatDomain::cube(d, 0, n)?);
    let mut rng = adversary_rng(seed);
    let sigmas: Vec<i8> = (0..horizon).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    let costs = sigmas
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let f = SignedCoordinate { coord: LowerBoundAdversary::coordinate(k + 1, d), scale: s as f64 * l };
            CostOracle::new(domain.clone(), Arc::new(f), l * n as f64, l)
        })
        .collect();
    let meta = SequenceMeta {
        generator: "lower_bound".into(),
        seed,
        params: vec![("d".into(), d.to_string()), ("N".into(), n.to_string()), ("L".into(), format!("{l:?}"))],
    };
    Ok(LowerBoundAdversary { sequence: CostSequence::new(domain, costs, meta)?, sigmas })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SeparableQuadratic,
    MaxComponent,
    Mixed,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separable_quadratic" | "separable-quadratic" => Ok(Family::SeparableQuadratic),
            "max_component" | "max-component" => Ok(Family::MaxComponent),
            "mixed" => Ok(Family::Mixed),
            other => Err(Error::Parse(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamParams {
    pub family: Family,
    /// Upper end of the uniform coefficient draws; 0 gives zero costs.
    pub scale: f64,
    /// Certify each draw exhaustively (midpoint convexity and measured
    /// `M`, `L̂` within the declared values) at construction.
    pub certify: bool,
}

impl StreamParams {
    pub fn new(family: Family) -> Self {
        Self { family, scale: 1.0, certify: true }
    }
}

fn draw_max_component<R: Rng>(domain: &LNatDomain, scale: f64, negate: bool, rng: &mut R) -> Term {
    let w = domain.width() as f64;
    Term::MaxComponent {
        weight: scale * rng.gen::<f64>(),
        tau0: rng.gen_range(-w..=w),
        tau: (0..domain.dim()).map(|_| rng.gen_range(-w..=w)).collect(),
        negate,
    }
}

fn draw_quadratic<R: Rng>(domain: &LNatDomain, scale: f64, rng: &mut R) -> Term {
    let d = domain.dim();
    Term::Quadratic {
        a: (0..d).map(|_| scale * rng.gen::<f64>()).collect(),
        b: (0..d)
            .map(|i| rng.gen_range(domain.coordinate_lower(i) as f64..=domain.coordinate_upper(i) as f64))
            .collect(),
    }
}

/// One draw from a family.
pub fn draw_function<R: Rng>(domain: &LNatDomain, params: &StreamParams, rng: &mut R) -> FunctionSpec {
    let s = params.scale;
    let terms = match params.family {
        Family::SeparableQuadratic => vec![draw_quadratic(domain, s, rng)],
        Family::MaxComponent => {
            let negate = rng.gen::<bool>();
            vec![draw_max_component(domain, s, negate, rng)]
        }
        Family::Mixed => vec![
            draw_quadratic(domain, s, rng),
            draw_max_component(domain, s, false, rng),
            draw_max_component(domain, s, true, rng),
            Term::Linear { c: (0..domain.dim()).map(|_| s * rng.gen_range(-1.0..=1.0)).collect() },
        ],
    };
    FunctionSpec::new(terms)
}

/// Verifies midpoint convexity and that measured `M`, `L̂` do not exceed
/// the declared values.
pub fn certify_cost(cost: &CostOracle) -> Result<()> {
    let f = cost.function().as_ref();
    let report = check_midpoint_convexity(f, cost.domain())?;
    if !report.passed {
        return Err(Error::Certification(format!("midpoint convexity violated by {:e}", report.metric)));
    }
    let m = measure_bound(f, cost.domain())?;
    let l = certify_lipschitz(f, cost.domain())?;
    let slack = 1e-9 * (1.0 + cost.bound().max(cost.lipschitz()));
    if m > cost.bound() + slack || l > cost.lipschitz() + slack {
        return Err(Error::Certification(format!(
            "measured (M, L) = ({m}, {l}) exceed declared ({}, {})",
            cost.bound(),
            cost.lipschitz()
        )));
    }
    Ok(())
}

/// A cost whose declared `M`, `L̂` are the terms' analytic bounds.
pub fn spec_cost(domain: Arc<LNatDomain>, spec: FunctionSpec) -> Result<CostOracle> {
    spec.validate(domain.dim())?;
    let (m, l) = spec.bounds(&domain);
    Ok(CostOracle::new(domain, Arc::new(spec), m, l))
}

/// `horizon` independent draws from a family, with analytic `M`, `L̂`.
pub fn random_lnat_stream(
    domain: Arc<LNatDomain>,
    params: &StreamParams,
    horizon: usize,
    seed: u64,
) -> Result<CostSequence> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    if !(params.scale >= 0.0 && params.scale.is_finite()) {
        return Err(Error::InvalidArgument("scale must be finite and nonnegative".into()));
    }
    let mut rng = adversary_rng(seed);
    let mut costs = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let cost = spec_cost(domain.clone(), draw_function(&domain, params, &mut rng))?;
        if params.certify {
            certify_cost(&cost)?;
        }
        costs.push(cost);
    }
    let meta = SequenceMeta {
        generator: "random".into(),
        seed,
        params: vec![
            ("family".into(), format!("{:?}", params.family)),
            ("scale".into(), format!("{:?}", params.scale)),
        ],
    };
    CostSequence::new(domain, costs, meta)
}
