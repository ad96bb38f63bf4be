//! Seeded verification campaigns.
//!
//! Each trial draws its sizes and models from a private ChaCha8 stream keyed
//! by `(seed, suite, trial)`. Side `k` of a trial (k = 0, 1, ...) is the
//! metric `random_metric_space(trial_seed + 2k, n_k, metric_k)` timed by
//! `random_time_function(trial_seed + 2k + 1, ., time_k)`; the row's `seed`
//! and `model` columns record exactly these inputs.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tml_core::construct::{random_metric_space, random_time_function, MetricModel, TimeModel};
use tml_core::engine::{bb_gh_with_tol, fd_hh_with_tol, time_range_bound, DistanceResult};
use tml_core::{
    classify, enumerations_from_correspondence, frechet_embed, gh_distance, hausdorff_sup, kappa_gh_distance,
    tau_h_distance, timed_frechet_embed, DistanceKind, EngineError, Enumeration, FiniteMetricSpace, TimedMetricSpace,
    DEFAULT_BUDGET, DEFAULT_TOL,
};

use crate::report::{Quantity, ReportRow};

/// Slack absorbed by every asserted inequality.
pub const DEFAULT_ASSERT_TOL: f64 = 1e-7;
/// Largest space size for which campaigns demand exact distances.
pub const MAX_EXACT_N: usize = 4;
/// Agreement required between a certificate and the optimum it witnesses.
pub const CERTIFICATE_TOL: f64 = 1e-12;
/// Random enumeration pairs tried against each optimum.
pub const ENUMERATION_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum)]
pub enum Suite {
    Sandwich,
    Order,
    Bb,
    Fd,
    Limits,
    Certificates,
    TriangleExplore,
    All,
}

impl Suite {
    /// The suites `all` runs, in report order.
    pub const EACH: [Suite; 7] = [
        Suite::Sandwich,
        Suite::Order,
        Suite::Bb,
        Suite::Fd,
        Suite::Limits,
        Suite::Certificates,
        Suite::TriangleExplore,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Sandwich => "sandwich",
            Suite::Order => "order",
            Suite::Bb => "bb",
            Suite::Fd => "fd",
            Suite::Limits => "limits",
            Suite::Certificates => "certificates",
            Suite::TriangleExplore => "triangle-explore",
            Suite::All => "all",
        }
    }

    fn stream(self) -> u64 {
        self as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub suite: Suite,
    pub trials: u64,
    pub nmax: usize,
    pub seed: u64,
    pub tol: f64,
    pub budget: u64,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl CampaignConfig {
    pub fn new(suite: Suite, trials: u64, nmax: usize, seed: u64) -> Self {
        CampaignConfig { suite, trials, nmax, seed, tol: DEFAULT_ASSERT_TOL, budget: DEFAULT_BUDGET, threads: None }
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.trials < 1 {
            return Err(CampaignError::InvalidConfig("trials must be at least 1".into()));
        }
        if self.nmax < 1 {
            return Err(CampaignError::InvalidConfig("nmax must be at least 1".into()));
        }
        if self.nmax > MAX_EXACT_N {
            return Err(CampaignError::InvalidConfig(format!(
                "nmax {} exceeds {MAX_EXACT_N}, the largest size with exact distances",
                self.nmax
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CampaignError::InvalidConfig("tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CampaignError {
    #[error("invalid campaign config: {0}")]
    InvalidConfig(String),
    #[error("{suite} trial {trial} (seed {seed}): {kind} is not exact within budget {budget}")]
    BudgetTooSmall { suite: &'static str, trial: u64, seed: u64, kind: DistanceKind, budget: u64 },
    #[error("{suite} trial {trial} (seed {seed}): {source}")]
    Engine { suite: &'static str, trial: u64, seed: u64, source: EngineError },
}

/// The outcome of one inequality check, before descriptors are attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub quantities: Vec<Quantity>,
    pub inequality: String,
    pub slack: f64,
    pub asserted: bool,
    /// Allowance subtracted from the slack before failing; certificate checks
    /// carry their own allowance inside the slack and use zero here.
    pub allowance: f64,
}

/// Failure inside a check, completed with trial coordinates by the runner.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckError {
    kind: Option<DistanceKind>,
    engine: Option<EngineError>,
}

impl From<EngineError> for CheckError {
    fn from(e: EngineError) -> Self {
        CheckError { kind: None, engine: Some(e) }
    }
}

fn exact(r: DistanceResult) -> Result<f64, CheckError> {
    if r.is_exact {
        Ok(r.upper)
    } else {
        Err(CheckError { kind: Some(r.kind), engine: None })
    }
}

fn asserted(quantities: Vec<Quantity>, inequality: &str, slack: f64, tol: f64) -> Check {
    Check { quantities, inequality: inequality.to_string(), slack, asserted: true, allowance: tol }
}

/// `gh <= kappa <= 2 gh`
pub fn check_sandwich(x1: &FiniteMetricSpace, x2: &FiniteMetricSpace, budget: u64, tol: f64) -> Result<Check, CheckError> {
    let gh = exact(gh_distance(x1, x2, budget))?;
    let kappa = exact(kappa_gh_distance(x1, x2, budget))?;
    Ok(asserted(
        vec![Quantity::scalar("gh", gh), Quantity::scalar("kappa_gh", kappa)],
        "gh <= kappa_gh <= 2*gh",
        (kappa - gh).min(2.0 * gh - kappa),
        tol,
    ))
}

/// `gh <= kappa <= tau_h` and `tau_range <= tau_h`
pub fn check_order(t1: &TimedMetricSpace, t2: &TimedMetricSpace, budget: u64, tol: f64) -> Result<Check, CheckError> {
    let gh = exact(gh_distance(t1.base(), t2.base(), budget))?;
    let kappa = exact(kappa_gh_distance(t1.base(), t2.base(), budget))?;
    let th = exact(tau_h_distance(t1, t2, budget))?;
    let range = time_range_bound(t1, t2);
    Ok(asserted(
        vec![
            Quantity::scalar("gh", gh),
            Quantity::scalar("kappa_gh", kappa),
            Quantity::scalar("tau_h", th),
            Quantity::scalar("tau_range", range),
        ],
        "gh <= kappa_gh <= tau_h; tau_range <= tau_h",
        (kappa - gh).min(th - kappa).min(th - range),
        tol,
    ))
}

/// `tau_h <= 2 * bb_gh.upper` for two big bang spaces.
pub fn check_bb(t1: &TimedMetricSpace, t2: &TimedMetricSpace, budget: u64, tol: f64) -> Result<Check, CheckError> {
    let th = exact(tau_h_distance(t1, t2, budget))?;
    let bb = bb_gh_with_tol(t1, t2, budget, DEFAULT_TOL)?;
    if bb.budget_exhausted {
        return Err(CheckError { kind: Some(DistanceKind::BbGh), engine: None });
    }
    Ok(asserted(
        vec![Quantity::scalar("tau_h", th), Quantity::interval("bb_gh", bb.lower, bb.upper)],
        "tau_h <= 2*bb_gh.upper",
        2.0 * bb.upper - th,
        tol,
    ))
}

/// `tau_h <= 2 * fd_hh.upper` for two future-developed spaces.
pub fn check_fd(t1: &TimedMetricSpace, t2: &TimedMetricSpace, budget: u64, tol: f64) -> Result<Check, CheckError> {
    let th = exact(tau_h_distance(t1, t2, budget))?;
    let fd = fd_hh_with_tol(t1, t2, budget, DEFAULT_TOL)?;
    if fd.budget_exhausted {
        return Err(CheckError { kind: Some(DistanceKind::FdHh), engine: None });
    }
    Ok(asserted(
        vec![Quantity::scalar("tau_h", th), Quantity::interval("fd_hh", fd.lower, fd.upper)],
        "tau_h <= 2*fd_hh.upper",
        2.0 * fd.upper - th,
        tol,
    ))
}

fn ratio(num: f64, den: f64) -> f64 {
    if num <= 0.0 {
        0.0
    } else if den <= 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// For `x` a big bang and `y` with a nonempty zero set: the zero set of `y`
/// and the deviation of `tau_y` from a cone at any zero point are both at
/// most `4 * tau_h`.
pub fn check_bb_limit(x: &TimedMetricSpace, y: &TimedMetricSpace, budget: u64, tol: f64) -> Result<Check, CheckError> {
    let th = exact(tau_h_distance(x, y, budget))?;
    let zero = y.zero_set(DEFAULT_TOL);
    let zero_diam = y.base().subset_diameter(&zero);
    let cone_defect = zero
        .iter()
        .flat_map(|&q| (0..y.n()).map(move |i| (y.tau(i) - y.dist(q, i)).abs()))
        .fold(0.0, f64::max);
    let worst = if zero.is_empty() { f64::INFINITY } else { zero_diam.max(cone_defect) };
    Ok(asserted(
        vec![
            Quantity::scalar("tau_h", th),
            Quantity::scalar("zero_diam", zero_diam),
            Quantity::scalar("cone_defect", cone_defect),
            Quantity::scalar("ratio", ratio(worst, th)),
        ],
        "zero_diam <= 4*tau_h; cone_defect <= 4*tau_h",
        4.0 * th - worst,
        tol,
    ))
}

/// For `x` future developed and any timed `y`: every `y` point has some `q`
/// with `tau_y(q) <= tau_h` and `|tau_y(y) - d(q, y)| <= 3 * tau_h`.
pub fn check_fd_limit(x: &TimedMetricSpace, y: &TimedMetricSpace, budget: u64, tol: f64) -> Result<Check, CheckError> {
    let th = exact(tau_h_distance(x, y, budget))?;
    let early: Vec<usize> = (0..y.n()).filter(|&q| y.tau(q) <= th + tol).collect();
    let min_tau = y.times().iter().copied().fold(f64::INFINITY, f64::min);
    let defect = if early.is_empty() {
        f64::INFINITY
    } else {
        (0..y.n())
            .map(|i| early.iter().map(|&q| (y.tau(i) - y.dist(q, i)).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(asserted(
        vec![
            Quantity::scalar("tau_h", th),
            Quantity::scalar("min_tau", min_tau),
            Quantity::scalar("near_cone_defect", defect),
            Quantity::scalar("ratio", ratio(defect, th)),
        ],
        "forall y exists q: tau_Y(q) <= tau_h and |tau_Y(y) - d_Y(q,y)| <= 3*tau_h",
        (th - min_tau).min(3.0 * th - defect),
        tol,
    ))
}

fn covering(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Enumeration {
    let mut seq: Vec<usize> = (0..n).collect();
    while seq.len() < m {
        seq.push(rng.gen_range(0..n));
    }
    seq.shuffle(rng);
    Enumeration::new(seq)
}

/// Certificates of the optimal Fréchet and timed Fréchet correspondences
/// reproduce the optimum, and random enumeration pairs never beat it.
pub fn check_certificates(
    t1: &TimedMetricSpace,
    t2: &TimedMetricSpace,
    budget: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Check, CheckError> {
    let kappa = kappa_gh_distance(t1.base(), t2.base(), budget);
    let th = tau_h_distance(t1, t2, budget);
    let (kv, tv) = (exact(kappa.clone())?, exact(th.clone())?);

    let (a, b) = enumerations_from_correspondence(&kappa.certificate.correspondence);
    let kc = hausdorff_sup(&frechet_embed(t1.base(), &a).unwrap(), &frechet_embed(t2.base(), &b).unwrap()).unwrap();
    let (a, b) = enumerations_from_correspondence(&th.certificate.correspondence);
    let tc = hausdorff_sup(&timed_frechet_embed(t1, &a).unwrap(), &timed_frechet_embed(t2, &b).unwrap()).unwrap();

    let (n1, n2) = (t1.n(), t2.n());
    let (mut ks, mut ts) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..ENUMERATION_SAMPLES {
        let m = n1.max(n2) + rng.gen_range(0..=2 * n1.max(n2));
        let (a, b) = (covering(rng, n1, m), covering(rng, n2, m));
        ks = ks.min(hausdorff_sup(&frechet_embed(t1.base(), &a).unwrap(), &frechet_embed(t2.base(), &b).unwrap()).unwrap());
        ts = ts.min(hausdorff_sup(&timed_frechet_embed(t1, &a).unwrap(), &timed_frechet_embed(t2, &b).unwrap()).unwrap());
    }
    let slack = [
        CERTIFICATE_TOL - (kc - kv).abs(),
        CERTIFICATE_TOL - (tc - tv).abs(),
        ks - kv + CERTIFICATE_TOL,
        ts - tv + CERTIFICATE_TOL,
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    Ok(Check {
        quantities: vec![
            Quantity::scalar("kappa_gh", kv),
            Quantity::scalar("kappa_certificate", kc),
            Quantity::scalar("kappa_sampled_min", ks),
            Quantity::scalar("tau_h", tv),
            Quantity::scalar("tau_h_certificate", tc),
            Quantity::scalar("tau_h_sampled_min", ts),
        ],
        inequality: "|certificate - optimum| <= 1e-12; sampled_min >= optimum - 1e-12".into(),
        slack,
        asserted: true,
        allowance: 0.0,
    })
}

/// Records how far `tau_h` is from satisfying the triangle inequality on a
/// triple. Never fails.
pub fn check_triangle(ts: [&TimedMetricSpace; 3], budget: u64) -> Result<Check, CheckError> {
    let d01 = exact(tau_h_distance(ts[0], ts[1], budget))?;
    let d12 = exact(tau_h_distance(ts[1], ts[2], budget))?;
    let d02 = exact(tau_h_distance(ts[0], ts[2], budget))?;
    let sides = [(d02, d01 + d12), (d01, d02 + d12), (d12, d01 + d02)];
    let slack = sides.iter().map(|&(s, o)| o - s).fold(f64::INFINITY, f64::min);
    let worst = sides.iter().map(|&(s, o)| ratio(s, o)).fold(0.0, f64::max);
    Ok(Check {
        quantities: vec![
            Quantity::scalar("tau_h_01", d01),
            Quantity::scalar("tau_h_12", d12),
            Quantity::scalar("tau_h_02", d02),
            Quantity::scalar("ratio", worst),
        ],
        inequality: "explore: each tau_h side <= sum of the other two".into(),
        slack,
        asserted: false,
        allowance: 0.0,
    })
}

// ---------------------------------------------------------------------------
// Trials

/// Seed of one trial, independent of every other trial.
pub fn trial_seed(seed: u64, suite: Suite, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((suite.stream() << 40) | trial);
    rng.next_u64()
}

#[derive(Debug, Clone, Copy)]
enum TimeSpec {
    Model(TimeModel),
    /// McShane extension shifted down so its minimum is zero.
    ShiftedMcShane(usize),
}

struct SideSpec {
    n: usize,
    metric: MetricModel,
    time: Option<TimeSpec>,
}

impl SideSpec {
    fn describe(&self, k: usize) -> String {
        let metric = match self.metric {
            MetricModel::Euclidean(d) => format!("euclidean{d}"),
            MetricModel::Graph => "graph".to_string(),
        };
        let time = match self.time {
            None => "untimed".to_string(),
            Some(TimeSpec::Model(TimeModel::Cone)) => "cone".to_string(),
            Some(TimeSpec::Model(TimeModel::SetCone(s))) => format!("set-cone{s}"),
            Some(TimeSpec::Model(TimeModel::McShane(a))) => format!("mcshane{a}"),
            Some(TimeSpec::ShiftedMcShane(a)) => format!("mcshane{a}-shifted"),
        };
        format!("k{k}:{metric}/{time}")
    }

    fn build(&self, seed: u64, k: usize) -> TimedMetricSpace {
        let k = k as u64;
        let x = random_metric_space(seed.wrapping_add(2 * k), self.n, self.metric);
        let ts = seed.wrapping_add(2 * k + 1);
        match self.time {
            None => TimedMetricSpace::untimed(x),
            Some(TimeSpec::Model(m)) => random_time_function(ts, &x, m),
            Some(TimeSpec::ShiftedMcShane(a)) => {
                let t = random_time_function(ts, &x, TimeModel::McShane(a));
                let low = t.times().iter().copied().fold(f64::INFINITY, f64::min);
                let tau = t.times().iter().map(|v| v - low).collect();
                TimedMetricSpace::new(x, tau, DEFAULT_TOL).expect("shifts keep the Lipschitz bound")
            }
        }
    }
}

fn parse_side(token: &str) -> Option<(usize, SideSpec)> {
    let (k, rest) = token.strip_prefix('k')?.split_once(':')?;
    let (metric, time) = rest.split_once('/')?;
    let metric = match metric {
        "graph" => MetricModel::Graph,
        m => MetricModel::Euclidean(m.strip_prefix("euclidean")?.parse().ok()?),
    };
    let time = match time {
        "untimed" => None,
        "cone" => Some(TimeSpec::Model(TimeModel::Cone)),
        t if t.starts_with("set-cone") => Some(TimeSpec::Model(TimeModel::SetCone(t["set-cone".len()..].parse().ok()?))),
        t if t.ends_with("-shifted") => {
            Some(TimeSpec::ShiftedMcShane(t.strip_prefix("mcshane")?.strip_suffix("-shifted")?.parse().ok()?))
        }
        t => Some(TimeSpec::Model(TimeModel::McShane(t.strip_prefix("mcshane")?.parse().ok()?))),
    };
    Some((k.parse().ok()?, SideSpec { n: 0, metric, time }))
}

/// Regenerates the spaces of a report row from its `seed`, `model` and
/// sizes (`n1`, `n2`, then the third size for triangle rows, which must be
/// supplied in `sizes`). Returns `None` if the descriptor does not parse.
pub fn rebuild_spaces(seed: u64, model: &str, sizes: &[usize]) -> Option<Vec<TimedMetricSpace>> {
    let tokens: Vec<&str> = model.split_whitespace().collect();
    if tokens.len() != sizes.len() {
        return None;
    }
    tokens
        .iter()
        .zip(sizes)
        .map(|(tok, &n)| {
            let (k, mut side) = parse_side(tok)?;
            side.n = n;
            Some(side.build(seed, k))
        })
        .collect()
}

#[derive(Clone, Copy)]
enum TimeChoice {
    None,
    Cone,
    SetCone,
    Any,
    Shifted,
}

fn draw_side(rng: &mut ChaCha8Rng, nmax: usize, time: TimeChoice) -> SideSpec {
    let n = rng.gen_range(1..=nmax);
    let metric = if rng.gen_bool(0.5) { MetricModel::Euclidean(rng.gen_range(1..=3)) } else { MetricModel::Graph };
    let set_cone = |rng: &mut ChaCha8Rng| TimeSpec::Model(TimeModel::SetCone(rng.gen_range(1..=n)));
    let time = match time {
        TimeChoice::None => None,
        TimeChoice::Cone => Some(TimeSpec::Model(TimeModel::Cone)),
        TimeChoice::SetCone => Some(set_cone(rng)),
        TimeChoice::Any => Some(match rng.gen_range(0..3) {
            0 => TimeSpec::Model(TimeModel::Cone),
            1 => set_cone(rng),
            _ => TimeSpec::Model(TimeModel::McShane(rng.gen_range(1..=3))),
        }),
        TimeChoice::Shifted => Some(match rng.gen_range(0..3) {
            0 => TimeSpec::Model(TimeModel::Cone),
            1 => set_cone(rng),
            _ => TimeSpec::ShiftedMcShane(rng.gen_range(1..=3)),
        }),
    };
    SideSpec { n, metric, time }
}

fn row(suite: Suite, trial: u64, seed: u64, model: String, spaces: [&TimedMetricSpace; 2], check: Check) -> ReportRow {
    let class = |t: &TimedMetricSpace| classify(t, DEFAULT_TOL).as_str().to_string();
    ReportRow {
        suite: suite.as_str().to_string(),
        trial,
        seed,
        model,
        n1: spaces[0].n(),
        n2: spaces[1].n(),
        class1: class(spaces[0]),
        class2: class(spaces[1]),
        quantities: check.quantities,
        inequality: check.inequality,
        slack: check.slack,
        asserted: check.asserted,
        pass: check.slack >= -check.allowance,
    }
}

/// The big bang pair used as trial 0 of the `bb` suite: two points at
/// distance 1 with times (0, 1) against a single point.
pub fn worked_bb_pair() -> (TimedMetricSpace, TimedMetricSpace) {
    let two = FiniteMetricSpace::from_matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]], DEFAULT_TOL).unwrap();
    (
        TimedMetricSpace::new(two, vec![0.0, 1.0], DEFAULT_TOL).unwrap(),
        TimedMetricSpace::untimed(FiniteMetricSpace::point("p")),
    )
}

fn run_trial(suite: Suite, trial: u64, cfg: &CampaignConfig) -> Result<Vec<ReportRow>, CampaignError> {
    let seed = trial_seed(cfg.seed, suite, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (budget, tol, nmax) = (cfg.budget, cfg.tol, cfg.nmax);
    let fail = |e: CheckError| match (e.kind, e.engine) {
        (_, Some(source)) => CampaignError::Engine { suite: suite.as_str(), trial, seed, source },
        (kind, None) => CampaignError::BudgetTooSmall {
            suite: suite.as_str(),
            trial,
            seed,
            kind: kind.unwrap_or(DistanceKind::TauH),
            budget,
        },
    };

    let pair = |rng: &mut ChaCha8Rng, first: TimeChoice, second: TimeChoice, k0: usize| {
        let a = draw_side(rng, nmax, first);
        let b = draw_side(rng, nmax, second);
        let model = format!("{} {}", a.describe(k0), b.describe(k0 + 1));
        (a.build(seed, k0), b.build(seed, k0 + 1), model)
    };

    let rows = match suite {
        Suite::Sandwich => {
            let (a, b, model) = pair(&mut rng, TimeChoice::None, TimeChoice::None, 0);
            let c = check_sandwich(a.base(), b.base(), budget, tol).map_err(fail)?;
            vec![row(suite, trial, seed, model, [&a, &b], c)]
        }
        Suite::Order => {
            let (a, b, model) = pair(&mut rng, TimeChoice::Any, TimeChoice::Any, 0);
            let c = check_order(&a, &b, budget, tol).map_err(fail)?;
            vec![row(suite, trial, seed, model, [&a, &b], c)]
        }
        Suite::Bb => {
            let (a, b, model) = if trial == 0 {
                let (a, b) = worked_bb_pair();
                (a, b, "worked-example".to_string())
            } else {
                pair(&mut rng, TimeChoice::Cone, TimeChoice::Cone, 0)
            };
            let c = check_bb(&a, &b, budget, tol).map_err(fail)?;
            vec![row(suite, trial, seed, model, [&a, &b], c)]
        }
        Suite::Fd => {
            let (a, b, model) = pair(&mut rng, TimeChoice::SetCone, TimeChoice::SetCone, 0);
            let c = check_fd(&a, &b, budget, tol).map_err(fail)?;
            vec![row(suite, trial, seed, model, [&a, &b], c)]
        }
        Suite::Limits => {
            let (x, y, model) = pair(&mut rng, TimeChoice::Cone, TimeChoice::Shifted, 0);
            let bb = check_bb_limit(&x, &y, budget, tol).map_err(fail)?;
            let bb = row(suite, trial, seed, model, [&x, &y], bb);
            let (x, y, model) = pair(&mut rng, TimeChoice::SetCone, TimeChoice::Any, 2);
            let fd = check_fd_limit(&x, &y, budget, tol).map_err(fail)?;
            vec![bb, row(suite, trial, seed, model, [&x, &y], fd)]
        }
        Suite::Certificates => {
            let (a, b, model) = pair(&mut rng, TimeChoice::Any, TimeChoice::Any, 0);
            let c = check_certificates(&a, &b, budget, &mut rng).map_err(fail)?;
            vec![row(suite, trial, seed, model, [&a, &b], c)]
        }
        Suite::TriangleExplore => {
            let specs: Vec<SideSpec> = (0..3).map(|_| draw_side(&mut rng, nmax, TimeChoice::Any)).collect();
            let model = specs.iter().enumerate().map(|(k, s)| s.describe(k)).collect::<Vec<_>>().join(" ");
            let ts: Vec<TimedMetricSpace> = specs.iter().enumerate().map(|(k, s)| s.build(seed, k)).collect();
            let c = check_triangle([&ts[0], &ts[1], &ts[2]], budget).map_err(fail)?;
            vec![row(suite, trial, seed, model, [&ts[0], &ts[1]], c)]
        }
        Suite::All => unreachable!("expanded by run_suite"),
    };
    Ok(rows)
}

/// Runs the configured suite (or every suite for `all`). Rows are ordered
/// by suite, then trial, whatever the thread count.
pub fn run_suite(cfg: &CampaignConfig) -> Result<Vec<ReportRow>, CampaignError> {
    cfg.validate()?;
    let suites: Vec<Suite> = if cfg.suite == Suite::All { Suite::EACH.to_vec() } else { vec![cfg.suite] };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| CampaignError::InvalidConfig(e.to_string()))?;
    let mut rows = Vec::new();
    for suite in suites {
        let results: Vec<Result<Vec<ReportRow>, CampaignError>> =
            pool.install(|| (0..cfg.trials).into_par_iter().map(|t| run_trial(suite, t, cfg)).collect());
        for r in results {
            rows.extend(r?);
        }
    }
    Ok(rows)
}

/// Per-suite pass counts and the largest logged ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub lines: Vec<String>,
    pub failures: usize,
}

pub fn summarize(rows: &[ReportRow]) -> Summary {
    let mut lines = Vec::new();
    let mut failures = 0;
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in rows {
        let key = (r.suite.clone(), r.inequality.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    for (suite, inequality) in keys {
        let group: Vec<&ReportRow> = rows.iter().filter(|r| r.suite == suite && r.inequality == inequality).collect();
        let failed = group.iter().filter(|r| r.failed()).count();
        failures += failed;
        let min_slack = group.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
        let mut line = if group[0].asserted {
            format!("{suite}: {}/{} pass, min slack {min_slack} [{inequality}]", group.len() - failed, group.len())
        } else {
            format!("{suite}: {} rows, min slack {min_slack} [{inequality}]", group.len())
        };
        let worst = group.iter().filter_map(|r| r.quantity("ratio")).map(|q| q.upper).fold(f64::NAN, f64::max);
        if !worst.is_nan() {
            line.push_str(&format!(", worst ratio {worst}"));
        }
        lines.push(line);
    }
    Summary { lines, failures }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_bb_row() {
        let (a, b) = worked_bb_pair();
        let c = check_bb(&a, &b, DEFAULT_BUDGET, DEFAULT_ASSERT_TOL).unwrap();
        assert_eq!(c.quantities[0], Quantity::scalar("tau_h", 1.0));
        assert_eq!(c.quantities[1], Quantity::interval("bb_gh", 0.5, 1.0));
        assert_eq!(c.slack, 1.0);
    }

    #[test]
    fn identical_pairs_have_zero_distances() {
        let x = random_metric_space(5, 4, MetricModel::Graph);
        let t = random_time_function(6, &x, TimeModel::McShane(2));
        let c = check_order(&t, &t, DEFAULT_BUDGET, DEFAULT_ASSERT_TOL).unwrap();
        assert!(c.quantities.iter().all(|q| q.upper == 0.0));
        assert_eq!(c.slack, 0.0);
    }

    #[test]
    fn config_limits() {
        let mut cfg = CampaignConfig::new(Suite::Sandwich, 1, 5, 0);
        assert!(matches!(run_suite(&cfg), Err(CampaignError::InvalidConfig(_))));
        cfg.nmax = 2;
        cfg.trials = 0;
        assert!(run_suite(&cfg).is_err());
    }

    #[test]
    fn small_budget_is_an_error() {
        let mut cfg = CampaignConfig::new(Suite::Sandwich, 4, 4, 3);
        cfg.budget = 1;
        assert!(matches!(run_suite(&cfg), Err(CampaignError::BudgetTooSmall { .. })));
    }

    #[test]
    fn trial_seeds_differ() {
        assert_ne!(trial_seed(1, Suite::Bb, 0), trial_seed(1, Suite::Bb, 1));
        assert_ne!(trial_seed(1, Suite::Bb, 0), trial_seed(1, Suite::Fd, 0));
        assert_eq!(trial_seed(1, Suite::Bb, 7), trial_seed(1, Suite::Bb, 7));
    }

    #[test]
    fn rows_recreate_from_descriptors() {
        let cfg = CampaignConfig::new(Suite::Order, 3, 3, 11);
        for r in run_suite(&cfg).unwrap() {
            let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
            let a = draw_side(&mut rng, 3, TimeChoice::Any);
            let b = draw_side(&mut rng, 3, TimeChoice::Any);
            assert_eq!(r.model, format!("{} {}", a.describe(0), b.describe(1)));
            assert_eq!((a.n, b.n), (r.n1, r.n2));
            let spaces = rebuild_spaces(r.seed, &r.model, &[r.n1, r.n2]).unwrap();
            let c = check_order(&spaces[0], &spaces[1], DEFAULT_BUDGET, DEFAULT_ASSERT_TOL).unwrap();
            assert_eq!(c.quantities, r.quantities);
        }
    }
}
