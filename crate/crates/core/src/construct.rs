//! Explicit common spaces, enumeration certificates, and seeded generators
//! of spaces, time functions and converging sequences.
//!
//! All generators use ChaCha8 seeded from a `u64`, so outputs are
//! bit-for-bit reproducible on every platform.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::correspondence::Correspondence;
use crate::embed::Enumeration;
use crate::correspondence::MinimalWalker;
use crate::engine::{cross_offsets, timed_frechet_cost, EXACT_EPS};
use crate::space::{
    classify, structure_report, FiniteMetricSpace, TimeClass, TimedMetricSpace, ValidationError, DEFAULT_TOL,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstructError {
    #[error("offset too small for gluing: {0}")]
    DeltaTooSmall(ValidationError),
    #[error("correspondence is {found:?}, spaces have {expected:?} points")]
    SizeMismatch { expected: (usize, usize), found: (usize, usize) },
    #[error("the set is empty")]
    EmptySet,
    #[error("index {index} out of range for a space of {n} points")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid sequence spec: {0}")]
    InvalidSpec(String),
}

// ---------------------------------------------------------------------------
// Gluing

/// Two spaces placed isometrically in a common space `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct GluedSpace {
    pub z: FiniteMetricSpace,
    pub inject1: Vec<usize>,
    pub inject2: Vec<usize>,
}

/// `min over (a, b) in pairs of d1(x, a) + d2(b, y)`, plus `delta`.
pub fn cross_distance(
    x1: &FiniteMetricSpace,
    x2: &FiniteMetricSpace,
    pairs: &[(usize, usize)],
    delta: f64,
    x: usize,
    y: usize,
) -> f64 {
    let mut best = f64::INFINITY;
    for &(a, b) in pairs {
        best = best.min(x1.dist(x, a) + x2.dist(b, y));
    }
    best + delta
}

/// Disjoint union of `x1` and `x2` with cross distances through `r` at
/// offset `delta`. Points are labeled `1.<label>` and `2.<label>`.
pub fn glue_by_correspondence(
    x1: &FiniteMetricSpace,
    x2: &FiniteMetricSpace,
    r: &Correspondence,
    delta: f64,
) -> Result<GluedSpace, ConstructError> {
    glue_with_tol(x1, x2, r, delta, DEFAULT_TOL)
}

pub fn glue_with_tol(
    x1: &FiniteMetricSpace,
    x2: &FiniteMetricSpace,
    r: &Correspondence,
    delta: f64,
    tol: f64,
) -> Result<GluedSpace, ConstructError> {
    let (n1, n2) = (x1.n(), x2.n());
    if r.sizes() != (n1, n2) {
        return Err(ConstructError::SizeMismatch { expected: (n1, n2), found: r.sizes() });
    }
    let m = cross_offsets(r.pairs(), x1, x2);
    let n = n1 + n2;
    let mut d = alloc::vec![0.0; n * n];
    for i in 0..n1 {
        for j in 0..n1 {
            d[i * n + j] = x1.dist(i, j);
        }
    }
    for i in 0..n2 {
        for j in 0..n2 {
            d[(n1 + i) * n + n1 + j] = x2.dist(i, j);
        }
    }
    for x in 0..n1 {
        for y in 0..n2 {
            let c = m[x * n2 + y] + delta;
            d[x * n + n1 + y] = c;
            d[(n1 + y) * n + x] = c;
        }
    }
    let labels = x1
        .labels()
        .iter()
        .map(|l| format!("1.{l}"))
        .chain(x2.labels().iter().map(|l| format!("2.{l}")))
        .collect();
    let z = FiniteMetricSpace::from_flat(labels, d, tol).map_err(ConstructError::DeltaTooSmall)?;
    Ok(GluedSpace { z, inject1: (0..n1).collect(), inject2: (n1..n).collect() })
}

/// Lists the pairs of `r` in order; the first and second components give a
/// covering enumeration of each side.
pub fn enumerations_from_correspondence(r: &Correspondence) -> (Enumeration, Enumeration) {
    let (a, b) = r.pairs().iter().copied().unzip();
    (Enumeration::new(a), Enumeration::new(b))
}

// ---------------------------------------------------------------------------
// Spaces and time functions

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricModel {
    /// Uniform points in the unit cube of the given dimension.
    Euclidean(usize),
    /// Shortest-path metric of a complete graph with random weights.
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeModel {
    /// Distance to one random point.
    Cone,
    /// Distance to a random set of the given size.
    SetCone(usize),
    /// Clipped McShane extension from the given number of random anchors.
    McShane(usize),
}

/// Points closer than this are resampled by the Euclidean model.
const MIN_SEPARATION: f64 = 1e-6;

fn euclidean(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<f64> {
    let k = k.max(1);
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n);
    let dist = |a: &[f64], b: &[f64]| libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum());
    while pts.len() < n {
        let p: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
        if pts.iter().all(|q| dist(q, &p) > MIN_SEPARATION) {
            pts.push(p);
        }
    }
    let mut d = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = dist(&pts[i], &pts[j]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

/// Floyd-Warshall sweeps until nothing changes, so every triangle holds in
/// floating point. The result is symmetric when the input is.
pub fn shortest_path_completion(d: &mut [f64], n: usize) {
    loop {
        let mut changed = false;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i * n + k] + d[k * n + j];
                    if via < d[i * n + j] {
                        d[i * n + j] = via;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let v = d[i * n + j].min(d[j * n + i]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
}

fn graph(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut d = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = rng.gen_range(0.1..1.0);
            d[i * n + j] = w;
            d[j * n + i] = w;
        }
    }
    shortest_path_completion(&mut d, n);
    d
}

/// A seeded random metric space on `n` points.
///
/// # Panics
/// If `n == 0`.
pub fn random_metric_space(seed: u64, n: usize, model: MetricModel) -> FiniteMetricSpace {
    assert!(n >= 1, "a metric space needs at least one point");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = match model {
        MetricModel::Euclidean(k) => euclidean(&mut rng, n, k),
        MetricModel::Graph => graph(&mut rng, n),
    };
    FiniteMetricSpace::from_flat(crate::space::default_labels(n), d, DEFAULT_TOL)
        .expect("generated spaces are metrics")
}

fn distance_to_set(x: &FiniteMetricSpace, set: &[usize]) -> Vec<f64> {
    (0..x.n()).map(|i| x.dist_to_set(set, i)).collect()
}

/// A seeded random time function on `x`.
pub fn random_time_function(seed: u64, x: &FiniteMetricSpace, model: TimeModel) -> TimedMetricSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.n();
    let tau = match model {
        TimeModel::Cone => distance_to_set(x, &[rng.gen_range(0..n)]),
        TimeModel::SetCone(s) => {
            let mut set = sample(&mut rng, n, s.clamp(1, n)).into_vec();
            set.sort_unstable();
            distance_to_set(x, &set)
        }
        TimeModel::McShane(a) => {
            let a = a.max(1);
            let spread = x.diameter().max(1.0);
            let anchors: Vec<(usize, f64)> = (0..a)
                .map(|_| (rng.gen_range(0..n), rng.gen_range(-0.5 * spread..spread)))
                .collect();
            (0..n)
                .map(|i| {
                    let m = anchors.iter().map(|&(k, v)| v + x.dist(k, i)).fold(f64::INFINITY, f64::min);
                    m.max(0.0)
                })
                .collect()
        }
    };
    TimedMetricSpace::new(x.clone(), tau, DEFAULT_TOL).expect("generated time functions are 1-Lipschitz")
}

/// `tau = d(S, .)`; a big bang when `S` is a single point.
pub fn make_future_developed(x: &FiniteMetricSpace, set: &[usize]) -> Result<TimedMetricSpace, ConstructError> {
    if set.is_empty() {
        return Err(ConstructError::EmptySet);
    }
    if let Some(&index) = set.iter().find(|&&i| i >= x.n()) {
        return Err(ConstructError::IndexOutOfRange { index, n: x.n() });
    }
    let tau = distance_to_set(x, set);
    Ok(TimedMetricSpace::new(x.clone(), tau, DEFAULT_TOL).expect("distance functions are 1-Lipschitz"))
}

// ---------------------------------------------------------------------------
// Sequences

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceFamily {
    PerturbGeometric,
    RefineBbCone,
    CollapseTime,
}

impl SequenceFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            SequenceFamily::PerturbGeometric => "perturb-geometric",
            SequenceFamily::RefineBbCone => "refine-bb-cone",
            SequenceFamily::CollapseTime => "collapse-time",
        }
    }
}

impl core::str::FromStr for SequenceFamily {
    type Err = ConstructError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [SequenceFamily::PerturbGeometric, SequenceFamily::RefineBbCone, SequenceFamily::CollapseTime]
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| ConstructError::InvalidSpec(format!("unknown family `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    pub family: SequenceFamily,
    pub base: TimedMetricSpace,
    pub length: usize,
    pub rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub elements: Vec<TimedMetricSpace>,
    pub limit: TimedMetricSpace,
}

/// Size of the perturbation at step 0, relative to the smallest distance.
pub const PERTURB_AMPLITUDE: f64 = 0.1;

fn min_distance(x: &FiniteMetricSpace) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..x.n() {
        for j in (i + 1)..x.n() {
            m = m.min(x.dist(i, j));
        }
    }
    m
}

/// Smallest positive timed Fréchet cost of a minimal correspondence from `t`
/// to itself, or `None` when the scan does not finish within budget.
///
/// Perturbations with `|d_j - d|` and `|tau_j - tau|` at most half this gap
/// keep self-matching correspondences optimal against the base.
pub fn rigidity_gap(t: &TimedMetricSpace) -> Option<f64> {
    let mut walker = MinimalWalker::new(t.n(), t.n());
    let mut gap = f64::INFINITY;
    let mut seen = 0u64;
    while let Some(p) = walker.advance() {
        seen += 1;
        if seen > RIGIDITY_BUDGET {
            return None;
        }
        let c = timed_frechet_cost(p, t, t);
        if c > EXACT_EPS {
            gap = gap.min(c);
        }
    }
    walker.is_supported().then_some(gap)
}

const RIGIDITY_BUDGET: u64 = 1_000_000;

fn invalid(msg: impl Into<String>) -> ConstructError {
    ConstructError::InvalidSpec(msg.into())
}

/// Builds the elements `T_0, ..., T_{length-1}` of a converging sequence and
/// its limit.
///
/// * `perturb-geometric`: `d_j = d * (1 + rate^j * nu)` with seeded
///   `nu_ij = |h_i - h_j| / d_ij`, then shortest-path completion. The `h_i`
///   vanish on the zero set and stay below a quarter of the smallest distance
///   and half the [`rigidity_gap`], so `d_tauH(T_j, base)` is exactly
///   `rate^j * d_tauH(T_0, base)` when the base is small enough to scan. Big bang
///   and future-developed bases get `tau_j` rebuilt as the distance to the
///   same zero set; other bases get the largest function below `tau` that is
///   1-Lipschitz for `d_j`. Limit: the base.
/// * `refine-bb-cone`: `T_j` adds `j` pendant points at distance
///   `eps_j = rate^j * min_dist / 2` from seeded anchors, timed as the cone
///   from the big bang point. Limit: the base.
/// * `collapse-time`: `tau_j = rate^j * tau` on the base metric. Limit: the
///   base metric with `tau = 0`.
pub fn build_sequence(spec: &SequenceSpec) -> Result<Sequence, ConstructError> {
    if spec.length == 0 {
        return Err(invalid("length must be at least 1"));
    }
    if !(spec.rate > 0.0 && spec.rate < 1.0) {
        return Err(invalid("rate must lie in (0, 1)"));
    }
    let base = &spec.base;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let scale = |j: usize| libm::pow(spec.rate, j as f64);
    match spec.family {
        SequenceFamily::PerturbGeometric => {
            let class = classify(base, DEFAULT_TOL);
            let zero = structure_report(base, DEFAULT_TOL).zero_set;
            let x = base.base();
            let n = x.n();
            let mut amp = if n > 1 { PERTURB_AMPLITUDE * min_distance(x) } else { 0.0 };
            if let Some(gap) = rigidity_gap(base) {
                amp = amp.min(gap / 2.0);
            }
            // Constant on the zero set, so distances to it shift linearly in eta.
            let mut h: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * amp).collect();
            if class.is_future_developed() {
                for &q in &zero {
                    h[q] = 0.0;
                }
            }
            let mut elements = Vec::with_capacity(spec.length);
            for j in 0..spec.length {
                let eta = scale(j);
                let mut d = alloc::vec![0.0; n * n];
                for i in 0..n {
                    for k in 0..n {
                        if i != k {
                            d[i * n + k] = x.dist(i, k) + eta * (h[i] - h[k]).abs();
                        }
                    }
                }
                shortest_path_completion(&mut d, n);
                let xj = FiniteMetricSpace::from_flat(x.labels().to_vec(), d, DEFAULT_TOL)
                    .map_err(|e| invalid(format!("perturbed metric invalid: {e}")))?;
                let tau = if class.is_future_developed() {
                    distance_to_set(&xj, &zero)
                } else {
                    (0..n)
                        .map(|i| (0..n).map(|k| base.tau(k) + xj.dist(i, k)).fold(f64::INFINITY, f64::min))
                        .collect()
                };
                let tj = TimedMetricSpace::new(xj, tau, DEFAULT_TOL)
                    .map_err(|e| invalid(format!("perturbed time invalid: {e}")))?;
                if classify(&tj, DEFAULT_TOL) != class {
                    return Err(invalid(format!("element {j} changed time class")));
                }
                elements.push(tj);
            }
            Ok(Sequence { elements, limit: base.clone() })
        }
        SequenceFamily::RefineBbCone => {
            let p = base
                .big_bang_point(DEFAULT_TOL)
                .ok_or_else(|| invalid("refine-bb-cone needs a big bang base"))?;
            let x = base.base();
            let n = x.n();
            let anchors: Vec<usize> = (0..spec.length.saturating_sub(1)).map(|_| rng.gen_range(0..n)).collect();
            let mut elements = Vec::with_capacity(spec.length);
            for j in 0..spec.length {
                let eps = refine_offset(base, spec.rate, j);
                if j > 0 && eps <= 10.0 * DEFAULT_TOL {
                    return Err(invalid("refinement offsets fall below the tolerance"));
                }
                let m = n + j;
                let anchor = |i: usize| if i < n { i } else { anchors[i - n] };
                let offset = |i: usize| if i < n { 0.0 } else { eps };
                let mut d = alloc::vec![0.0; m * m];
                for a in 0..m {
                    for b in 0..m {
                        if a != b {
                            d[a * m + b] = (offset(a) + offset(b)) + x.dist(anchor(a), anchor(b));
                        }
                    }
                }
                let labels = x.labels().iter().cloned().chain((0..j).map(|k| format!("r{k}"))).collect();
                let xj = FiniteMetricSpace::from_flat(labels, d, DEFAULT_TOL)
                    .map_err(|e| invalid(format!("refined metric invalid: {e}")))?;
                let tau = distance_to_set(&xj, &[p]);
                elements.push(TimedMetricSpace::new(xj, tau, DEFAULT_TOL).expect("cones are 1-Lipschitz"));
            }
            Ok(Sequence { elements, limit: base.clone() })
        }
        SequenceFamily::CollapseTime => {
            let elements = (0..spec.length)
                .map(|j| {
                    let s = scale(j);
                    let tau = base.times().iter().map(|t| s * t).collect();
                    TimedMetricSpace::new(base.base().clone(), tau, DEFAULT_TOL).expect("scaled times stay 1-Lipschitz")
                })
                .collect();
            Ok(Sequence { elements, limit: TimedMetricSpace::untimed(base.base().clone()) })
        }
    }
}

/// Distance `eps_j` from the pendant points of `refine-bb-cone` element `j`
/// to their anchors.
pub fn refine_offset(base: &TimedMetricSpace, rate: f64, j: usize) -> f64 {
    let sep = if base.n() > 1 { min_distance(base.base()) } else { 1.0 };
    libm::pow(rate, j as f64) * sep / 2.0
}

/// The class each element of a built sequence is expected to keep.
pub fn declared_class(spec: &SequenceSpec, j: usize) -> TimeClass {
    match spec.family {
        SequenceFamily::RefineBbCone => TimeClass::BigBang,
        SequenceFamily::CollapseTime if j > 0 && spec.base.tau_max() > 0.0 => TimeClass::Generic,
        _ => classify(&spec.base, DEFAULT_TOL),
    }
}
