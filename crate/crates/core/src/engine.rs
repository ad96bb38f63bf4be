//! Distance computations by minimisation over correspondences.
//!
//! For finite spaces a pair of (timed) Fréchet maps is determined, as far as
//! the Hausdorff distance of the images is concerned, by the set of paired
//! coordinates `{(x_k, y_k)}`, which is a correspondence `R`. Comparing the
//! images point by point gives the per-point cost
//!
//! ```text
//! rho_R(x, y) = max over (a, b) in R of |d1(a, x) - d2(b, y)|
//! ```
//!
//! (with `|tau1(x) - tau2(y)|` joining the max for the timed version), and
//! the Hausdorff distance of the images is the max-min combination of
//! `rho_R`. Shrinking `R` can only lower this cost and distortion is
//! monotone the other way, so the Gromov-Hausdorff, Fréchet and intrinsic
//! timed-Hausdorff distances are all attained on minimal correspondences and
//! are computed exactly when the minimal stream fits in the budget.
//!
//! Pointed and future-developed distances are sums of two Hausdorff terms.
//! For these the engine glues the two spaces along `R` at offset
//! `dis(R) / 2` and reports the best glued value as `upper`; `upper / 2` is a
//! proven lower bound for the true value, so the result is an interval.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::correspondence::{pairs_distortion, Correspondence, MinimalWalker};
use crate::embed::hausdorff_max_min;
use crate::space::{classify, structure_report, FiniteMetricSpace, TimedMetricSpace, DEFAULT_TOL};

/// Default number of correspondences an exhaustive search may examine.
pub const DEFAULT_BUDGET: u64 = 5_000_000;

/// Slack used when checking that an interval has collapsed to a point.
pub const EXACT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistanceKind {
    Gh,
    KappaGh,
    TauH,
    PtGh,
    BbGh,
    FdHh,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 6] = [
        DistanceKind::Gh,
        DistanceKind::KappaGh,
        DistanceKind::TauH,
        DistanceKind::PtGh,
        DistanceKind::BbGh,
        DistanceKind::FdHh,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::Gh => "gh",
            DistanceKind::KappaGh => "kappa-gh",
            DistanceKind::TauH => "tau-h",
            DistanceKind::PtGh => "pt-gh",
            DistanceKind::BbGh => "bb-gh",
            DistanceKind::FdHh => "fd-hh",
        }
    }

    /// Whether exhaustive search yields the exact value.
    pub fn is_exactly_computable(self) -> bool {
        matches!(self, DistanceKind::Gh | DistanceKind::KappaGh | DistanceKind::TauH)
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown distance kind `{0}`")]
pub struct UnknownKind(pub alloc::string::String);

impl FromStr for DistanceKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DistanceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| UnknownKind(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::First => "first",
            Side::Second => "second",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("{0} space is not a big bang")]
    NotBigBang(Side),
    #[error("{0} space is not future developed")]
    NotFutureDeveloped(Side),
    #[error("basepoint {index} is out of range for the {side} space")]
    InvalidBasepoint { side: Side, index: usize },
}

/// Witness for a reported `upper` value.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub correspondence: Correspondence,
    /// Basepoint pair for pointed and big bang kinds.
    pub basepoints: Option<(usize, usize)>,
    /// Zero sets for the future-developed kind. The correspondence restricted
    /// to their product covers both.
    pub zero_sets: Option<(Vec<usize>, Vec<usize>)>,
}

impl Certificate {
    fn plain(correspondence: Correspondence) -> Self {
        Certificate { correspondence, basepoints: None, zero_sets: None }
    }
}

/// A certified interval `[lower, upper]` for one distance.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceResult {
    pub kind: DistanceKind,
    pub lower: f64,
    pub upper: f64,
    pub is_exact: bool,
    pub certificate: Certificate,
    pub explored: u64,
    pub budget_exhausted: bool,
}

impl DistanceResult {
    /// The exact value, when the interval has collapsed.
    pub fn value(&self) -> Option<f64> {
        self.is_exact.then_some(self.upper)
    }
}

// ---------------------------------------------------------------------------
// Per-correspondence objectives

fn rho_matrix(
    pairs: &[(usize, usize)],
    x1: &FiniteMetricSpace,
    x2: &FiniteMetricSpace,
    times: Option<(&[f64], &[f64])>,
) -> Vec<f64> {
    let (n1, n2) = (x1.n(), x2.n());
    let mut rho = alloc::vec![0.0f64; n1 * n2];
    for x in 0..n1 {
        let rx = x1.row(x);
        for y in 0..n2 {
            let ry = x2.row(y);
            let mut c = match times {
                Some((t1, t2)) => (t1[x] - t2[y]).abs(),
                None => 0.0,
            };
            for &(a, b) in pairs {
                c = c.max((rx[a] - ry[b]).abs());
            }
            rho[x * n2 + y] = c;
        }
    }
    rho
}

/// Hausdorff distance between the Fréchet images along the enumerations
/// induced by `pairs`.
pub fn frechet_cost(pairs: &[(usize, usize)], x1: &FiniteMetricSpace, x2: &FiniteMetricSpace) -> f64 {
    let rho = rho_matrix(pairs, x1, x2, None);
    hausdorff_max_min(x1.n(), x2.n(), |x, y| rho[x * x2.n() + y])
}

/// Hausdorff distance between the timed Fréchet images along the
/// enumerations induced by `pairs`.
pub fn timed_frechet_cost(pairs: &[(usize, usize)], t1: &TimedMetricSpace, t2: &TimedMetricSpace) -> f64 {
    let rho = rho_matrix(pairs, t1.base(), t2.base(), Some((t1.times(), t2.times())));
    hausdorff_max_min(t1.n(), t2.n(), |x, y| rho[x * t2.n() + y])
}

/// `min over (a, b) in pairs of d1(x, a) + d2(b, y)`, the glued cross
/// distance without its offset.
pub(crate) fn cross_offsets(
    pairs: &[(usize, usize)],
    x1: &FiniteMetricSpace,
    x2: &FiniteMetricSpace,
) -> Vec<f64> {
    let (n1, n2) = (x1.n(), x2.n());
    let mut m = alloc::vec![f64::INFINITY; n1 * n2];
    for x in 0..n1 {
        for y in 0..n2 {
            let mut best = f64::INFINITY;
            for &(a, b) in pairs {
                best = best.min(x1.dist(x, a) + x2.dist(b, y));
            }
            m[x * n2 + y] = best;
        }
    }
    m
}

/// `d_H(X1, X2) + d(p1, p2)` in the space glued along `pairs` at offset
/// `dis / 2`. `pairs` must contain `(p1, p2)` and cover both sides.
pub fn glued_pointed_objective(
    pairs: &[(usize, usize)],
    x1: &FiniteMetricSpace,
    x2: &FiniteMetricSpace,
    p1: usize,
    p2: usize,
) -> f64 {
    let delta = pairs_distortion(pairs, x1, x2) / 2.0;
    let m = cross_offsets(pairs, x1, x2);
    let n2 = x2.n();
    let hx = hausdorff_max_min(x1.n(), n2, |x, y| m[x * n2 + y] + delta);
    hx + (m[p1 * n2 + p2] + delta)
}

/// `d_H(X1, X2) + d_H(Y1, Y2)` in the space glued along `pairs` at offset
/// `dis / 2`.
pub fn glued_fd_objective(
    pairs: &[(usize, usize)],
    x1: &FiniteMetricSpace,
    x2: &FiniteMetricSpace,
    y1: &[usize],
    y2: &[usize],
) -> f64 {
    let delta = pairs_distortion(pairs, x1, x2) / 2.0;
    let m = cross_offsets(pairs, x1, x2);
    let n2 = x2.n();
    let hx = hausdorff_max_min(x1.n(), n2, |x, y| m[x * n2 + y] + delta);
    let hy = hausdorff_max_min(y1.len(), y2.len(), |i, j| m[y1[i] * n2 + y2[j]] + delta);
    hx + hy
}

/// Re-evaluates a certificate from scratch for the given kind.
pub fn evaluate_certificate(
    kind: DistanceKind,
    cert: &Certificate,
    t1: &TimedMetricSpace,
    t2: &TimedMetricSpace,
) -> f64 {
    let pairs = cert.correspondence.pairs();
    let (x1, x2) = (t1.base(), t2.base());
    match kind {
        DistanceKind::Gh => pairs_distortion(pairs, x1, x2) / 2.0,
        DistanceKind::KappaGh => frechet_cost(pairs, x1, x2),
        DistanceKind::TauH => timed_frechet_cost(pairs, t1, t2),
        DistanceKind::PtGh | DistanceKind::BbGh => {
            let (p1, p2) = cert.basepoints.unwrap_or((0, 0));
            glued_pointed_objective(pairs, x1, x2, p1, p2)
        }
        DistanceKind::FdHh => match &cert.zero_sets {
            Some((y1, y2)) => glued_fd_objective(pairs, x1, x2, y1, y2),
            None => f64::INFINITY,
        },
    }
}

// ---------------------------------------------------------------------------
// Lower bounds

/// `| diam1 - diam2 | / 2`
pub fn diameter_bound(x1: &FiniteMetricSpace, x2: &FiniteMetricSpace) -> f64 {
    ((x1.diameter() - x2.diameter()) / 2.0).abs()
}

/// One-dimensional Hausdorff distance between the sets of time values.
pub fn time_range_bound(t1: &TimedMetricSpace, t2: &TimedMetricSpace) -> f64 {
    hausdorff_max_min(t1.n(), t2.n(), |x, y| (t1.tau(x) - t2.tau(y)).abs())
}

/// Cheap lower bounds valid for every distance of the given kind.
pub fn simple_lower_bounds(kind: DistanceKind, t1: &TimedMetricSpace, t2: &TimedMetricSpace) -> f64 {
    let gh = diameter_bound(t1.base(), t2.base());
    match kind {
        DistanceKind::TauH => gh.max(time_range_bound(t1, t2)),
        _ => gh,
    }
}

// ---------------------------------------------------------------------------
// Exhaustive search

struct Scan {
    best: Option<(f64, Vec<(usize, usize)>)>,
    explored: u64,
    exhausted: bool,
}

/// Minimises `cost` over minimal correspondences, keeping the first optimum
/// in lexicographic order.
fn scan_minimal(n1: usize, n2: usize, budget: u64, mut cost: impl FnMut(&[(usize, usize)]) -> f64) -> Scan {
    let mut walker = MinimalWalker::new(n1, n2);
    let mut scan = Scan { best: None, explored: 0, exhausted: !walker.is_supported() };
    loop {
        if scan.explored >= budget {
            scan.exhausted |= walker.advance().is_some();
            break;
        }
        let Some(pairs) = walker.advance() else { break };
        scan.explored += 1;
        let value = cost(pairs);
        if scan.best.as_ref().map_or(true, |(b, _)| value < *b) {
            scan.best = Some((value, pairs.to_vec()));
        }
    }
    scan
}

fn correspondence_of(n1: usize, n2: usize, pairs: Vec<(usize, usize)>) -> Correspondence {
    Correspondence::new(n1, n2, pairs).expect("search emits covering relations")
}

fn exact_or_interval(
    kind: DistanceKind,
    scan: Scan,
    n1: usize,
    n2: usize,
    fallback_lower: f64,
    fallback: impl FnOnce() -> (f64, Vec<(usize, usize)>),
) -> DistanceResult {
    let complete = !scan.exhausted && scan.best.is_some();
    let (upper, pairs) = scan.best.unwrap_or_else(fallback);
    let (lower, is_exact) = if complete { (upper, true) } else { (fallback_lower.min(upper), false) };
    DistanceResult {
        kind,
        lower,
        upper,
        is_exact,
        certificate: Certificate::plain(correspondence_of(n1, n2, pairs)),
        explored: scan.explored,
        budget_exhausted: scan.exhausted,
    }
}

fn full_pairs(n1: usize, n2: usize) -> Vec<(usize, usize)> {
    Correspondence::full(n1, n2).pairs().to_vec()
}

/// `d_GH = min over R of dis(R) / 2`.
pub fn gh_distance(x1: &FiniteMetricSpace, x2: &FiniteMetricSpace, budget: u64) -> DistanceResult {
    let (n1, n2) = (x1.n(), x2.n());
    let scan = scan_minimal(n1, n2, budget, |p| pairs_distortion(p, x1, x2) / 2.0);
    exact_or_interval(DistanceKind::Gh, scan, n1, n2, diameter_bound(x1, x2), || {
        let p = full_pairs(n1, n2);
        (pairs_distortion(&p, x1, x2) / 2.0, p)
    })
}

/// Infimum of Hausdorff distances over pairs of Fréchet embeddings.
pub fn kappa_gh_distance(x1: &FiniteMetricSpace, x2: &FiniteMetricSpace, budget: u64) -> DistanceResult {
    let (n1, n2) = (x1.n(), x2.n());
    let scan = scan_minimal(n1, n2, budget, |p| frechet_cost(p, x1, x2));
    exact_or_interval(DistanceKind::KappaGh, scan, n1, n2, diameter_bound(x1, x2), || {
        let p = full_pairs(n1, n2);
        (frechet_cost(&p, x1, x2), p)
    })
}

/// Intrinsic timed-Hausdorff distance: infimum over pairs of timed Fréchet
/// embeddings.
pub fn tau_h_distance(t1: &TimedMetricSpace, t2: &TimedMetricSpace, budget: u64) -> DistanceResult {
    let (n1, n2) = (t1.n(), t2.n());
    let scan = scan_minimal(n1, n2, budget, |p| timed_frechet_cost(p, t1, t2));
    let lower = simple_lower_bounds(DistanceKind::TauH, t1, t2);
    exact_or_interval(DistanceKind::TauH, scan, n1, n2, lower, || {
        let p = full_pairs(n1, n2);
        (timed_frechet_cost(&p, t1, t2), p)
    })
}

fn with_pair(buf: &mut Vec<(usize, usize)>, pairs: &[(usize, usize)], extra: (usize, usize)) {
    buf.clear();
    buf.extend_from_slice(pairs);
    if !pairs.contains(&extra) {
        buf.push(extra);
    }
}

/// Pointed Gromov-Hausdorff distance as a `[upper / 2, upper]` interval.
pub fn pointed_gh(
    x1: &FiniteMetricSpace,
    p1: usize,
    x2: &FiniteMetricSpace,
    p2: usize,
    budget: u64,
) -> Result<DistanceResult, EngineError> {
    if p1 >= x1.n() {
        return Err(EngineError::InvalidBasepoint { side: Side::First, index: p1 });
    }
    if p2 >= x2.n() {
        return Err(EngineError::InvalidBasepoint { side: Side::Second, index: p2 });
    }
    let (n1, n2) = (x1.n(), x2.n());
    let mut buf = Vec::new();
    let scan = scan_minimal(n1, n2, budget, |p| {
        with_pair(&mut buf, p, (p1, p2));
        glued_pointed_objective(&buf, x1, x2, p1, p2)
    });
    let complete = !scan.exhausted && scan.best.is_some();
    let (upper, pairs) = match scan.best {
        Some((v, p)) => {
            with_pair(&mut buf, &p, (p1, p2));
            (v, buf.clone())
        }
        None => {
            let p = full_pairs(n1, n2);
            (glued_pointed_objective(&p, x1, x2, p1, p2), p)
        }
    };
    let gh = gh_distance(x1, x2, budget);
    Ok(sum_interval(
        DistanceKind::PtGh,
        upper,
        gh.lower,
        complete,
        Certificate {
            correspondence: correspondence_of(n1, n2, pairs),
            basepoints: Some((p1, p2)),
            zero_sets: None,
        },
        scan.explored,
        scan.exhausted,
    ))
}

fn sum_interval(
    kind: DistanceKind,
    upper: f64,
    gh_lower: f64,
    complete: bool,
    certificate: Certificate,
    explored: u64,
    budget_exhausted: bool,
) -> DistanceResult {
    // upper / 2 bounds the true value only when `upper` is the optimum.
    let lower = if complete { gh_lower.max(upper / 2.0) } else { gh_lower }.min(upper);
    DistanceResult {
        kind,
        lower,
        upper,
        is_exact: complete && upper - lower <= 0.0,
        certificate,
        explored,
        budget_exhausted,
    }
}

/// Big bang GH distance: pointed GH at the two big bang points.
pub fn bb_gh(t1: &TimedMetricSpace, t2: &TimedMetricSpace, budget: u64) -> Result<DistanceResult, EngineError> {
    bb_gh_with_tol(t1, t2, budget, DEFAULT_TOL)
}

pub fn bb_gh_with_tol(
    t1: &TimedMetricSpace,
    t2: &TimedMetricSpace,
    budget: u64,
    tol: f64,
) -> Result<DistanceResult, EngineError> {
    let p1 = t1.big_bang_point(tol).ok_or(EngineError::NotBigBang(Side::First))?;
    let p2 = t2.big_bang_point(tol).ok_or(EngineError::NotBigBang(Side::Second))?;
    let mut r = pointed_gh(t1.base(), p1, t2.base(), p2, budget)?;
    r.kind = DistanceKind::BbGh;
    Ok(r)
}

fn fd_zero_set(t: &TimedMetricSpace, tol: f64, side: Side) -> Result<Vec<usize>, EngineError> {
    if !classify(t, tol).is_future_developed() {
        return Err(EngineError::NotFutureDeveloped(side));
    }
    Ok(structure_report(t, tol).zero_set)
}

/// FD-HH distance as a `[upper / 2, upper]` interval.
pub fn fd_hh(t1: &TimedMetricSpace, t2: &TimedMetricSpace, budget: u64) -> Result<DistanceResult, EngineError> {
    fd_hh_with_tol(t1, t2, budget, DEFAULT_TOL)
}

pub fn fd_hh_with_tol(
    t1: &TimedMetricSpace,
    t2: &TimedMetricSpace,
    budget: u64,
    tol: f64,
) -> Result<DistanceResult, EngineError> {
    let y1 = fd_zero_set(t1, tol, Side::First)?;
    let y2 = fd_zero_set(t2, tol, Side::Second)?;
    let (x1, x2) = (t1.base(), t2.base());
    let (n1, n2) = (x1.n(), x2.n());

    // Minimal correspondences between the zero sets, in global indices.
    let mut zero_pairings = Vec::new();
    let mut zw = MinimalWalker::new(y1.len(), y2.len());
    while let Some(p) = zw.advance() {
        zero_pairings.push(p.iter().map(|&(a, b)| (y1[a], y2[b])).collect::<Vec<_>>());
    }

    let mut walker = MinimalWalker::new(n1, n2);
    let mut explored = 0u64;
    let mut exhausted = !walker.is_supported() || !zw.is_supported();
    let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
    let mut buf = Vec::new();
    'outer: while let Some(p) = walker.advance() {
        for s in &zero_pairings {
            if explored >= budget {
                exhausted = true;
                break 'outer;
            }
            explored += 1;
            buf.clear();
            buf.extend_from_slice(p);
            buf.extend(s.iter().copied().filter(|q| !p.contains(q)));
            let v = glued_fd_objective(&buf, x1, x2, &y1, &y2);
            if best.as_ref().map_or(true, |(b, _)| v < *b) {
                best = Some((v, buf.clone()));
            }
        }
    }
    let complete = !exhausted && best.is_some();
    let (upper, pairs) = best.unwrap_or_else(|| {
        let p = full_pairs(n1, n2);
        (glued_fd_objective(&p, x1, x2, &y1, &y2), p)
    });
    let gh = gh_distance(x1, x2, budget);
    Ok(sum_interval(
        DistanceKind::FdHh,
        upper,
        gh.lower,
        complete,
        Certificate {
            correspondence: correspondence_of(n1, n2, pairs),
            basepoints: None,
            zero_sets: Some((y1, y2)),
        },
        explored,
        exhausted,
    ))
}

/// Dispatches on `kind`. Pointed GH uses the first minimum-time point of
/// each space as basepoint.
pub fn distance(
    kind: DistanceKind,
    t1: &TimedMetricSpace,
    t2: &TimedMetricSpace,
    budget: u64,
    tol: f64,
) -> Result<DistanceResult, EngineError> {
    match kind {
        DistanceKind::Gh => Ok(gh_distance(t1.base(), t2.base(), budget)),
        DistanceKind::KappaGh => Ok(kappa_gh_distance(t1.base(), t2.base(), budget)),
        DistanceKind::TauH => Ok(tau_h_distance(t1, t2, budget)),
        DistanceKind::PtGh => pointed_gh(t1.base(), earliest(t1), t2.base(), earliest(t2), budget),
        DistanceKind::BbGh => bb_gh_with_tol(t1, t2, budget, tol),
        DistanceKind::FdHh => fd_hh_with_tol(t1, t2, budget, tol),
    }
}

/// First index attaining the minimum time.
pub fn earliest(t: &TimedMetricSpace) -> usize {
    let mut best = 0;
    for i in 1..t.n() {
        if t.tau(i) < t.tau(best) {
            best = i;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Local search

struct Relation {
    n1: usize,
    n2: usize,
    member: Vec<bool>,
    dl: Vec<usize>,
    dr: Vec<usize>,
}

impl Relation {
    fn new(n1: usize, n2: usize) -> Self {
        Relation { n1, n2, member: alloc::vec![false; n1 * n2], dl: alloc::vec![0; n1], dr: alloc::vec![0; n2] }
    }

    fn has(&self, a: usize, b: usize) -> bool {
        self.member[a * self.n2 + b]
    }

    fn insert(&mut self, a: usize, b: usize) {
        if !self.has(a, b) {
            self.member[a * self.n2 + b] = true;
            self.dl[a] += 1;
            self.dr[b] += 1;
        }
    }

    fn remove(&mut self, a: usize, b: usize) {
        if self.has(a, b) {
            self.member[a * self.n2 + b] = false;
            self.dl[a] -= 1;
            self.dr[b] -= 1;
        }
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n1)
            .flat_map(|a| (0..self.n2).map(move |b| (a, b)))
            .filter(|&(a, b)| self.has(a, b))
            .collect()
    }
}

/// Side constraints a relation must keep during local search.
struct Constraints {
    basepoints: Option<(usize, usize)>,
    zero_sets: Option<(Vec<usize>, Vec<usize>)>,
}

impl Constraints {
    fn holds(&self, r: &Relation) -> bool {
        if let Some((p1, p2)) = self.basepoints {
            if !r.has(p1, p2) {
                return false;
            }
        }
        if let Some((y1, y2)) = &self.zero_sets {
            let left = y1.iter().all(|&a| y2.iter().any(|&b| r.has(a, b)));
            let right = y2.iter().all(|&b| y1.iter().any(|&a| r.has(a, b)));
            if !(left && right) {
                return false;
            }
        }
        true
    }

    fn seed(&self, r: &mut Relation, rng: &mut ChaCha8Rng) {
        if let Some((p1, p2)) = self.basepoints {
            r.insert(p1, p2);
        }
        if let Some((y1, y2)) = &self.zero_sets {
            for &a in y1 {
                if !y2.iter().any(|&b| r.has(a, b)) {
                    r.insert(a, y2[rng.gen_range(0..y2.len())]);
                }
            }
            for &b in y2 {
                if !y1.iter().any(|&a| r.has(a, b)) {
                    r.insert(y1[rng.gen_range(0..y1.len())], b);
                }
            }
        }
    }
}

fn sorted_profile(x: &FiniteMetricSpace, i: usize, len: usize) -> Vec<f64> {
    let mut row = x.row(i).to_vec();
    row.sort_by(f64::total_cmp);
    let last = *row.last().unwrap_or(&0.0);
    row.resize(len, last);
    row
}

/// Pairs points with the most similar sorted distance profiles.
fn greedy_start(t1: &TimedMetricSpace, t2: &TimedMetricSpace, timed: bool) -> Relation {
    let (n1, n2) = (t1.n(), t2.n());
    let len = n1.max(n2);
    let p1: Vec<_> = (0..n1).map(|i| sorted_profile(t1.base(), i, len)).collect();
    let p2: Vec<_> = (0..n2).map(|j| sorted_profile(t2.base(), j, len)).collect();
    let score = |a: usize, b: usize| {
        let mut s = crate::embed::sup_dist(&p1[a], &p2[b]);
        if timed {
            s = s.max((t1.tau(a) - t2.tau(b)).abs());
        }
        s
    };
    let mut r = Relation::new(n1, n2);
    for a in 0..n1 {
        let b = (0..n2).min_by(|&u, &v| score(a, u).total_cmp(&score(a, v))).unwrap_or(0);
        r.insert(a, b);
    }
    for b in 0..n2 {
        if r.dr[b] == 0 {
            let a = (0..n1).min_by(|&u, &v| score(u, b).total_cmp(&score(v, b))).unwrap_or(0);
            r.insert(a, b);
        }
    }
    r
}

fn random_start(n1: usize, n2: usize, rng: &mut ChaCha8Rng) -> Relation {
    let mut r = Relation::new(n1, n2);
    for a in 0..n1 {
        r.insert(a, rng.gen_range(0..n2));
    }
    for b in 0..n2 {
        if r.dr[b] == 0 {
            r.insert(rng.gen_range(0..n1), b);
        }
    }
    r
}

/// Applies a random add, drop or swap move. Returns the undo information,
/// or `None` when the move was not admissible.
fn propose(r: &mut Relation, rng: &mut ChaCha8Rng, c: &Constraints) -> Option<[(usize, usize, bool); 2]> {
    let (n1, n2) = (r.n1, r.n2);
    let a = rng.gen_range(0..n1);
    let b = rng.gen_range(0..n2);
    let undo = match rng.gen_range(0..3u8) {
        0 if !r.has(a, b) => {
            r.insert(a, b);
            [(a, b, false), (a, b, false)]
        }
        1 if r.has(a, b) && r.dl[a] > 1 && r.dr[b] > 1 => {
            r.remove(a, b);
            [(a, b, true), (a, b, true)]
        }
        2 if r.has(a, b) && r.dr[b] > 1 && n2 > 1 => {
            let mut b2 = rng.gen_range(0..n2 - 1);
            if b2 >= b {
                b2 += 1;
            }
            if r.has(a, b2) {
                return None;
            }
            r.remove(a, b);
            r.insert(a, b2);
            [(a, b, true), (a, b2, false)]
        }
        _ => return None,
    };
    if c.holds(r) {
        Some(undo)
    } else {
        revert(r, &undo);
        None
    }
}

fn revert(r: &mut Relation, undo: &[(usize, usize, bool); 2]) {
    for &(a, b, was_member) in undo.iter().rev() {
        if was_member {
            r.insert(a, b);
        } else {
            r.remove(a, b);
        }
    }
}

/// Seeded hill climbing over correspondences with add / drop / swap moves
/// and restarts. Gives an upper bound with certificate; never exact.
pub fn local_search_upper(
    kind: DistanceKind,
    t1: &TimedMetricSpace,
    t2: &TimedMetricSpace,
    seed: u64,
    iterations: u64,
) -> Result<DistanceResult, EngineError> {
    let (n1, n2) = (t1.n(), t2.n());
    let (x1, x2) = (t1.base(), t2.base());
    let constraints = match kind {
        DistanceKind::PtGh => Constraints { basepoints: Some((earliest(t1), earliest(t2))), zero_sets: None },
        DistanceKind::BbGh => {
            let p1 = t1.big_bang_point(DEFAULT_TOL).ok_or(EngineError::NotBigBang(Side::First))?;
            let p2 = t2.big_bang_point(DEFAULT_TOL).ok_or(EngineError::NotBigBang(Side::Second))?;
            Constraints { basepoints: Some((p1, p2)), zero_sets: None }
        }
        DistanceKind::FdHh => Constraints {
            basepoints: None,
            zero_sets: Some((
                fd_zero_set(t1, DEFAULT_TOL, Side::First)?,
                fd_zero_set(t2, DEFAULT_TOL, Side::Second)?,
            )),
        },
        _ => Constraints { basepoints: None, zero_sets: None },
    };
    let cost = |r: &Relation| {
        let p = r.pairs();
        match kind {
            DistanceKind::Gh => pairs_distortion(&p, x1, x2) / 2.0,
            DistanceKind::KappaGh => frechet_cost(&p, x1, x2),
            DistanceKind::TauH => timed_frechet_cost(&p, t1, t2),
            DistanceKind::PtGh | DistanceKind::BbGh => {
                let (p1, p2) = constraints.basepoints.unwrap_or((0, 0));
                glued_pointed_objective(&p, x1, x2, p1, p2)
            }
            DistanceKind::FdHh => {
                let (y1, y2) = constraints.zero_sets.as_ref().expect("zero sets");
                glued_fd_objective(&p, x1, x2, y1, y2)
            }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let patience = 8 * (n1 * n2) as u64 + 16;
    let mut current = greedy_start(t1, t2, kind == DistanceKind::TauH);
    constraints.seed(&mut current, &mut rng);
    let mut current_cost = cost(&current);
    let mut best = (current_cost, current.pairs());
    let mut stale = 0u64;
    for _ in 0..iterations {
        if stale >= patience {
            current = random_start(n1, n2, &mut rng);
            constraints.seed(&mut current, &mut rng);
            current_cost = cost(&current);
            stale = 0;
        } else if let Some(undo) = propose(&mut current, &mut rng, &constraints) {
            let c = cost(&current);
            if c <= current_cost {
                stale = if c < current_cost { 0 } else { stale + 1 };
                current_cost = c;
            } else {
                revert(&mut current, &undo);
                stale += 1;
            }
        } else {
            stale += 1;
        }
        if current_cost < best.0 || (current_cost == best.0 && current.pairs() < best.1) {
            best = (current_cost, current.pairs());
        }
    }

    let (upper, pairs) = best;
    let lower = simple_lower_bounds(kind, t1, t2).min(upper);
    Ok(DistanceResult {
        kind,
        lower,
        upper,
        is_exact: false,
        certificate: Certificate {
            correspondence: correspondence_of(n1, n2, pairs),
            basepoints: constraints.basepoints,
            zero_sets: constraints.zero_sets,
        },
        explored: iterations,
        budget_exhausted: false,
    })
}
