//! Finite metric spaces, timed metric spaces and the structure of their
//! time functions.
//!
//! Every constructor validates its input completely and reports *all*
//! violated constraints at once. Nothing is repaired silently: a
//! pseudo-metric is rejected rather than quotiented.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Default validation tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// One violated constraint. Indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The space has no points.
    EmptySpace,
    /// Tolerance must be strictly positive (or nonnegative where noted).
    BadTolerance(f64),
    /// Row `row` has `len` entries but the table has `n` rows.
    NotSquare { row: usize, len: usize, n: usize },
    /// Label count does not match the point count.
    LabelCount { labels: usize, n: usize },
    /// Two points carry the same label.
    DuplicateLabel { first: usize, second: usize },
    NonFinite { i: usize, j: usize },
    NegativeEntry { i: usize, j: usize, value: f64 },
    NonzeroDiagonal { i: usize, value: f64 },
    Asymmetry { i: usize, j: usize, amount: f64 },
    /// `d(i, j) <= tol` for distinct `i`, `j`.
    IndistinctPoints { i: usize, j: usize },
    /// `d(i, j) > d(i, k) + d(k, j) + tol` by `amount` (`i < j`).
    TriangleViolation { i: usize, j: usize, k: usize, amount: f64 },
    TimeLength { expected: usize, found: usize },
    NonFiniteTime { i: usize },
    NegativeTime { i: usize, value: f64 },
    /// `|tau(i) - tau(j)| > d(i, j) + tol` by `amount` (`i < j`).
    LipschitzViolation { i: usize, j: usize, amount: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::EmptySpace => write!(f, "space has no points"),
            Violation::BadTolerance(t) => write!(f, "invalid tolerance {t}"),
            Violation::NotSquare { row, len, n } => {
                write!(f, "row {row} has {len} entries, expected {n}")
            }
            Violation::LabelCount { labels, n } => {
                write!(f, "{labels} labels for {n} points")
            }
            Violation::DuplicateLabel { first, second } => {
                write!(f, "points {first} and {second} share a label")
            }
            Violation::NonFinite { i, j } => write!(f, "d[{i}][{j}] is not finite"),
            Violation::NegativeEntry { i, j, value } => {
                write!(f, "d[{i}][{j}] = {value} is negative")
            }
            Violation::NonzeroDiagonal { i, value } => {
                write!(f, "d[{i}][{i}] = {value} is not zero")
            }
            Violation::Asymmetry { i, j, amount } => {
                write!(f, "d[{i}][{j}] != d[{j}][{i}] (differ by {amount})")
            }
            Violation::IndistinctPoints { i, j } => {
                write!(f, "points {i} and {j} are not distinct")
            }
            Violation::TriangleViolation { i, j, k, amount } => write!(
                f,
                "triangle inequality fails: d[{i}][{j}] exceeds d[{i}][{k}] + d[{k}][{j}] by {amount}"
            ),
            Violation::TimeLength { expected, found } => {
                write!(f, "time function has {found} values, expected {expected}")
            }
            Violation::NonFiniteTime { i } => write!(f, "tau[{i}] is not finite"),
            Violation::NegativeTime { i, value } => write!(f, "tau[{i}] = {value} is negative"),
            Violation::LipschitzViolation { i, j, amount } => write!(
                f,
                "time function is not 1-Lipschitz: |tau[{i}] - tau[{j}]| exceeds d[{i}][{j}] by {amount}"
            ),
        }
    }
}

/// The complete list of violations found while validating an input.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}", render(.violations))]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

fn render(v: &[Violation]) -> String {
    let mut s = format!("{} violation(s)", v.len());
    for (k, item) in v.iter().enumerate() {
        s.push_str(if k == 0 { ": " } else { "; " });
        s.push_str(&format!("{item}"));
    }
    s
}

impl ValidationError {
    fn check(violations: Vec<Violation>) -> Result<(), Self> {
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { violations })
        }
    }
}

/// `x0, x1, ...`
pub fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// A validated metric on `n` labeled points, stored as a dense row-major table.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    d: Vec<f64>,
    n: usize,
    diameter: f64,
}

impl FiniteMetricSpace {
    /// Validates `matrix` as a metric on the labeled points.
    pub fn new(
        labels: Vec<String>,
        matrix: Vec<Vec<f64>>,
        tol: f64,
    ) -> Result<Self, ValidationError> {
        let n = matrix.len();
        let mut violations = Vec::new();
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != n {
                violations.push(Violation::NotSquare { row, len: r.len(), n });
            }
        }
        if !violations.is_empty() {
            return Err(ValidationError { violations });
        }
        let d: Vec<f64> = matrix.into_iter().flatten().collect();
        Self::from_flat(labels, d, tol)
    }

    /// Like [`FiniteMetricSpace::new`] with default labels.
    pub fn from_matrix(matrix: Vec<Vec<f64>>, tol: f64) -> Result<Self, ValidationError> {
        let n = matrix.len();
        Self::new(default_labels(n), matrix, tol)
    }

    /// Validates a row-major `n * n` table.
    pub fn from_flat(labels: Vec<String>, d: Vec<f64>, tol: f64) -> Result<Self, ValidationError> {
        let n = labels.len();
        let mut violations = Vec::new();
        if !(tol > 0.0) || !tol.is_finite() {
            violations.push(Violation::BadTolerance(tol));
        }
        if d.len() != n * n {
            let side = d.len().isqrt();
            if side * side == d.len() {
                violations.push(Violation::LabelCount { labels: n, n: side });
            } else {
                violations.push(Violation::NotSquare { row: 0, len: d.len(), n });
            }
            return Err(ValidationError { violations });
        }
        if n == 0 {
            violations.push(Violation::EmptySpace);
        }
        for a in 0..n {
            for b in (a + 1)..n {
                if labels[a] == labels[b] {
                    violations.push(Violation::DuplicateLabel { first: a, second: b });
                }
            }
        }
        let at = |i: usize, j: usize| d[i * n + j];
        let mut finite = true;
        for i in 0..n {
            for j in 0..n {
                let v = at(i, j);
                if !v.is_finite() {
                    violations.push(Violation::NonFinite { i, j });
                    finite = false;
                } else if v < 0.0 {
                    violations.push(Violation::NegativeEntry { i, j, value: v });
                }
            }
        }
        for i in 0..n {
            let v = at(i, i);
            if v.is_finite() && v != 0.0 {
                violations.push(Violation::NonzeroDiagonal { i, value: v });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (at(i, j), at(j, i));
                if a.is_finite() && b.is_finite() {
                    if a != b {
                        violations.push(Violation::Asymmetry { i, j, amount: (a - b).abs() });
                    }
                    if a <= tol || b <= tol {
                        violations.push(Violation::IndistinctPoints { i, j });
                    }
                }
            }
        }
        if finite {
            for i in 0..n {
                for j in (i + 1)..n {
                    let long = at(i, j);
                    for k in 0..n {
                        if k == i || k == j {
                            continue;
                        }
                        let amount = long - (at(i, k) + at(k, j));
                        if amount > tol {
                            violations.push(Violation::TriangleViolation { i, j, k, amount });
                        }
                    }
                }
            }
        }
        ValidationError::check(violations)?;
        let diameter = d.iter().copied().fold(0.0, f64::max);
        Ok(FiniteMetricSpace { labels, d, n, diameter })
    }

    /// The one-point space.
    pub fn point(label: impl Into<String>) -> Self {
        FiniteMetricSpace {
            labels: alloc::vec![label.into()],
            d: alloc::vec![0.0],
            n: 1,
            diameter: 0.0,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Row-major copy of the table.
    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Largest distance between points of `set` (0 for fewer than two points).
    pub fn subset_diameter(&self, set: &[usize]) -> f64 {
        let mut best = 0.0f64;
        for (a, &i) in set.iter().enumerate() {
            for &j in &set[a + 1..] {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }

    /// `min over q in set of d(q, x)`; `+inf` for an empty set.
    pub fn dist_to_set(&self, set: &[usize], x: usize) -> f64 {
        set.iter().map(|&q| self.dist(q, x)).fold(f64::INFINITY, f64::min)
    }

    /// Same space with points reordered so that new point `k` is old point `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut d = Vec::with_capacity(n * n);
        for &i in perm {
            for &j in perm {
                d.push(self.dist(i, j));
            }
        }
        FiniteMetricSpace {
            labels: perm.iter().map(|&i| self.labels[i].clone()).collect(),
            d,
            n,
            diameter: self.diameter,
        }
    }
}

/// A finite metric space with a nonnegative 1-Lipschitz time function.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedMetricSpace {
    base: FiniteMetricSpace,
    tau: Vec<f64>,
    tau_max: f64,
}

impl TimedMetricSpace {
    pub fn new(base: FiniteMetricSpace, tau: Vec<f64>, tol: f64) -> Result<Self, ValidationError> {
        let n = base.n();
        let mut violations = Vec::new();
        if !(tol >= 0.0) {
            violations.push(Violation::BadTolerance(tol));
        }
        if tau.len() != n {
            violations.push(Violation::TimeLength { expected: n, found: tau.len() });
            return Err(ValidationError { violations });
        }
        let mut finite = true;
        for (i, &t) in tau.iter().enumerate() {
            if !t.is_finite() {
                violations.push(Violation::NonFiniteTime { i });
                finite = false;
            } else if t < 0.0 {
                violations.push(Violation::NegativeTime { i, value: t });
            }
        }
        if finite {
            for i in 0..n {
                for j in (i + 1)..n {
                    let amount = (tau[i] - tau[j]).abs() - base.dist(i, j);
                    if amount > tol {
                        violations.push(Violation::LipschitzViolation { i, j, amount });
                    }
                }
            }
        }
        ValidationError::check(violations)?;
        let tau_max = tau.iter().copied().fold(0.0, f64::max);
        Ok(TimedMetricSpace { base, tau, tau_max })
    }

    /// The space with `tau` identically zero.
    pub fn untimed(base: FiniteMetricSpace) -> Self {
        let n = base.n();
        TimedMetricSpace { base, tau: alloc::vec![0.0; n], tau_max: 0.0 }
    }

    pub fn base(&self) -> &FiniteMetricSpace {
        &self.base
    }

    pub fn into_base(self) -> FiniteMetricSpace {
        self.base
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.base.n()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.base.dist(i, j)
    }

    #[inline]
    pub fn tau(&self, i: usize) -> f64 {
        self.tau[i]
    }

    pub fn times(&self) -> &[f64] {
        &self.tau
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    /// Indices with `tau <= delta`.
    pub fn zero_set(&self, delta: f64) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.tau[i] <= delta).collect()
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        TimedMetricSpace {
            base: self.base.permuted(perm),
            tau: perm.iter().map(|&i| self.tau[i]).collect(),
            tau_max: self.tau_max,
        }
    }

    /// The unique zero point when the space is a big bang at tolerance `tol`.
    pub fn big_bang_point(&self, tol: f64) -> Option<usize> {
        let report = structure_report(self, tol);
        if report.zero_set.len() == 1 && report.bb_defect <= tol {
            Some(report.zero_set[0])
        } else {
            None
        }
    }
}

/// How far a time function is from being a distance-to-zero-set function.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub zero_set: Vec<usize>,
    pub zero_diam: f64,
    /// `max_x |tau(x) - d(zero_set, x)|`, `+inf` when the zero set is empty.
    pub fd_defect: f64,
    /// `max(fd_defect, zero_diam)`.
    pub bb_defect: f64,
    pub min_tau: f64,
}

/// Zero set at threshold `delta` and the big bang / future developed defects.
pub fn structure_report(t: &TimedMetricSpace, delta: f64) -> StructureReport {
    let zero_set = t.zero_set(delta);
    let zero_diam = t.base().subset_diameter(&zero_set);
    let fd_defect = if zero_set.is_empty() {
        f64::INFINITY
    } else {
        (0..t.n())
            .map(|x| (t.tau(x) - t.base().dist_to_set(&zero_set, x)).abs())
            .fold(0.0, f64::max)
    };
    let min_tau = t.times().iter().copied().fold(f64::INFINITY, f64::min);
    StructureReport { zero_set, zero_diam, fd_defect, bb_defect: fd_defect.max(zero_diam), min_tau }
}

/// Structural class of a time function; `BigBang` is reported in preference
/// to the weaker `FutureDeveloped`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeClass {
    BigBang,
    FutureDeveloped,
    Generic,
}

impl TimeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeClass::BigBang => "big-bang",
            TimeClass::FutureDeveloped => "future-developed",
            TimeClass::Generic => "generic",
        }
    }

    /// Big bang spaces are also future developed.
    pub fn is_future_developed(self) -> bool {
        !matches!(self, TimeClass::Generic)
    }
}

impl fmt::Display for TimeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify(t: &TimedMetricSpace, tol: f64) -> TimeClass {
    let r = structure_report(t, tol);
    if r.zero_set.len() == 1 && r.bb_defect <= tol {
        TimeClass::BigBang
    } else if !r.zero_set.is_empty() && r.fd_defect <= tol {
        TimeClass::FutureDeveloped
    } else {
        TimeClass::Generic
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two(d: f64) -> FiniteMetricSpace {
        FiniteMetricSpace::new(vec!["a".into(), "b".into()], vec![vec![0.0, d], vec![d, 0.0]], DEFAULT_TOL)
            .unwrap()
    }

    #[test]
    fn smallest_space_validates() {
        let x = two(2.0);
        assert_eq!(x.n(), 2);
        assert_eq!(x.diameter(), 2.0);
    }

    #[test]
    fn triangle_violation_is_located() {
        let m = vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]];
        let err = FiniteMetricSpace::from_matrix(m, DEFAULT_TOL).unwrap_err();
        assert_eq!(
            err.violations,
            vec![Violation::TriangleViolation { i: 0, j: 2, k: 1, amount: 1.0 }]
        );
    }

    #[test]
    fn every_violation_is_reported() {
        let m = vec![vec![0.5, 1.0], vec![2.0, 0.0]];
        let err = FiniteMetricSpace::from_matrix(m, DEFAULT_TOL).unwrap_err();
        assert!(err.violations.contains(&Violation::NonzeroDiagonal { i: 0, value: 0.5 }));
        assert!(err.violations.contains(&Violation::Asymmetry { i: 0, j: 1, amount: 1.0 }));
    }

    #[test]
    fn rejects_pseudometrics_and_bad_shapes() {
        let err = FiniteMetricSpace::from_matrix(vec![vec![0.0, 0.0], vec![0.0, 0.0]], DEFAULT_TOL)
            .unwrap_err();
        assert_eq!(err.violations, vec![Violation::IndistinctPoints { i: 0, j: 1 }]);
        let err = FiniteMetricSpace::from_matrix(vec![vec![0.0, 1.0], vec![1.0]], DEFAULT_TOL)
            .unwrap_err();
        assert!(matches!(err.violations[0], Violation::NotSquare { row: 1, .. }));
        let err = FiniteMetricSpace::from_matrix(vec![vec![0.0, -1.0], vec![-1.0, 0.0]], DEFAULT_TOL)
            .unwrap_err();
        assert!(err.violations.iter().any(|v| matches!(v, Violation::NegativeEntry { .. })));
        let err = FiniteMetricSpace::from_matrix(vec![], DEFAULT_TOL).unwrap_err();
        assert_eq!(err.violations, vec![Violation::EmptySpace]);
        let err = FiniteMetricSpace::from_matrix(vec![vec![f64::NAN]], DEFAULT_TOL).unwrap_err();
        assert_eq!(err.violations, vec![Violation::NonFinite { i: 0, j: 0 }]);
        let err = FiniteMetricSpace::new(vec!["a".into(), "a".into()], vec![vec![0.0, 1.0], vec![1.0, 0.0]], DEFAULT_TOL)
            .unwrap_err();
        assert_eq!(err.violations, vec![Violation::DuplicateLabel { first: 0, second: 1 }]);
    }

    #[test]
    fn lipschitz_gate() {
        let err = TimedMetricSpace::new(two(1.0), vec![0.0, 2.0], DEFAULT_TOL).unwrap_err();
        assert_eq!(err.violations, vec![Violation::LipschitzViolation { i: 0, j: 1, amount: 1.0 }]);
        let t = TimedMetricSpace::new(two(1.0), vec![0.0, 1.0], DEFAULT_TOL).unwrap();
        assert_eq!(t.tau_max(), 1.0);
        let t = TimedMetricSpace::new(two(3.0), vec![0.0, 0.0], DEFAULT_TOL).unwrap();
        assert_eq!(t.tau_max(), 0.0);
        let err = TimedMetricSpace::new(two(1.0), vec![-0.5, 0.0], DEFAULT_TOL).unwrap_err();
        assert_eq!(err.violations, vec![Violation::NegativeTime { i: 0, value: -0.5 }]);
        let err = TimedMetricSpace::new(two(1.0), vec![0.0], DEFAULT_TOL).unwrap_err();
        assert_eq!(err.violations, vec![Violation::TimeLength { expected: 2, found: 1 }]);
    }

    fn path3() -> FiniteMetricSpace {
        FiniteMetricSpace::from_matrix(
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]],
            DEFAULT_TOL,
        )
        .unwrap()
    }

    #[test]
    fn structure_of_cones() {
        let x = path3();
        let bb = TimedMetricSpace::new(x.clone(), vec![0.0, 1.0, 2.0], DEFAULT_TOL).unwrap();
        let r = structure_report(&bb, 0.0);
        assert_eq!(r.zero_set, vec![0]);
        assert_eq!(r.bb_defect, 0.0);
        assert_eq!(classify(&bb, DEFAULT_TOL), TimeClass::BigBang);

        let fd = TimedMetricSpace::new(x.clone(), vec![0.0, 0.0, 1.0], DEFAULT_TOL).unwrap();
        let r = structure_report(&fd, 0.0);
        assert_eq!(r.fd_defect, 0.0);
        assert_eq!(r.zero_diam, 1.0);
        assert_eq!(r.bb_defect, 1.0);
        assert_eq!(classify(&fd, DEFAULT_TOL), TimeClass::FutureDeveloped);

        let flat = TimedMetricSpace::new(x, vec![1.0; 3], DEFAULT_TOL).unwrap();
        let r = structure_report(&flat, 0.0);
        assert!(r.zero_set.is_empty());
        assert_eq!(r.fd_defect, f64::INFINITY);
        assert_eq!(r.min_tau, 1.0);
        assert_eq!(classify(&flat, DEFAULT_TOL), TimeClass::Generic);
    }

    #[test]
    fn generic_two_point() {
        let t = TimedMetricSpace::new(two(2.0), vec![0.0, 1.0], DEFAULT_TOL).unwrap();
        let r = structure_report(&t, 0.0);
        assert_eq!(r.fd_defect, 1.0);
        assert_eq!(classify(&t, DEFAULT_TOL), TimeClass::Generic);
    }
}
