//! Fréchet and timed Fréchet embeddings into finite sup-metric clouds, the
//! coordinate deletion map, and Hausdorff distances between finite sets.
//!
//! A countable dense sequence of a finite space is any list that visits
//! every point. Repeating entries only repeats coordinates, which never
//! changes a sup distance, so an [`Enumeration`] stores one finite cycle.

use alloc::vec::Vec;

use crate::space::{FiniteMetricSpace, TimedMetricSpace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmbedError {
    #[error("enumeration misses point {missing}")]
    IncompleteEnumeration { missing: usize },
    #[error("index {index} out of range for a space of {n} points")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("cloud has {m} coordinate(s); at least 2 are needed")]
    TooFewCoordinates { m: usize },
    #[error("clouds have {left} and {right} coordinates")]
    CoordinateMismatch { left: usize, right: usize },
    #[error("cloud is empty")]
    EmptyCloud,
    #[error("subset is empty")]
    EmptySubset,
    #[error("point {point} has {found} coordinates, expected {expected}")]
    Ragged { point: usize, expected: usize, found: usize },
    #[error("point {point} has a non-finite coordinate")]
    NonFinite { point: usize },
}

/// A finite list of point indices, repetitions allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Enumeration {
    seq: Vec<usize>,
}

impl Enumeration {
    pub fn new(seq: Vec<usize>) -> Self {
        Enumeration { seq }
    }

    /// `0, 1, ..., n - 1`
    pub fn identity(n: usize) -> Self {
        Enumeration { seq: (0..n).collect() }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.seq
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// Checks that every point of an `n`-point space is listed.
    pub fn check_covers(&self, n: usize) -> Result<(), EmbedError> {
        let mut seen = alloc::vec![false; n];
        for &i in &self.seq {
            if i >= n {
                return Err(EmbedError::IndexOutOfRange { index: i, n });
            }
            seen[i] = true;
        }
        match seen.iter().position(|s| !s) {
            Some(missing) => Err(EmbedError::IncompleteEnumeration { missing }),
            None => Ok(()),
        }
    }
}

/// Points with `m` real coordinates under the sup metric.
#[derive(Debug, Clone, PartialEq)]
pub struct LinftyCloud {
    m: usize,
    coords: Vec<f64>,
}

impl LinftyCloud {
    pub fn new(m: usize, points: Vec<Vec<f64>>) -> Result<Self, EmbedError> {
        let mut coords = Vec::with_capacity(m * points.len());
        for (point, p) in points.into_iter().enumerate() {
            if p.len() != m {
                return Err(EmbedError::Ragged { point, expected: m, found: p.len() });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(EmbedError::NonFinite { point });
            }
            coords.extend(p);
        }
        Ok(LinftyCloud { m, coords })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        if self.m == 0 {
            0
        } else {
            self.coords.len() / self.m
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.m..(i + 1) * self.m]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.m.max(1))
    }

    pub fn sup_dist(&self, i: usize, j: usize) -> f64 {
        sup_dist(self.point(i), self.point(j))
    }
}

#[inline]
pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `kappa(x) = (d(e_1, x), d(e_2, x), ...)`
pub fn frechet_embed(x: &FiniteMetricSpace, e: &Enumeration) -> Result<LinftyCloud, EmbedError> {
    e.check_covers(x.n())?;
    let m = e.len();
    let mut coords = Vec::with_capacity(m * x.n());
    for i in 0..x.n() {
        coords.extend(e.as_slice().iter().map(|&k| x.dist(k, i)));
    }
    Ok(LinftyCloud { m, coords })
}

/// The Fréchet embedding with `tau` prepended as coordinate 0.
pub fn timed_frechet_embed(t: &TimedMetricSpace, e: &Enumeration) -> Result<LinftyCloud, EmbedError> {
    e.check_covers(t.n())?;
    let m = e.len() + 1;
    let mut coords = Vec::with_capacity(m * t.n());
    for i in 0..t.n() {
        coords.push(t.tau(i));
        coords.extend(e.as_slice().iter().map(|&k| t.dist(k, i)));
    }
    Ok(LinftyCloud { m, coords })
}

/// Drops coordinate 0 of every point.
pub fn delete_first_coordinate(c: &LinftyCloud) -> Result<LinftyCloud, EmbedError> {
    if c.m < 2 {
        return Err(EmbedError::TooFewCoordinates { m: c.m });
    }
    let coords = c.points().flat_map(|p| p[1..].iter().copied()).collect();
    Ok(LinftyCloud { m: c.m - 1, coords })
}

/// `max(max_a min_b cost(a, b), max_b min_a cost(a, b))` over index ranges.
///
/// Both ranges must be nonempty.
pub fn hausdorff_max_min(na: usize, nb: usize, mut cost: impl FnMut(usize, usize) -> f64) -> f64 {
    let mut col_min = alloc::vec![f64::INFINITY; nb];
    let mut forward = 0.0f64;
    for a in 0..na {
        let mut row_min = f64::INFINITY;
        for (b, cm) in col_min.iter_mut().enumerate() {
            let c = cost(a, b);
            row_min = row_min.min(c);
            *cm = cm.min(c);
        }
        forward = forward.max(row_min);
    }
    col_min.into_iter().fold(forward, f64::max)
}

/// Hausdorff distance between two clouds in the same sup-metric space.
pub fn hausdorff_sup(a: &LinftyCloud, b: &LinftyCloud) -> Result<f64, EmbedError> {
    if a.m != b.m {
        return Err(EmbedError::CoordinateMismatch { left: a.m, right: b.m });
    }
    if a.is_empty() || b.is_empty() {
        return Err(EmbedError::EmptyCloud);
    }
    Ok(hausdorff_max_min(a.len(), b.len(), |i, j| sup_dist(a.point(i), b.point(j))))
}

/// Hausdorff distance between the subsets `sa` and `sb` of `z`.
pub fn hausdorff_in(z: &FiniteMetricSpace, sa: &[usize], sb: &[usize]) -> Result<f64, EmbedError> {
    if sa.is_empty() || sb.is_empty() {
        return Err(EmbedError::EmptySubset);
    }
    if let Some(&index) = sa.iter().chain(sb).find(|&&i| i >= z.n()) {
        return Err(EmbedError::IndexOutOfRange { index, n: z.n() });
    }
    Ok(hausdorff_max_min(sa.len(), sb.len(), |i, j| z.dist(sa[i], sb[j])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::DEFAULT_TOL;
    use alloc::vec;

    fn two(d: f64) -> FiniteMetricSpace {
        FiniteMetricSpace::from_matrix(vec![vec![0.0, d], vec![d, 0.0]], DEFAULT_TOL).unwrap()
    }

    #[test]
    fn frechet_two_points() {
        let c = frechet_embed(&two(2.0), &Enumeration::identity(2)).unwrap();
        assert_eq!(c.point(0), &[0.0, 2.0]);
        assert_eq!(c.point(1), &[2.0, 0.0]);
        assert_eq!(c.sup_dist(0, 1), 2.0);
        let one = frechet_embed(&FiniteMetricSpace::point("p"), &Enumeration::identity(1)).unwrap();
        assert_eq!(one.point(0), &[0.0]);
    }

    #[test]
    fn timed_two_points_and_deletion() {
        let t = TimedMetricSpace::new(two(1.0), vec![0.0, 1.0], DEFAULT_TOL).unwrap();
        let c = timed_frechet_embed(&t, &Enumeration::identity(2)).unwrap();
        assert_eq!(c.point(0), &[0.0, 0.0, 1.0]);
        assert_eq!(c.point(1), &[1.0, 1.0, 0.0]);
        let f = delete_first_coordinate(&c).unwrap();
        assert_eq!(f.point(0), &[0.0, 1.0]);
        assert_eq!(f.point(1), &[1.0, 0.0]);
        let flat = TimedMetricSpace::untimed(two(1.0));
        let e = Enumeration::new(vec![1, 0, 1]);
        assert_eq!(
            delete_first_coordinate(&timed_frechet_embed(&flat, &e).unwrap()).unwrap(),
            frechet_embed(flat.base(), &e).unwrap()
        );
    }

    #[test]
    fn enumeration_errors() {
        assert_eq!(
            frechet_embed(&two(1.0), &Enumeration::new(vec![0, 0])).unwrap_err(),
            EmbedError::IncompleteEnumeration { missing: 1 }
        );
        assert_eq!(
            frechet_embed(&two(1.0), &Enumeration::new(vec![0, 2])).unwrap_err(),
            EmbedError::IndexOutOfRange { index: 2, n: 2 }
        );
        let one = LinftyCloud::new(1, vec![vec![1.0]]).unwrap();
        assert_eq!(delete_first_coordinate(&one).unwrap_err(), EmbedError::TooFewCoordinates { m: 1 });
    }

    #[test]
    fn hausdorff_examples() {
        let a = LinftyCloud::new(2, vec![vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        let b = LinftyCloud::new(2, vec![vec![0.0, 0.0]]).unwrap();
        assert_eq!(hausdorff_sup(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff_sup(&a, &b).unwrap(), 2.0);
        let x = LinftyCloud::new(1, vec![vec![0.25]]).unwrap();
        let y = LinftyCloud::new(1, vec![vec![-1.5]]).unwrap();
        assert_eq!(hausdorff_sup(&x, &y).unwrap(), 1.75);
        assert_eq!(hausdorff_sup(&a, &x).unwrap_err(), EmbedError::CoordinateMismatch { left: 2, right: 1 });
        let empty = LinftyCloud::new(2, vec![]).unwrap();
        assert_eq!(hausdorff_sup(&a, &empty).unwrap_err(), EmbedError::EmptyCloud);
    }

    #[test]
    fn hausdorff_in_path() {
        let z = FiniteMetricSpace::from_matrix(
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]],
            DEFAULT_TOL,
        )
        .unwrap();
        assert_eq!(hausdorff_in(&z, &[0, 2], &[0, 2]).unwrap(), 0.0);
        assert_eq!(hausdorff_in(&z, &[0], &[2]).unwrap(), 2.0);
        assert_eq!(hausdorff_in(&z, &[0, 2], &[1]).unwrap(), 1.0);
        assert_eq!(hausdorff_in(&z, &[], &[1]).unwrap_err(), EmbedError::EmptySubset);
        assert_eq!(
            hausdorff_in(&z, &[5], &[1]).unwrap_err(),
            EmbedError::IndexOutOfRange { index: 5, n: 3 }
        );
    }
}
