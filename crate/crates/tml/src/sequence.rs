//! Distances from the elements of a generated sequence to its limit.

use tml_core::construct::{build_sequence, declared_class, refine_offset, ConstructError, SequenceFamily, SequenceSpec};
use tml_core::engine::distance;
use tml_core::{classify, DistanceKind, DistanceResult, TimeClass, DEFAULT_TOL};

use crate::report::Quantity;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SequenceError {
    #[error(transparent)]
    InvalidSpec(#[from] ConstructError),
    #[error("element {j}: {kind} is not exact within budget {budget}")]
    BudgetTooSmall { j: usize, kind: DistanceKind, budget: u64 },
}

/// Measurements for element `j` against the limit.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRow {
    pub j: usize,
    pub n: usize,
    pub class: TimeClass,
    pub declared: TimeClass,
    /// One entry per requested kind; `None` when the kind does not apply.
    pub results: Vec<(DistanceKind, Option<DistanceResult>)>,
    pub quantities: Vec<Quantity>,
    pub checks: Vec<String>,
    pub slack: f64,
    pub pass: bool,
}

impl SequenceRow {
    pub fn result(&self, kind: DistanceKind) -> Option<&DistanceResult> {
        self.results.iter().find(|(k, _)| *k == kind).and_then(|(_, r)| r.as_ref())
    }
}

/// Kinds reported when none are requested.
pub fn default_kinds(spec: &SequenceSpec) -> Vec<DistanceKind> {
    let mut kinds = vec![DistanceKind::Gh, DistanceKind::KappaGh, DistanceKind::TauH];
    match classify(&spec.base, DEFAULT_TOL) {
        TimeClass::BigBang => kinds.extend([DistanceKind::BbGh, DistanceKind::FdHh]),
        TimeClass::FutureDeveloped => kinds.push(DistanceKind::FdHh),
        TimeClass::Generic => {}
    }
    kinds
}

fn exact_value(r: &DistanceResult, j: usize, budget: u64) -> Result<f64, SequenceError> {
    if r.is_exact {
        Ok(r.upper)
    } else {
        Err(SequenceError::BudgetTooSmall { j, kind: r.kind, budget })
    }
}

/// Builds the sequence and checks, for every element `T_j`:
///
/// * `gh <= tau_h`;
/// * `tau_h <= 2 * bb_gh.upper` when `T_j` and the limit are big bangs;
/// * the decay envelope of the family (`tau_h(T_0) * rate^j` for
///   perturb-geometric, `tau_max * rate^j` for collapse-time, `2 eps_j`
///   for refine-bb-cone);
/// * that `T_j` has the class the family promises.
pub fn run_sequence_experiment(
    spec: &SequenceSpec,
    kinds: &[DistanceKind],
    budget: u64,
    tol: f64,
) -> Result<Vec<SequenceRow>, SequenceError> {
    let seq = build_sequence(spec)?;
    let limit = &seq.limit;
    let limit_bb = classify(limit, DEFAULT_TOL) == TimeClass::BigBang;
    let mut rows = Vec::with_capacity(seq.elements.len());
    let mut tau_h0 = None;
    for (j, t) in seq.elements.iter().enumerate() {
        let class = classify(t, DEFAULT_TOL);
        let declared = declared_class(spec, j);
        let results: Vec<_> =
            kinds.iter().map(|&k| (k, distance(k, t, limit, budget, DEFAULT_TOL).ok())).collect();
        let find = |k: DistanceKind| results.iter().find(|(q, _)| *q == k).and_then(|(_, r)| r.clone());
        let find_or = |k: DistanceKind| find(k).or_else(|| distance(k, t, limit, budget, DEFAULT_TOL).ok());

        let gh = exact_value(&find_or(DistanceKind::Gh).expect("gh always applies"), j, budget)?;
        let th = exact_value(&find_or(DistanceKind::TauH).expect("tau_h always applies"), j, budget)?;
        let scale = spec.rate.powi(j as i32);

        let mut quantities = vec![Quantity::scalar("gh", gh), Quantity::scalar("tau_h", th)];
        let mut checks = vec!["gh <= tau_h".to_string()];
        let mut slack = th - gh;

        if class == TimeClass::BigBang && limit_bb {
            let bb = find_or(DistanceKind::BbGh).expect("both sides are big bangs");
            if bb.budget_exhausted {
                return Err(SequenceError::BudgetTooSmall { j, kind: DistanceKind::BbGh, budget });
            }
            quantities.push(Quantity::interval("bb_gh", bb.lower, bb.upper));
            checks.push("tau_h <= 2*bb_gh.upper".into());
            slack = slack.min(2.0 * bb.upper - th);
        }

        let envelope = match spec.family {
            SequenceFamily::PerturbGeometric => {
                let c = *tau_h0.get_or_insert(th);
                Some(("tau_h <= tau_h(T_0)*rate^j", c * scale))
            }
            SequenceFamily::CollapseTime => Some(("tau_h <= tau_max*rate^j", spec.base.tau_max() * scale)),
            SequenceFamily::RefineBbCone => Some(("tau_h <= 2*eps_j", 2.0 * refine_offset(&spec.base, spec.rate, j))),
        };
        if let Some((text, bound)) = envelope {
            quantities.push(Quantity::scalar("envelope", bound));
            checks.push(text.into());
            slack = slack.min(bound - th);
        }
        checks.push(format!("class == {declared}"));

        rows.push(SequenceRow {
            j,
            n: t.n(),
            class,
            declared,
            results,
            quantities,
            checks,
            slack,
            pass: slack >= -tol && class == declared,
        });
    }
    Ok(rows)
}

/// CSV table: one row per element, interval columns per requested kind.
pub fn render_table(rows: &[SequenceRow], kinds: &[DistanceKind]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["j".to_string(), "n".into(), "class".into(), "declared_class".into()];
    for k in kinds {
        header.push(format!("{k}_lower"));
        header.push(format!("{k}_upper"));
        header.push(format!("{k}_exact"));
    }
    header.extend(["envelope".into(), "checks".into(), "slack".into(), "pass".into()]);
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut rec = vec![r.j.to_string(), r.n.to_string(), r.class.to_string(), r.declared.to_string()];
        for &k in kinds {
            match r.result(k) {
                Some(d) => rec.extend([d.lower.to_string(), d.upper.to_string(), d.is_exact.to_string()]),
                None => rec.extend([String::new(), String::new(), String::new()]),
            }
        }
        let envelope = r.quantities.iter().find(|q| q.name == "envelope").map(|q| q.upper.to_string());
        rec.extend([envelope.unwrap_or_default(), r.checks.join("; "), r.slack.to_string(), r.pass.to_string()]);
        w.write_record(&rec).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

#[cfg(test)]
mod tests {
    use super::*;
    use tml_core::{random_metric_space, random_time_function, MetricModel, TimeModel, DEFAULT_BUDGET};

    fn spec(family: SequenceFamily, length: usize) -> SequenceSpec {
        let x = random_metric_space(21, 3, MetricModel::Euclidean(2));
        let base = random_time_function(22, &x, TimeModel::Cone);
        SequenceSpec { family, base, length, rate: 0.5, seed: 5 }
    }

    #[test]
    fn refine_rows_pass() {
        let s = spec(SequenceFamily::RefineBbCone, 5);
        let rows = run_sequence_experiment(&s, &default_kinds(&s), DEFAULT_BUDGET, 1e-7).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.pass), "{rows:?}");
        assert_eq!(rows[0].result(DistanceKind::TauH).unwrap().upper, 0.0);
    }

    #[test]
    fn collapse_rows_pass() {
        let s = spec(SequenceFamily::CollapseTime, 4);
        let rows = run_sequence_experiment(&s, &[DistanceKind::TauH], DEFAULT_BUDGET, 1e-7).unwrap();
        assert!(rows.iter().all(|r| r.pass));
        assert!(rows[1].result(DistanceKind::BbGh).is_none());
    }

    #[test]
    fn single_element() {
        let s = spec(SequenceFamily::PerturbGeometric, 1);
        let rows = run_sequence_experiment(&s, &default_kinds(&s), DEFAULT_BUDGET, 1e-7).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].pass);
        let table = String::from_utf8(render_table(&rows, &default_kinds(&s))).unwrap();
        assert_eq!(table.lines().count(), 2);
    }
}
