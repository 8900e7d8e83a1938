//! Classification of affected instances and the comparison statistics over
//! an ensemble of run records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{AnnealError, Result};
use crate::operators::DriverKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InstanceId {
    pub n: usize,
    pub seed: u64,
}

impl std::fmt::Display for InstanceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(n={}, seed={})", self.n, self.seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed { message: String },
}

/// One (instance, driver) simulation. Measured fields are absent on failed
/// runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: usize,
    pub seed: u64,
    pub driver: DriverKind,
    /// Seed of the mixed-sign pattern, for the mixed driver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixed_seed: Option<u64>,
    pub steps: usize,
    pub success_probability: Option<f64>,
    pub min_gap: Option<f64>,
    pub tau_star: Option<f64>,
    pub anticrossings: Option<usize>,
    pub norm_drift: Option<f64>,
    pub wall_time: f64,
    pub status: RunStatus,
    pub config_hash: String,
    pub version: String,
}

impl RunRecord {
    pub fn id(&self) -> InstanceId {
        InstanceId {
            n: self.n,
            seed: self.seed,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }

    /// Copy with the wall time zeroed, for byte-level comparisons between
    /// runs.
    pub fn canonical(&self) -> Self {
        Self {
            wall_time: 0.0,
            ..self.clone()
        }
    }
}

/// The four driver records of one instance.
#[derive(Clone, Debug)]
pub struct InstanceRuns<'a> {
    pub id: InstanceId,
    pub by_driver: [&'a RunRecord; 4],
}

impl<'a> InstanceRuns<'a> {
    pub fn get(&self, driver: DriverKind) -> &'a RunRecord {
        self.by_driver[driver_slot(driver)]
    }

    fn probability(&self, driver: DriverKind) -> f64 {
        self.get(driver).success_probability.unwrap_or(f64::NAN)
    }
}

fn driver_slot(driver: DriverKind) -> usize {
    match driver {
        DriverKind::None => 0,
        DriverKind::Ferro => 1,
        DriverKind::Antiferro => 2,
        DriverKind::Mixed => 3,
    }
}

/// Groups records by instance, ordered by id. Every instance needs exactly
/// one record per driver.
pub fn group_by_instance(records: &[RunRecord]) -> Result<Vec<InstanceRuns<'_>>> {
    let mut groups: BTreeMap<InstanceId, [Option<&RunRecord>; 4]> = BTreeMap::new();
    for r in records {
        let slot = &mut groups.entry(r.id()).or_default()[driver_slot(r.driver)];
        if slot.is_some() {
            return Err(AnnealError::InvalidArgument(format!(
                "duplicate {} record for instance {}",
                r.driver,
                r.id()
            )));
        }
        *slot = Some(r);
    }
    groups
        .into_iter()
        .map(|(id, slots)| {
            let mut by_driver = Vec::with_capacity(4);
            for (kind, slot) in DriverKind::ALL.iter().zip(slots) {
                by_driver.push(slot.ok_or_else(|| {
                    AnnealError::IncompleteData(format!("instance {id} has no {kind} record"))
                })?);
            }
            Ok(InstanceRuns {
                id,
                by_driver: [by_driver[0], by_driver[1], by_driver[2], by_driver[3]],
            })
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub ferro: Vec<InstanceId>,
    pub antiferro: Vec<InstanceId>,
    pub mixed: Vec<InstanceId>,
    /// Instances entering the ratios.
    pub total: usize,
    /// Instances left out because one of their runs failed.
    pub excluded: Vec<InstanceId>,
}

impl Classification {
    pub fn affected(&self, driver: DriverKind) -> &[InstanceId] {
        match driver {
            DriverKind::Ferro => &self.ferro,
            DriverKind::Antiferro => &self.antiferro,
            DriverKind::Mixed => &self.mixed,
            DriverKind::None => &[],
        }
    }
}

/// The coupled driver giving the single best improvement over the
/// transverse-field run, if any. Exact ties go to the earlier driver in
/// F, A, M order.
pub fn best_improvement(p0: f64, pf: f64, pa: f64, pm: f64) -> Option<DriverKind> {
    let mut best: Option<(DriverKind, f64)> = None;
    for (kind, p) in [(DriverKind::Ferro, pf), (DriverKind::Antiferro, pa), (DriverKind::Mixed, pm)] {
        if p > p0 && best.is_none_or(|(_, b)| p > b) {
            best = Some((kind, p));
        }
    }
    best.map(|(kind, _)| kind)
}

pub fn classify_affected(records: &[RunRecord]) -> Result<Classification> {
    let mut out = Classification::default();
    for runs in group_by_instance(records)? {
        if runs.by_driver.iter().any(|r| !r.is_ok() || r.success_probability.is_none()) {
            out.excluded.push(runs.id);
            continue;
        }
        out.total += 1;
        let choice = best_improvement(
            runs.probability(DriverKind::None),
            runs.probability(DriverKind::Ferro),
            runs.probability(DriverKind::Antiferro),
            runs.probability(DriverKind::Mixed),
        );
        match choice {
            Some(DriverKind::Ferro) => out.ferro.push(runs.id),
            Some(DriverKind::Antiferro) => out.antiferro.push(runs.id),
            Some(DriverKind::Mixed) => out.mixed.push(runs.id),
            _ => {}
        }
    }
    Ok(out)
}

/// `R_en = |L^α| / L`.
pub fn enhancement_ratio(affected: usize, total: usize) -> Result<f64> {
    if total == 0 {
        return Err(AnnealError::InvalidArgument("enhancement ratio needs at least one instance".into()));
    }
    if affected > total {
        return Err(AnnealError::InvalidArgument(format!(
            "affected count {affected} exceeds instance count {total}"
        )));
    }
    Ok(affected as f64 / total as f64)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Enhancements {
    /// `(id, P^α / P⁰)` for ids with a nonzero baseline.
    pub finite: Vec<(InstanceId, f64)>,
    /// Ids whose baseline probability is zero.
    pub infinite: Vec<InstanceId>,
}

impl Enhancements {
    pub fn values(&self) -> Vec<f64> {
        self.finite.iter().map(|&(_, v)| v).collect()
    }
}

/// `P^α / P⁰` for each listed instance.
pub fn enhancement_values(records: &[RunRecord], ids: &[InstanceId], driver: DriverKind) -> Result<Enhancements> {
    let groups = group_by_instance(records)?;
    let index: BTreeMap<InstanceId, &InstanceRuns> = groups.iter().map(|g| (g.id, g)).collect();
    let mut out = Enhancements::default();
    for id in ids {
        let runs = index
            .get(id)
            .ok_or_else(|| AnnealError::IncompleteData(format!("no records for instance {id}")))?;
        let p0 = runs.probability(DriverKind::None);
        let p = runs.probability(driver);
        if p0 == 0.0 {
            out.infinite.push(*id);
        } else {
            out.finite.push((*id, p / p0));
        }
    }
    Ok(out)
}

/// Nearest-rank percentile: the `⌈q/100 · m⌉`-th smallest of `m` values.
pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(AnnealError::InvalidArgument("percentile of an empty list".into()));
    }
    if !(q > 0.0 && q <= 100.0) {
        return Err(AnnealError::InvalidArgument(format!("percentile {q} outside (0, 100]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64) / 100.0).ceil().max(1.0) as usize;
    Ok(sorted[rank.min(sorted.len()) - 1])
}

/// Median with the two middle values averaged for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PercentileTable {
    pub p1: f64,
    pub p50: f64,
    pub p99: f64,
}

/// Statistics of one coupled driver over its affected set. The baseline
/// values (suffix `0`) are taken from the transverse-field runs of the same
/// instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriverReport {
    pub driver: DriverKind,
    pub ratio: f64,
    pub affected: Vec<InstanceId>,
    pub enhancement: Option<PercentileTable>,
    pub infinite_enhancements: usize,
    pub median_p0: Option<f64>,
    pub median_p: Option<f64>,
    pub median_gap0: Option<f64>,
    pub median_gap: Option<f64>,
    pub mean_anticrossings0: Option<f64>,
    pub mean_anticrossings: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub instances: usize,
    pub excluded: Vec<InstanceId>,
    pub drivers: Vec<DriverReport>,
}

impl EnsembleReport {
    pub fn driver(&self, driver: DriverKind) -> Option<&DriverReport> {
        self.drivers.iter().find(|d| d.driver == driver)
    }
}

fn collect<F>(index: &BTreeMap<InstanceId, InstanceRuns<'_>>, ids: &[InstanceId], driver: DriverKind, field: F) -> Vec<f64>
where
    F: Fn(&RunRecord) -> Option<f64>,
{
    ids.iter()
        .filter_map(|id| index.get(id).and_then(|runs| field(runs.get(driver))))
        .collect()
}

pub fn build_report(records: &[RunRecord]) -> Result<EnsembleReport> {
    let classes = classify_affected(records)?;
    if classes.total == 0 {
        return Err(AnnealError::IncompleteData("no instance has four successful runs".into()));
    }
    let index: BTreeMap<InstanceId, InstanceRuns> =
        group_by_instance(records)?.into_iter().map(|g| (g.id, g)).collect();
    let mut drivers = Vec::with_capacity(3);
    for driver in DriverKind::COUPLED {
        let ids = classes.affected(driver).to_vec();
        let enh = enhancement_values(records, &ids, driver)?;
        let values = enh.values();
        let enhancement = if values.is_empty() {
            None
        } else {
            Some(PercentileTable {
                p1: percentile(&values, 1.0)?,
                p50: percentile(&values, 50.0)?,
                p99: percentile(&values, 99.0)?,
            })
        };
        let prob = |r: &RunRecord| r.success_probability;
        let gap = |r: &RunRecord| r.min_gap;
        let count = |r: &RunRecord| r.anticrossings.map(|c| c as f64);
        drivers.push(DriverReport {
            driver,
            ratio: enhancement_ratio(ids.len(), classes.total)?,
            enhancement,
            infinite_enhancements: enh.infinite.len(),
            median_p0: median(&collect(&index, &ids, DriverKind::None, prob)),
            median_p: median(&collect(&index, &ids, driver, prob)),
            median_gap0: median(&collect(&index, &ids, DriverKind::None, gap)),
            median_gap: median(&collect(&index, &ids, driver, gap)),
            mean_anticrossings0: mean(&collect(&index, &ids, DriverKind::None, count)),
            mean_anticrossings: mean(&collect(&index, &ids, driver, count)),
            affected: ids,
        });
    }
    Ok(EnsembleReport {
        instances: classes.total,
        excluded: classes.excluded,
        drivers,
    })
}

/// One report per system size.
pub fn build_reports_by_size(records: &[RunRecord]) -> Result<BTreeMap<usize, EnsembleReport>> {
    let mut by_n: BTreeMap<usize, Vec<RunRecord>> = BTreeMap::new();
    for r in records {
        by_n.entry(r.n).or_default().push(r.clone());
    }
    by_n.into_iter().map(|(n, rs)| Ok((n, build_report(&rs)?))).collect()
}

/// Paired `(baseline, driver)` values of one field over the affected set.
pub fn paired_values<F>(records: &[RunRecord], ids: &[InstanceId], driver: DriverKind, field: F) -> Result<Vec<(InstanceId, f64, f64)>>
where
    F: Fn(&RunRecord) -> Option<f64>,
{
    let index: BTreeMap<InstanceId, InstanceRuns> =
        group_by_instance(records)?.into_iter().map(|g| (g.id, g)).collect();
    Ok(ids
        .iter()
        .filter_map(|id| {
            let runs = index.get(id)?;
            Some((*id, field(runs.get(DriverKind::None))?, field(runs.get(driver))?))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(seed: u64, driver: DriverKind, p: f64) -> RunRecord {
        RunRecord {
            n: 4,
            seed,
            driver,
            mixed_seed: None,
            steps: 100,
            success_probability: Some(p),
            min_gap: Some(p / 10.0),
            tau_star: Some(0.5),
            anticrossings: Some(1),
            norm_drift: Some(0.0),
            wall_time: 0.0,
            status: RunStatus::Ok,
            config_hash: "h".into(),
            version: "v".into(),
        }
    }

    fn instance(seed: u64, p: [f64; 4]) -> Vec<RunRecord> {
        DriverKind::ALL.iter().zip(p).map(|(&k, p)| record(seed, k, p)).collect()
    }

    #[test]
    fn classification_examples() {
        let mut rs = instance(0, [0.5, 0.9, 0.3, 0.6]);
        rs.extend(instance(1, [0.9, 0.5, 0.6, 0.7]));
        rs.extend(instance(2, [0.1, 0.2, 0.4, 0.4]));
        rs.extend(instance(3, [0.1, 0.3, 0.3, 0.3]));
        let c = classify_affected(&rs).unwrap();
        let id = |seed| InstanceId { n: 4, seed };
        assert_eq!(c.ferro, vec![id(0), id(3)]);
        assert_eq!(c.antiferro, vec![id(2)]);
        assert!(c.mixed.is_empty());
        assert_eq!(c.total, 4);
    }

    #[test]
    fn baseline_tie_is_not_an_improvement() {
        assert_eq!(best_improvement(0.5, 0.5, 0.4, 0.2), None);
        assert_eq!(best_improvement(0.5, 0.5, 0.5, 0.6), Some(DriverKind::Mixed));
    }

    #[test]
    fn missing_driver_names_the_instance() {
        let mut rs = instance(7, [0.5, 0.9, 0.3, 0.6]);
        rs.pop();
        match classify_affected(&rs) {
            Err(AnnealError::IncompleteData(msg)) => assert!(msg.contains("seed=7") && msg.contains('M')),
            other => panic!("{other:?}"),
        }
        let mut dup = instance(1, [0.5, 0.9, 0.3, 0.6]);
        dup.push(dup[0].clone());
        assert!(classify_affected(&dup).is_err());
    }

    #[test]
    fn failed_runs_exclude_the_instance() {
        let mut rs = instance(0, [0.5, 0.9, 0.3, 0.6]);
        rs.extend(instance(1, [0.5, 0.9, 0.3, 0.6]));
        rs[5].status = RunStatus::Failed { message: "solver".into() };
        rs[5].success_probability = None;
        let c = classify_affected(&rs).unwrap();
        assert_eq!(c.total, 1);
        assert_eq!(c.excluded, vec![InstanceId { n: 4, seed: 1 }]);
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(enhancement_ratio(6880, 10000).unwrap(), 0.688);
        assert_eq!(enhancement_ratio(0, 10).unwrap(), 0.0);
        assert_eq!(enhancement_ratio(10, 10).unwrap(), 1.0);
        assert!(enhancement_ratio(0, 0).is_err());
    }

    #[test]
    fn enhancement_examples() {
        let rs = instance(0, [0.004, 0.4, 0.1, 0.1]);
        let ids = [InstanceId { n: 4, seed: 0 }];
        let e = enhancement_values(&rs, &ids, DriverKind::Ferro).unwrap();
        assert!((e.values()[0] - 100.0).abs() < 1e-12);
        assert!(enhancement_values(&rs, &[], DriverKind::Ferro).unwrap().finite.is_empty());
        let zero = instance(0, [0.0, 0.4, 0.1, 0.1]);
        let e = enhancement_values(&zero, &ids, DriverKind::Ferro).unwrap();
        assert_eq!(e.infinite, ids.to_vec());
        assert!(e.finite.is_empty());
    }

    #[test]
    fn percentile_examples() {
        let values: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&values, 99.0).unwrap(), 99.0);
        assert_eq!(percentile(&values, 1.0).unwrap(), 1.0);
        assert_eq!(percentile(&values, 50.0).unwrap(), 50.0);
        assert_eq!(percentile(&[3.5], 1.0).unwrap(), 3.5);
        assert_eq!(percentile(&[3.5], 99.0).unwrap(), 3.5);
        assert!(percentile(&[], 50.0).is_err());
        assert!(percentile(&[1.0], 0.0).is_err());
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn report_on_four_instances() {
        let mut rs = instance(0, [0.5, 0.9, 0.3, 0.6]);
        rs.extend(instance(1, [0.9, 0.5, 0.6, 0.7]));
        rs.extend(instance(2, [0.1, 0.2, 0.4, 0.4]));
        rs.extend(instance(3, [0.1, 0.3, 0.3, 0.3]));
        rs[13].anticrossings = Some(3);
        let report = build_report(&rs).unwrap();
        assert_eq!(report.instances, 4);
        let f = report.driver(DriverKind::Ferro).unwrap();
        assert_eq!(f.ratio, 0.5);
        assert!((f.median_p0.unwrap() - 0.3).abs() < 1e-12);
        assert!((f.median_p.unwrap() - 0.6).abs() < 1e-12);
        let t = f.enhancement.unwrap();
        assert!((t.p1 - 1.8).abs() < 1e-12 && (t.p50 - 1.8).abs() < 1e-12 && (t.p99 - 3.0).abs() < 1e-12);
        assert_eq!(f.mean_anticrossings, Some(2.0));
        let a = report.driver(DriverKind::Antiferro).unwrap();
        assert_eq!(a.ratio, 0.25);
        assert!((a.median_gap.unwrap() - 0.04).abs() < 1e-12);
        assert!((a.median_gap0.unwrap() - 0.01).abs() < 1e-12);
        let m = report.driver(DriverKind::Mixed).unwrap();
        assert_eq!(m.ratio, 0.0);
        assert!(m.enhancement.is_none() && m.median_p0.is_none() && m.mean_anticrossings.is_none());

        let mut shuffled = rs.clone();
        shuffled.reverse();
        assert_eq!(build_report(&shuffled).unwrap(), report);
    }
}
