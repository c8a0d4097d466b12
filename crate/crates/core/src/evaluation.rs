//! Gallery/probe identification experiments.
//!
//! Two protocols are supported. In the consecutive-day protocol each cow
//! is enrolled with its day-1 sample and probed with its day-2 sample of
//! the same collection. In the cross-collection protocol, only cows seen in
//! both collections take part: every collection-1 sample enrolls, every
//! collection-2 sample probes.
//!
//! An accuracy curve draws `trials` random cow subsets per group size,
//! fits on the subset's gallery samples and reports the mean and
//! population standard deviation of rank-1 accuracy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{fit, Algorithm, CowId, FeatureLayout, FeatureVector, Hyperparams};
use crate::error::{Error, Result};
use crate::seed;

/// One feature sample of one cow in one session.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub cow_id: CowId,
    pub collection: u32,
    pub day: u32,
    pub features: FeatureVector,
}

/// Samples with unique `(cow, collection, day)` keys and one shared layout.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for s in &samples {
            if !seen.insert((s.cow_id.as_str(), s.collection, s.day)) {
                return Err(Error::DuplicateSample(format!(
                    "cow {} collection {} day {}",
                    s.cow_id, s.collection, s.day
                )));
            }
            if s.features.layout() != samples[0].features.layout() {
                return Err(Error::InconsistentLayout {
                    expected: samples[0].features.layout().to_string(),
                    found: s.features.layout().to_string(),
                });
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn layout(&self) -> Option<FeatureLayout> {
        self.samples.first().map(|s| s.features.layout())
    }

    pub fn collections(&self) -> BTreeSet<u32> {
        self.samples.iter().map(|s| s.collection).collect()
    }

    /// Concatenate two datasets, re-checking key uniqueness.
    pub fn merge(self, other: Dataset) -> Result<Dataset> {
        let mut samples = self.samples;
        samples.extend(other.samples);
        Dataset::new(samples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    ConsecutiveDay,
    CrossCollection,
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitMode::ConsecutiveDay => "consecutive-day",
            SplitMode::CrossCollection => "cross-collection",
        })
    }
}

impl FromStr for SplitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consecutive-day" => Ok(SplitMode::ConsecutiveDay),
            "cross-collection" => Ok(SplitMode::CrossCollection),
            other => Err(Error::InvalidArgument(format!("unknown split mode {other:?}"))),
        }
    }
}

/// Gallery and probe samples labeled with identity keys.
#[derive(Debug, Clone, Default)]
pub struct Split {
    pub gallery: Vec<(FeatureVector, CowId)>,
    pub probes: Vec<(FeatureVector, CowId)>,
}

impl Split {
    /// Identities present in both gallery and probes, sorted.
    pub fn eligible_cows(&self) -> Vec<CowId> {
        let g: BTreeSet<&CowId> = self.gallery.iter().map(|(_, id)| id).collect();
        let p: BTreeSet<&CowId> = self.probes.iter().map(|(_, id)| id).collect();
        g.intersection(&p).map(|id| (*id).clone()).collect()
    }
}

/// Partition a dataset into gallery and probes.
///
/// In consecutive-day mode on a dataset spanning several collections, the
/// same cow in different collections is a different subject; identities
/// are then qualified as `cow@collection`.
pub fn split_protocol(ds: &Dataset, mode: SplitMode) -> Result<Split> {
    let mut split = Split::default();
    match mode {
        SplitMode::ConsecutiveDay => {
            let qualify = ds.collections().len() > 1;
            let mut days: BTreeMap<(u32, &str), BTreeSet<u32>> = BTreeMap::new();
            for s in &ds.samples {
                days.entry((s.collection, &s.cow_id)).or_default().insert(s.day);
            }
            for ((collection, cow), d) in &days {
                for needed in [1, 2] {
                    if !d.contains(&needed) {
                        return Err(Error::CowMissingSession {
                            cow: cow.to_string(),
                            session: format!("day {needed} of collection {collection}"),
                        });
                    }
                }
            }
            for s in &ds.samples {
                let id = if qualify {
                    format!("{}@{}", s.cow_id, s.collection)
                } else {
                    s.cow_id.clone()
                };
                match s.day {
                    1 => split.gallery.push((s.features.clone(), id)),
                    2 => split.probes.push((s.features.clone(), id)),
                    _ => {}
                }
            }
        }
        SplitMode::CrossCollection => {
            let in_coll = |c: u32| -> BTreeSet<&str> {
                ds.samples
                    .iter()
                    .filter(|s| s.collection == c)
                    .map(|s| s.cow_id.as_str())
                    .collect()
            };
            let first = in_coll(1);
            let second = in_coll(2);
            let shared: BTreeSet<&str> = first.intersection(&second).copied().collect();
            for s in &ds.samples {
                if !shared.contains(s.cow_id.as_str()) {
                    continue;
                }
                let entry = (s.features.clone(), s.cow_id.clone());
                match s.collection {
                    1 => split.gallery.push(entry),
                    2 => split.probes.push(entry),
                    _ => {}
                }
            }
        }
    }
    Ok(split)
}

/// Rank-1 accuracy of one fit/probe round restricted to `cow_subset`.
pub fn run_trial(
    split: &Split,
    cow_subset: &[CowId],
    algorithm: Algorithm,
    hyper: &Hyperparams,
    trial_seed: u64,
) -> Result<f64> {
    if cow_subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let subset: BTreeSet<&CowId> = cow_subset.iter().collect();
    let gallery: Vec<(FeatureVector, CowId)> = split
        .gallery
        .iter()
        .filter(|(_, id)| subset.contains(id))
        .cloned()
        .collect();
    let probes: Vec<&(FeatureVector, CowId)> =
        split.probes.iter().filter(|(_, id)| subset.contains(id)).collect();
    for cow in &subset {
        let enrolled = gallery.iter().any(|(_, id)| id == *cow);
        let probed = probes.iter().any(|(_, id)| id == *cow);
        if !enrolled || !probed {
            return Err(Error::CowNotInSplit((*cow).clone()));
        }
    }
    let model = fit(algorithm, &gallery, hyper, trial_seed)?;
    let mut correct = 0usize;
    for (v, id) in &probes {
        if &model.predict(v)? == id {
            correct += 1;
        }
    }
    Ok(correct as f64 / probes.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub algorithm: Algorithm,
    pub layout: FeatureLayout,
    pub n: usize,
    pub trials: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub entries: Vec<ReportEntry>,
}

/// Settings for [`accuracy_curve`].
#[derive(Debug, Clone, PartialEq)]
pub struct CurveConfig {
    pub algorithm: Algorithm,
    pub mode: SplitMode,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub hyper: Hyperparams,
}

impl CurveConfig {
    pub fn new(algorithm: Algorithm, n_values: Vec<usize>, master_seed: u64) -> Self {
        Self {
            algorithm,
            mode: SplitMode::ConsecutiveDay,
            n_values,
            trials: 50,
            master_seed,
            hyper: Hyperparams::default(),
        }
    }
}

/// Per-trial accuracies for one group size, in trial order.
pub fn trial_accuracies(
    split: &Split,
    eligible: &[CowId],
    n: usize,
    cfg: &CurveConfig,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptySubset);
    }
    if n > eligible.len() {
        return Err(Error::GroupSizeTooLarge {
            n,
            available: eligible.len(),
        });
    }
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let ts = seed::trial_seed(cfg.master_seed, n, t);
            let mut rng = seed::rng(ts);
            let subset: Vec<CowId> = index::sample(&mut rng, eligible.len(), n)
                .into_iter()
                .map(|i| eligible[i].clone())
                .collect();
            run_trial(split, &subset, cfg.algorithm, &cfg.hyper, seed::derive(ts, &[1]))
        })
        .collect()
}

/// Mean/stdev rank-1 accuracy for each group size in `cfg.n_values`.
pub fn accuracy_curve(ds: &Dataset, cfg: &CurveConfig) -> Result<EvaluationReport> {
    let layout = ds.layout().ok_or(Error::EmptyGallery)?;
    let split = split_protocol(ds, cfg.mode)?;
    let eligible = split.eligible_cows();
    let mut report = EvaluationReport::default();
    for &n in &cfg.n_values {
        let accs = trial_accuracies(&split, &eligible, n, cfg)?;
        let (mean, std) = mean_std(&accs);
        report.entries.push(ReportEntry {
            algorithm: cfg.algorithm,
            layout,
            n,
            trials: cfg.trials,
            mean_accuracy: mean,
            std_accuracy: std,
            seed: cfg.master_seed,
        });
    }
    Ok(report)
}

/// Mean and population standard deviation. Empty input gives zeros.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub const REPORT_HEADER: [&str; 7] = [
    "algorithm",
    "layout",
    "n",
    "trials",
    "mean_accuracy",
    "std_accuracy",
    "seed",
];

impl EvaluationReport {
    pub fn extend(&mut self, other: EvaluationReport) {
        self.entries.extend(other.entries);
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(REPORT_HEADER).expect("write to memory");
        for e in &self.entries {
            w.write_record([
                e.algorithm.to_string(),
                e.layout.to_string(),
                e.n.to_string(),
                e.trials.to_string(),
                format!("{:.6}", e.mean_accuracy),
                format!("{:.6}", e.std_accuracy),
                e.seed.to_string(),
            ])
            .expect("write to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii output")
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.clone();
        if header.iter().ne(REPORT_HEADER) {
            return Err(Error::SchemaViolation {
                context: "report csv".into(),
                reason: format!("unexpected header {header:?}"),
            });
        }
        let parse_err = |field: &str, v: &str| Error::Parse {
            context: "report csv".into(),
            reason: format!("bad {field} value {v:?}"),
        };
        let mut entries = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec[i].parse().map_err(|_| parse_err(REPORT_HEADER[i], &rec[i]))
            };
            entries.push(ReportEntry {
                algorithm: rec[0].parse()?,
                layout: rec[1].parse()?,
                n: rec[2].parse().map_err(|_| parse_err("n", &rec[2]))?,
                trials: rec[3].parse().map_err(|_| parse_err("trials", &rec[3]))?,
                mean_accuracy: num(4)?,
                std_accuracy: num(5)?,
                seed: rec[6].parse().map_err(|_| parse_err("seed", &rec[6]))?,
            });
        }
        Ok(Self { entries })
    }
}

/// Write the report as CSV with six-decimal floats.
pub fn export_report(report: &EvaluationReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, report.to_csv_string()).map_err(|e| Error::io(path, e))
}

pub fn import_report(path: impl AsRef<Path>) -> Result<EvaluationReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    EvaluationReport::from_csv_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(cow: &str, collection: u32, day: u32, x: f64) -> Sample {
        let mut v = vec![0.0; 17];
        v[0] = x;
        v[1] = x * x;
        Sample {
            cow_id: cow.into(),
            collection,
            day,
            features: FeatureVector::new(FeatureLayout::Geometry17, v).unwrap(),
        }
    }

    #[test]
    fn duplicate_keys_rejected() {
        let err = Dataset::new(vec![sample("a", 1, 1, 0.0), sample("a", 1, 1, 1.0)]).unwrap_err();
        assert_eq!(err.kind(), "duplicate-sample");
    }

    #[test]
    fn consecutive_day_split() {
        let ds = Dataset::new(vec![
            sample("a", 1, 1, 0.0),
            sample("a", 1, 2, 0.1),
            sample("b", 1, 1, 5.0),
            sample("b", 1, 2, 5.1),
        ])
        .unwrap();
        let s = split_protocol(&ds, SplitMode::ConsecutiveDay).unwrap();
        assert_eq!(s.gallery.len(), 2);
        assert_eq!(s.probes.len(), 2);
        assert_eq!(s.gallery[0].0.values()[0], 0.0);
        assert_eq!(s.probes[1].0.values()[0], 5.1);
        assert_eq!(s.eligible_cows(), vec!["a", "b"]);
    }

    #[test]
    fn missing_day_is_an_error() {
        let ds = Dataset::new(vec![sample("a", 1, 1, 0.0), sample("a", 1, 2, 0.1), sample("b", 1, 1, 5.0)]).unwrap();
        let err = split_protocol(&ds, SplitMode::ConsecutiveDay).unwrap_err();
        assert_eq!(err.kind(), "cow-missing-session");
        assert!(err.to_string().contains('b'));
    }

    #[test]
    fn cross_collection_uses_shared_cows_only() {
        let mut samples = Vec::new();
        for (i, cow) in ["a", "b", "c"].iter().enumerate() {
            for day in [1, 2] {
                samples.push(sample(cow, 1, day, i as f64));
            }
        }
        for (i, cow) in ["b", "c", "d"].iter().enumerate() {
            for day in [1, 2] {
                samples.push(sample(cow, 2, day, i as f64 + 10.0));
            }
        }
        let ds = Dataset::new(samples).unwrap();
        let s = split_protocol(&ds, SplitMode::CrossCollection).unwrap();
        assert_eq!(s.gallery.len(), 4);
        assert_eq!(s.probes.len(), 4);
        assert_eq!(s.eligible_cows(), vec!["b", "c"]);

        let cd = split_protocol(&ds, SplitMode::ConsecutiveDay).unwrap();
        assert_eq!(cd.gallery.len(), 6);
        assert!(cd.eligible_cows().contains(&"b@2".to_string()));
    }

    #[test]
    fn trial_errors_and_single_cow() {
        let ds = Dataset::new(vec![
            sample("a", 1, 1, 0.0),
            sample("a", 1, 2, 3.0),
            sample("b", 1, 1, 1.0),
            sample("b", 1, 2, 1.0),
        ])
        .unwrap();
        let s = split_protocol(&ds, SplitMode::ConsecutiveDay).unwrap();
        let h = Hyperparams::default();
        assert_eq!(run_trial(&s, &[], Algorithm::Knn, &h, 0).unwrap_err().kind(), "empty-subset");
        assert_eq!(
            run_trial(&s, &["zz".into()], Algorithm::Knn, &h, 0).unwrap_err().kind(),
            "cow-not-in-split"
        );
        assert_eq!(run_trial(&s, &["a".into()], Algorithm::Knn, &h, 0).unwrap(), 1.0);
        // probe of a sits closer to b's gallery sample
        assert_eq!(run_trial(&s, &["a".into(), "b".into()], Algorithm::Knn, &h, 0).unwrap(), 0.5);
    }

    #[test]
    fn group_size_checked() {
        let ds = Dataset::new(vec![sample("a", 1, 1, 0.0), sample("a", 1, 2, 0.0)]).unwrap();
        let cfg = CurveConfig::new(Algorithm::Knn, vec![2], 1);
        assert_eq!(accuracy_curve(&ds, &cfg).unwrap_err().kind(), "group-size-too-large");
    }

    #[test]
    fn mean_std_population() {
        assert_eq!(mean_std(&[1.0, 0.0]), (0.5, 0.5));
        assert_eq!(mean_std(&[]), (0.0, 0.0));
    }

    #[test]
    fn report_csv_shape() {
        let empty = EvaluationReport::default();
        assert_eq!(
            empty.to_csv_string(),
            "algorithm,layout,n,trials,mean_accuracy,std_accuracy,seed\n"
        );
        let r = EvaluationReport {
            entries: vec![ReportEntry {
                algorithm: Algorithm::Svm,
                layout: FeatureLayout::Geometry17,
                n: 20,
                trials: 50,
                mean_accuracy: 0.6125,
                std_accuracy: 1.0 / 3.0,
                seed: 42,
            }],
        };
        let text = r.to_csv_string();
        assert_eq!(text.lines().nth(1).unwrap(), "svm,geometry-17,20,50,0.612500,0.333333,42");
        let back = EvaluationReport::from_csv_str(&text).unwrap();
        assert_eq!(back.entries[0].n, 20);
        assert!((back.entries[0].std_accuracy - 1.0 / 3.0).abs() < 1e-6);
        assert!(EvaluationReport::from_csv_str("a,b\n").is_err());
    }
}
