//! Depth-map error metrics, test-set evaluation and the early-stop rule.
//!
//! MSRE is computed in ratio-of-sums form, `Σ (pred − truth)² / Σ truth²`,
//! over every pixel of the decoded `[0, 1]` maps, background included. It is
//! dimensionless and invariant to a common rescaling of both maps. Other
//! normalizations (a per-pixel relative error, or excluding background) give
//! different absolute numbers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{tagged_pairs, DatasetManifest, Pair, SubsetTag, TestSet};
use crate::error::{Error, Result};
use crate::geometry::DepthMap;
use crate::imageio::load_depth;

fn same_dims(pred: &DepthMap, truth: &DepthMap) -> Result<()> {
    if pred.width() != truth.width() || pred.height() != truth.height() {
        return Err(Error::DimensionMismatch(
            pred.width(),
            pred.height(),
            truth.width(),
            truth.height(),
        ));
    }
    Ok(())
}

/// Mean-squared relative error.
pub fn msre(pred: &DepthMap, truth: &DepthMap) -> Result<f64> {
    same_dims(pred, truth)?;
    msre_values(pred.values(), truth.values())
}

pub fn msre_values(pred: &[f64], truth: &[f64]) -> Result<f64> {
    assert_eq!(pred.len(), truth.len());
    let mut err = 0.0;
    let mut energy = 0.0;
    for (&p, &t) in pred.iter().zip(truth) {
        err += (p - t) * (p - t);
        energy += t * t;
    }
    if energy == 0.0 {
        return Err(Error::UndefinedMetric);
    }
    Ok(err / energy)
}

/// Mean absolute error over all pixels.
pub fn mae(pred: &DepthMap, truth: &DepthMap) -> Result<f64> {
    same_dims(pred, truth)?;
    Ok(mae_values(pred.values(), truth.values()))
}

pub fn mae_values(pred: &[f64], truth: &[f64]) -> f64 {
    assert_eq!(pred.len(), truth.len());
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum();
    sum / pred.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageScore {
    /// Surface image path, relative to the dataset root.
    pub path: String,
    pub msre: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub subset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub count: usize,
    pub mean_msre: f64,
    pub config_hash: String,
    pub images: Vec<ImageScore>,
}

impl EvalReport {
    /// Builds a report; scores are ordered by path and summed in that order.
    pub fn new(subset: &str, variant: Option<&str>, config_hash: &str, mut images: Vec<ImageScore>) -> Self {
        images.sort_by(|a, b| a.path.cmp(&b.path));
        let mean = if images.is_empty() {
            0.0
        } else {
            images.iter().map(|s| s.msre).sum::<f64>() / images.len() as f64
        };
        Self {
            subset: subset.to_string(),
            variant: variant.map(str::to_string),
            count: images.len(),
            mean_msre: mean,
            config_hash: config_hash.to_string(),
            images,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissingPredictions {
    pub subset: String,
    pub paths: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub reports: Vec<EvalReport>,
    pub missing: Vec<MissingPredictions>,
}

/// Where a prediction for `pair` is expected: the surface image's relative
/// path under the prediction directory, holding a 16-bit depth PNG.
pub fn prediction_path(pred_dir: &Path, pair: &Pair) -> PathBuf {
    pred_dir.join(&pair.surface)
}

/// Scores predictions for each requested test set of a built dataset.
///
/// Subsets with missing predictions are listed in [`Evaluation::missing`] and
/// produce no report. Unreadable or mis-sized files are hard errors.
pub fn evaluate(
    pred_dir: &Path,
    manifest: &DatasetManifest,
    dataset_root: &Path,
    tags: &[TestSet],
    variant: Option<&str>,
) -> Result<Evaluation> {
    let mut reports = Vec::new();
    let mut missing = Vec::new();
    for &set in tags {
        let pairs = tagged_pairs(manifest, SubsetTag::Test(set));
        if pairs.is_empty() {
            return Err(Error::Manifest(format!("no records tagged test/{set}")));
        }
        let absent: Vec<PathBuf> = pairs
            .iter()
            .map(|p| prediction_path(pred_dir, p))
            .filter(|p| !p.is_file())
            .collect();
        if !absent.is_empty() {
            missing.push(MissingPredictions {
                subset: set.to_string(),
                paths: absent,
            });
            continue;
        }
        let scores = pairs
            .par_iter()
            .map(|p| {
                let pred = load_depth(prediction_path(pred_dir, p))?;
                let truth = load_depth(dataset_root.join(&p.depth))?;
                Ok(ImageScore {
                    path: p.surface.clone(),
                    msre: msre(&pred, &truth)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        reports.push(EvalReport::new(set.name(), variant, &manifest.header.config_hash, scores));
    }
    Ok(Evaluation { reports, missing })
}

/// Percent improvement of `new` over `base` (positive is better).
pub fn relative_improvement(base: &EvalReport, new: &EvalReport) -> Result<f64> {
    if base.subset != new.subset {
        return Err(Error::Config(format!(
            "cannot compare subset `{}` with `{}`",
            base.subset, new.subset
        )));
    }
    relative_improvement_of_means(base.mean_msre, new.mean_msre)
}

pub fn relative_improvement_of_means(base: f64, new: f64) -> Result<f64> {
    if base == 0.0 {
        return Err(Error::ZeroBase);
    }
    Ok(100.0 * (base - new) / base)
}

/// Table with one row per subset, MSRE in units of 10⁻².
pub fn render_results_table(reports: &[EvalReport]) -> String {
    let width = reports.iter().map(|r| r.subset.len()).max().unwrap_or(0).max(8);
    let mut out = String::new();
    writeln!(out, "{:<width$}  MSRE (x10^-2)", "Test Set").unwrap();
    for r in reports {
        writeln!(out, "{:<width$}  {:.3}", r.subset, r.mean_msre * 100.0).unwrap();
    }
    out
}

/// Training variant (rows) × test set (columns), MSRE in units of 10⁻².
pub fn render_comparison_table(reports: &[EvalReport]) -> String {
    let mut columns: Vec<&str> = Vec::new();
    let mut rows: Vec<&str> = Vec::new();
    let mut cells: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for r in reports {
        let v = r.variant.as_deref().unwrap_or("-");
        if !columns.contains(&r.subset.as_str()) {
            columns.push(&r.subset);
        }
        if !rows.contains(&v) {
            rows.push(v);
        }
        cells.insert((v, &r.subset), r.mean_msre * 100.0);
    }
    let w0 = rows.iter().map(|r| r.len()).max().unwrap_or(0).max(8);
    let mut out = String::new();
    write!(out, "{:<w0$}", "Training").unwrap();
    for c in &columns {
        write!(out, "  {:>w$}", c, w = c.len().max(6)).unwrap();
    }
    out.push('\n');
    for row in &rows {
        write!(out, "{row:<w0$}").unwrap();
        for c in &columns {
            let w = c.len().max(6);
            match cells.get(&(*row, *c)) {
                Some(v) => write!(out, "  {v:>w$.3}").unwrap(),
                None => write!(out, "  {:>w$}", "-").unwrap(),
            }
        }
        out.push('\n');
    }
    out
}

/// One JSON object per line, one line per report.
pub fn reports_to_jsonl(reports: &[EvalReport]) -> String {
    reports
        .iter()
        .map(|r| serde_json::to_string(r).expect("report serializes") + "\n")
        .collect()
}

pub fn reports_from_jsonl(text: &str) -> Result<Vec<EvalReport>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: n + 1,
                field: "report".into(),
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopAction {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopDecision {
    pub action: StopAction,
    /// Epoch (0-based index into the history) with the lowest validation error.
    pub rollback_epoch: usize,
}

pub const DEFAULT_PATIENCE: usize = 50;

/// Stop once validation error has risen strictly on each of the last
/// `patience` epochs. A plateau or a single drop restarts the count.
pub fn early_stop(history: &[f64], patience: usize) -> StopDecision {
    let rollback_epoch = history
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b <= v || v.is_nan() => best,
            _ if v.is_nan() => best,
            _ => Some((i, v)),
        })
        .map_or(0, |(i, _)| i);
    let rising = history.len() > patience
        && patience > 0
        && history[history.len() - patience - 1..]
            .windows(2)
            .all(|w| w[1] > w[0]);
    StopDecision {
        action: if rising {
            StopAction::Stop
        } else {
            StopAction::Continue
        },
        rollback_epoch,
    }
}

/// Training-log line written by a trainer, one per epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_mae: f64,
}

/// Validation errors from a line-delimited training log, ordered by epoch.
pub fn val_history_from_log(text: &str) -> Result<Vec<f64>> {
    let mut entries: Vec<EpochLog> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: n + 1,
                field: "epoch".into(),
                message: e.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    entries.sort_by_key(|e| e.epoch);
    for (i, e) in entries.iter().enumerate() {
        if e.epoch != i {
            return Err(Error::Parse {
                line: i + 1,
                field: "epoch".into(),
                message: format!("expected epoch {i}, found {}", e.epoch),
            });
        }
    }
    Ok(entries.into_iter().map(|e| e.val_mae).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform(v: f64) -> DepthMap {
        DepthMap::new(4, 4, vec![v; 16]).unwrap()
    }

    #[test]
    fn identity_and_offsets() {
        let t = uniform(0.5);
        assert_eq!(msre(&t, &t).unwrap(), 0.0);
        assert_eq!(mae(&t, &t).unwrap(), 0.0);
        let m = msre(&uniform(0.55), &t).unwrap();
        assert!((m - 0.01).abs() < 1e-12);
        let a = mae(&uniform(0.6), &t).unwrap();
        assert!((a - 0.1).abs() < 1e-12);
    }

    #[test]
    fn error_paths() {
        let zero = uniform(0.0);
        assert!(matches!(msre(&uniform(0.2), &zero), Err(Error::UndefinedMetric)));
        let small = DepthMap::new(2, 2, vec![0.1; 4]).unwrap();
        assert!(matches!(msre(&small, &uniform(0.5)), Err(Error::DimensionMismatch(2, 2, 4, 4))));
        assert!(mae(&small, &uniform(0.5)).is_err());
    }

    #[test]
    fn improvement_examples() {
        let v = relative_improvement_of_means(0.804, 0.183).unwrap();
        assert!((v - 77.238_805_970_149_25).abs() < 1e-9);
        assert_eq!(relative_improvement_of_means(0.3, 0.3).unwrap(), 0.0);
        assert!((relative_improvement_of_means(0.2, 0.4).unwrap() + 100.0).abs() < 1e-12);
        assert!(matches!(relative_improvement_of_means(0.0, 0.4), Err(Error::ZeroBase)));
        let a = EvalReport::new("Base", None, "h", vec![]);
        let b = EvalReport::new("Full", None, "h", vec![]);
        assert!(relative_improvement(&a, &b).is_err());
    }

    #[test]
    fn early_stop_truth_table() {
        let down: Vec<f64> = (0..300).map(|i| 1.0 / (1.0 + i as f64)).collect();
        assert_eq!(early_stop(&down, 50).action, StopAction::Continue);

        let mut h: Vec<f64> = (0..=10).map(|i| 10.0 - i as f64).collect();
        h.extend((1..=50).map(|i| i as f64 * 0.01));
        let d = early_stop(&h, 50);
        assert_eq!(d, StopDecision { action: StopAction::Stop, rollback_epoch: 10 });
        // one rise short
        assert_eq!(early_stop(&h[..h.len() - 1], 50).action, StopAction::Continue);

        let mut osc = vec![5.0];
        for _ in 0..20 {
            for _ in 0..49 {
                let last = *osc.last().unwrap();
                osc.push(last + 0.1);
            }
            let last = *osc.last().unwrap();
            osc.push(last - 0.05);
        }
        for end in 1..=osc.len() {
            assert_eq!(early_stop(&osc[..end], 50).action, StopAction::Continue);
        }

        let mut plateau = vec![1.0, 0.5];
        plateau.extend((0..30).map(|i| 0.6 + i as f64 * 0.01));
        plateau.push(plateau[plateau.len() - 1]);
        plateau.extend((0..30).map(|i| 0.9 + i as f64 * 0.01));
        assert_eq!(early_stop(&plateau, 50).action, StopAction::Continue);
    }

    #[test]
    fn never_stops_before_patience_plus_one() {
        let h: Vec<f64> = (0..51).map(|i| i as f64).collect();
        for n in 1..=50 {
            assert_eq!(early_stop(&h[..n], 50).action, StopAction::Continue);
        }
        assert_eq!(early_stop(&h, 50).action, StopAction::Stop);
        assert_eq!(early_stop(&h, 50).rollback_epoch, 0);
    }

    #[test]
    fn tables_and_records() {
        let r1 = EvalReport::new(
            "Base",
            Some("Final"),
            "abc",
            vec![
                ImageScore { path: "b".into(), msre: 0.002 },
                ImageScore { path: "a".into(), msre: 0.001 },
            ],
        );
        assert_eq!(r1.images[0].path, "a");
        assert!((r1.mean_msre - 0.0015).abs() < 1e-15);
        let t = render_results_table(std::slice::from_ref(&r1));
        assert!(t.contains("Base") && t.contains("0.150"));
        let r2 = EvalReport { subset: "Full".into(), ..r1.clone() };
        let cmp = render_comparison_table(&[r1.clone(), r2.clone()]);
        assert!(cmp.lines().next().unwrap().contains("Full"));
        assert!(cmp.contains("Final"));
        let back = reports_from_jsonl(&reports_to_jsonl(&[r1.clone(), r2.clone()])).unwrap();
        assert_eq!(back, vec![r1, r2]);
    }

    #[test]
    fn training_log_parsing() {
        let log = "{\"epoch\":1,\"train_loss\":0.5,\"val_mae\":0.2}\n{\"epoch\":0,\"train_loss\":0.9,\"val_mae\":0.3}\n";
        assert_eq!(val_history_from_log(log).unwrap(), vec![0.3, 0.2]);
        assert!(val_history_from_log("{\"epoch\":3,\"train_loss\":0.5,\"val_mae\":0.2}").is_err());
    }

    proptest! {
        #[test]
        fn msre_is_scale_invariant(
            vals in proptest::collection::vec((0.0f64..1.0, 0.01f64..1.0), 16),
            c in 0.1f64..1.0,
        ) {
            let (p, t): (Vec<f64>, Vec<f64>) = vals.into_iter().unzip();
            let base = msre_values(&p, &t).unwrap();
            prop_assert!(base >= 0.0);
            prop_assert_eq!(msre_values(&t, &t).unwrap(), 0.0);
            let ps: Vec<f64> = p.iter().map(|v| v * c).collect();
            let ts: Vec<f64> = t.iter().map(|v| v * c).collect();
            let scaled = msre_values(&ps, &ts).unwrap();
            prop_assert!((scaled - base).abs() <= 1e-9 * base.max(1e-12));
        }

        #[test]
        fn report_mean_matches_scores(scores in proptest::collection::vec(0.0f64..1.0, 1..60)) {
            let images = scores
                .iter()
                .enumerate()
                .map(|(i, &m)| ImageScore { path: format!("p{i:03}"), msre: m })
                .collect();
            let r = EvalReport::new("Base", None, "h", images);
            let mean: f64 = r.images.iter().map(|s| s.msre).sum::<f64>() / r.count as f64;
            prop_assert!((r.mean_msre - mean).abs() <= 1e-12);
            prop_assert_eq!(r.count, scores.len());
        }
    }
}
