use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{mae, rmse};
use super::roc::{roc_auc, rounded_confusion, Confusion, RocPoint};
use super::EvalError;
use crate::bn::NetworkStructure;
use crate::etl::bins::discretize;
use crate::etl::transform::Observation;
use crate::pipeline::{evidence_for, merge_probability_or_fallback, train_model};

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub rows: usize,
    pub rmse: f64,
    pub mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub folds: usize,
    pub seed: u64,
    pub rows: usize,
    pub smoothing_alpha: f64,
    pub per_fold: Vec<FoldMetrics>,
    /// Mean of the per-fold values.
    pub aggregate_rmse: f64,
    pub aggregate_mae: f64,
    /// Over all out-of-fold predictions at once.
    pub pooled_rmse: f64,
    pub pooled_mae: f64,
    /// RMSE of always predicting 0.5.
    pub baseline_rmse: f64,
    pub roc_points: Vec<RocPoint>,
    pub auc: f64,
    pub rounded: Confusion,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `fpr,tpr` table, one ROC point per line.
    pub fn roc_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for p in &self.roc_points {
            out.push_str(&format!("{},{}\n", p.fpr, p.tpr));
        }
        out
    }
}

/// Shuffles `0..n` with a seeded ChaCha8 stream and deals the indices
/// round-robin into `k` folds, so fold sizes differ by at most one.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 || k > n {
        return Err(EvalError::InvalidFolds { n, k });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, idx) in indices.into_iter().enumerate() {
        folds[pos % k].push(idx);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// k-fold cross-validation of the full pipeline. Bins are refit on each
/// training fold, so held-out rows never influence the cuts.
pub fn cross_validate(
    rows: &[Observation],
    structure: &NetworkStructure,
    alpha: f64,
    k: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    if let Some(open) = rows.iter().find(|r| !r.is_closed()) {
        return Err(EvalError::OpenRow(open.change_id.clone()));
    }
    let folds = kfold_split(rows.len(), k, seed)?;
    let trained_at = DateTime::<Utc>::UNIX_EPOCH;

    let mut fold_of = vec![0usize; rows.len()];
    for (f, idx) in folds.iter().enumerate() {
        for &i in idx {
            fold_of[i] = f;
        }
    }

    let mut pooled = vec![0.0; rows.len()];
    let actual: Vec<f64> = rows
        .iter()
        .map(|r| r.outcome.expect("checked closed").target())
        .collect();
    let mut per_fold = Vec::with_capacity(k);
    for (f, held_out) in folds.iter().enumerate() {
        let train: Vec<Observation> = rows
            .iter()
            .zip(&fold_of)
            .filter(|(_, &fo)| fo != f)
            .map(|(r, _)| r.clone())
            .collect();
        let model = train_model(&train, structure, alpha, trained_at)
            .map_err(|source| EvalError::Train { fold: f, source })?;

        let mut predicted = Vec::with_capacity(held_out.len());
        let mut truth = Vec::with_capacity(held_out.len());
        for &i in held_out {
            let factors = discretize(&rows[i], model.bins());
            let (p, _) = merge_probability_or_fallback(&model, &evidence_for(structure, &factors))?;
            pooled[i] = p;
            predicted.push(p);
            truth.push(actual[i]);
        }
        per_fold.push(FoldMetrics {
            fold: f,
            rows: held_out.len(),
            rmse: rmse(&predicted, &truth)?,
            mae: mae(&predicted, &truth)?,
        });
    }

    let labels: Vec<bool> = actual.iter().map(|&a| a == 1.0).collect();
    let roc = roc_auc(&pooled, &labels)?;
    let mean = |f: fn(&FoldMetrics) -> f64| per_fold.iter().map(f).sum::<f64>() / k as f64;
    Ok(EvalReport {
        folds: k,
        seed,
        rows: rows.len(),
        smoothing_alpha: alpha,
        aggregate_rmse: mean(|m| m.rmse),
        aggregate_mae: mean(|m| m.mae),
        pooled_rmse: rmse(&pooled, &actual)?,
        pooled_mae: mae(&pooled, &actual)?,
        baseline_rmse: rmse(&vec![0.5; actual.len()], &actual)?,
        roc_points: roc.points,
        auc: roc.auc,
        rounded: rounded_confusion(&pooled, &labels),
        per_fold,
    })
}
