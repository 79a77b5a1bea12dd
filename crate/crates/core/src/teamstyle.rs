// SPDX-License-Identifier: Apache-2.0

//! Team work-style labeling and prediction.
//!
//! [`oracle_label`] applies the tagging rubric directly to churn shares.
//! [`TeamStyleModel`] learns the same distinction from the feature registry
//! with one binary classifier per style, evaluated in a fixed order.

use std::fmt;
use std::str::FromStr;

use gitteams_ml::cv::training_indices;
use gitteams_ml::{
    prf1, rfe_select, rng, stratified_kfold, BinaryScores, EvalReport, ForestModel, ForestParams,
    LogisticModel, LogisticParams, Standardizer,
};
use serde::{Deserialize, Serialize};

use crate::commitcls::{CommitCategory, LabeledCommit};
use crate::error::{Error, Result};
use crate::ingest::TeamRecord;
use crate::teamfeat::{feature_index, order_users, registry, REGISTRY_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TeamStyle {
    Collaborative,
    Cooperative,
    SoloSubmit,
}

impl TeamStyle {
    pub const ALL: [TeamStyle; 3] = [TeamStyle::Collaborative, TeamStyle::Cooperative, TeamStyle::SoloSubmit];

    pub fn name(self) -> &'static str {
        match self {
            TeamStyle::Collaborative => "Collaborative",
            TeamStyle::Cooperative => "Cooperative",
            TeamStyle::SoloSubmit => "SoloSubmit",
        }
    }
}

impl fmt::Display for TeamStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TeamStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let key: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        match key.as_str() {
            "collaborative" => Ok(TeamStyle::Collaborative),
            "cooperative" => Ok(TeamStyle::Cooperative),
            "solosubmit" | "solosubmitting" | "solo" => Ok(TeamStyle::SoloSubmit),
            _ => Err(format!("unknown team style '{s}'")),
        }
    }
}

/// Parts of the project the rubric inspects.
pub const RUBRIC_PARTS: [CommitCategory; 5] = [
    CommitCategory::Implementation,
    CommitCategory::Test,
    CommitCategory::Bugfix,
    CommitCategory::Documentation,
    CommitCategory::Style,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    /// Team churn (lines) a part needs before it counts as active.
    pub min_part_churn: u64,
    pub share_low: f64,
    pub share_high: f64,
    pub min_shared_parts: usize,
    /// Whole-project churn share of user 0 below which the team is solo.
    pub solo_share: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { min_part_churn: 30, share_low: 0.30, share_high: 0.70, min_shared_parts: 2, solo_share: 0.20 }
    }
}

/// Rubric label from churn shares.
///
/// A part is active when the team's churn in it reaches
/// `min_part_churn`. The team is Collaborative when user 0 holds a share in
/// `[share_low, share_high]` of at least `min_shared_parts` active parts,
/// SoloSubmit when user 0's whole-project churn share is below
/// `solo_share`, and Cooperative otherwise.
pub fn oracle_label(team: &TeamRecord, labeled: &[LabeledCommit], config: &OracleConfig) -> Result<TeamStyle> {
    let ordering = order_users(team, labeled);
    let mut part_churn = [[0u64; 2]; RUBRIC_PARTS.len()];
    let mut whole = [0u64; 2];
    for l in labeled {
        let user = match l.commit.author_id.as_deref() {
            Some(id) if id == ordering.user0 => 0,
            Some(id) if id == ordering.user1 => 1,
            _ => {
                return Err(Error::UnknownAuthor { sha: l.commit.sha.clone(), team: team.team_id.clone() })
            }
        };
        let churn = l.commit.churn();
        whole[user] += churn;
        if let Some(p) = RUBRIC_PARTS.iter().position(|&c| c == l.category) {
            part_churn[p][user] += churn;
        }
    }

    let active: Vec<&[u64; 2]> = part_churn
        .iter()
        .filter(|c| c[0] + c[1] >= config.min_part_churn && c[0] + c[1] > 0)
        .collect();
    if active.is_empty() {
        return Err(Error::InsufficientActivity(team.team_id.clone()));
    }
    let shared = active
        .iter()
        .filter(|c| {
            let share = c[0] as f64 / (c[0] + c[1]) as f64;
            (config.share_low..=config.share_high).contains(&share)
        })
        .count();
    if shared >= config.min_shared_parts {
        return Ok(TeamStyle::Collaborative);
    }
    let total = whole[0] + whole[1];
    let share0 = if total > 0 { whole[0] as f64 / total as f64 } else { 0.0 };
    if share0 < config.solo_share {
        Ok(TeamStyle::SoloSubmit)
    } else {
        Ok(TeamStyle::Cooperative)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Forest,
    LogisticRfe,
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_lowercase().replace('-', "_").as_str() {
            "forest" | "random_forest" | "rf" => Ok(Algorithm::Forest),
            "logistic_rfe" | "logistic" | "lr" => Ok(Algorithm::LogisticRfe),
            _ => Err(format!("unknown algorithm '{s}' (expected forest or logistic-rfe)")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Forest => "forest",
            Algorithm::LogisticRfe => "logistic-rfe",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TeamModelConfig {
    pub algorithm: Algorithm,
    /// Selected features per stage; `None` uses 12 for forests and 26 for
    /// logistic RFE.
    pub k_features: Option<usize>,
    pub stage_order: Vec<TeamStyle>,
    pub fallback: TeamStyle,
    pub forest: ForestParams,
    pub logistic: LogisticParams,
}

impl Default for TeamModelConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Forest,
            k_features: None,
            stage_order: vec![TeamStyle::SoloSubmit, TeamStyle::Cooperative, TeamStyle::Collaborative],
            fallback: TeamStyle::Collaborative,
            forest: ForestParams::default(),
            logistic: LogisticParams::default(),
        }
    }
}

impl TeamModelConfig {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        Self { algorithm, ..Self::default() }
    }

    pub fn k(&self) -> usize {
        self.k_features.unwrap_or(match self.algorithm {
            Algorithm::Forest => 12,
            Algorithm::LogisticRfe => 26,
        })
    }

    fn validate(&self) -> Result<()> {
        let mut seen = Vec::new();
        for s in &self.stage_order {
            if seen.contains(s) {
                return Err(Error::Config(format!("{s} appears twice in the stage order")));
            }
            seen.push(*s);
        }
        if self.k() == 0 {
            return Err(Error::Config("k_features must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StageModel {
    Forest(ForestModel),
    Logistic(LogisticModel),
}

impl StageModel {
    /// Positive decision and the probability of the positive class.
    fn decide(&self, x: &[f64]) -> (bool, f64) {
        match self {
            StageModel::Forest(f) => (f.predict(x) == 1, f.predict_proba(x)[1]),
            StageModel::Logistic(m) => {
                let p = m.predict_proba(x);
                (p >= 0.5, p)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleStage {
    pub style: TeamStyle,
    pub selected: Vec<usize>,
    pub model: StageModel,
}

impl StyleStage {
    fn project(&self, standardized: &[f64]) -> Vec<f64> {
        self.selected.iter().map(|&i| standardized[i]).collect()
    }

    pub fn selected_names(&self) -> Vec<String> {
        self.selected.iter().map(|&i| registry()[i].clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamStyleModel {
    pub algorithm: Algorithm,
    pub registry_version: u32,
    pub standardizer: Standardizer,
    pub stages: Vec<StyleStage>,
    pub fallback: TeamStyle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StylePrediction {
    pub style: TeamStyle,
    /// Index of the stage that fired, `None` for the fallback.
    pub stage: Option<usize>,
    /// Positive-class probability of the firing stage; for the fallback,
    /// one minus the largest stage probability.
    pub confidence: f64,
}

fn top_k_by_importance(importances: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..importances.len()).collect();
    idx.sort_by(|&a, &b| importances[b].total_cmp(&importances[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

fn project_rows(rows: &[Vec<f64>], columns: &[usize]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| columns.iter().map(|&c| r[c]).collect()).collect()
}

/// Fits the standardizer, per-stage feature selection and per-stage binary
/// models on raw (unstandardized) feature rows.
pub fn train_team_model(
    raw: &[Vec<f64>],
    labels: &[TeamStyle],
    config: &TeamModelConfig,
    seed: u64,
) -> Result<TeamStyleModel> {
    config.validate()?;
    if raw.len() != labels.len() {
        return Err(gitteams_ml::MlError::DimensionMismatch { expected: raw.len(), found: labels.len() }.into());
    }
    for style in TeamStyle::ALL {
        if !labels.contains(&style) {
            return Err(Error::MissingStyle(style));
        }
    }
    let standardizer = Standardizer::fit(raw)?;
    let x = standardizer.apply(raw);
    let d = standardizer.dim();
    let k = config.k().min(d);

    let mut stages = Vec::with_capacity(config.stage_order.len());
    for (s, &style) in config.stage_order.iter().enumerate() {
        let y: Vec<bool> = labels.iter().map(|&l| l == style).collect();
        let (selected, model) = match config.algorithm {
            Algorithm::Forest => {
                let selected = if k == d {
                    (0..d).collect()
                } else {
                    let ranker = ForestModel::fit_binary(&x, &y, &config.forest, rng::derive_seed(seed, &[s as u64, 0]))?;
                    top_k_by_importance(&ranker.feature_importances(), k)
                };
                let xs = project_rows(&x, &selected);
                let forest = ForestModel::fit_binary(&xs, &y, &config.forest, rng::derive_seed(seed, &[s as u64, 1]))?;
                (selected, StageModel::Forest(forest))
            }
            Algorithm::LogisticRfe => {
                let selected = rfe_select(&x, &y, k, &config.logistic)?;
                let xs = project_rows(&x, &selected);
                (selected, StageModel::Logistic(LogisticModel::fit(&xs, &y, &config.logistic)?))
            }
        };
        stages.push(StyleStage { style, selected, model });
    }

    Ok(TeamStyleModel {
        algorithm: config.algorithm,
        registry_version: REGISTRY_VERSION,
        standardizer,
        stages,
        fallback: config.fallback,
    })
}

impl TeamStyleModel {
    pub fn predict(&self, raw: &[f64]) -> StylePrediction {
        let z = self.standardizer.apply_row(raw);
        let mut max_p: f64 = 0.0;
        for (i, stage) in self.stages.iter().enumerate() {
            let (positive, p) = stage.model.decide(&stage.project(&z));
            if positive {
                return StylePrediction { style: stage.style, stage: Some(i), confidence: p };
            }
            max_p = max_p.max(p);
        }
        StylePrediction { style: self.fallback, stage: None, confidence: 1.0 - max_p }
    }
}

pub fn predict_style(model: &TeamStyleModel, raw: &[f64]) -> TeamStyle {
    model.predict(raw).style
}

/// Selected features of one stage in one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFeatures {
    pub fold: usize,
    pub style: TeamStyle,
    pub features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamEvaluation {
    pub algorithm: Algorithm,
    pub k_features: usize,
    pub per_style: Vec<EvalReport>,
    pub macro_f1: f64,
    pub selected_features: Vec<StageFeatures>,
}

impl TeamEvaluation {
    pub fn report(&self, style: TeamStyle) -> Option<&EvalReport> {
        self.per_style.iter().find(|r| r.label == style.name())
    }
}

/// Stratified k-fold evaluation. Standardization, selection and training
/// are all refit on each fold's training rows.
pub fn evaluate_team_model(
    raw: &[Vec<f64>],
    labels: &[TeamStyle],
    config: &TeamModelConfig,
    folds_k: usize,
    seed: u64,
) -> Result<TeamEvaluation> {
    let folds = stratified_kfold(labels, folds_k, seed)?;
    let mut scores: Vec<Vec<BinaryScores>> = vec![Vec::new(); TeamStyle::ALL.len()];
    let mut selected_features = Vec::new();
    for (f, test_idx) in folds.iter().enumerate() {
        let train = training_indices(&folds, f);
        let train_x: Vec<Vec<f64>> = train.iter().map(|&i| raw[i].clone()).collect();
        let train_y: Vec<TeamStyle> = train.iter().map(|&i| labels[i]).collect();
        let model = train_team_model(&train_x, &train_y, config, rng::derive_seed(seed, &[f as u64]))?;
        for stage in &model.stages {
            selected_features.push(StageFeatures { fold: f, style: stage.style, features: stage.selected_names() });
        }
        let truth: Vec<TeamStyle> = test_idx.iter().map(|&i| labels[i]).collect();
        let pred: Vec<TeamStyle> = test_idx.iter().map(|&i| model.predict(&raw[i]).style).collect();
        for (slot, style) in TeamStyle::ALL.iter().enumerate() {
            scores[slot].push(prf1(&truth, &pred, style)?);
        }
    }
    let per_style: Vec<EvalReport> = TeamStyle::ALL
        .iter()
        .zip(scores)
        .map(|(s, sc)| EvalReport::from_folds(s.name(), sc))
        .collect();
    Ok(TeamEvaluation {
        algorithm: config.algorithm,
        k_features: config.k(),
        macro_f1: gitteams_ml::metrics::macro_f1(&per_style),
        per_style,
        selected_features,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoloFlag {
    pub team_id: String,
    pub style: TeamStyle,
    pub confidence: f64,
    /// The firing stage's selected features with their standardized values.
    pub features: Vec<(String, f64)>,
}

/// Teams predicted SoloSubmit, most confident first. Forest confidences
/// often saturate at 1, so ties go to the smaller whole-project churn share
/// of user 0, then to the team id.
pub fn flag_solo_submitters(model: &TeamStyleModel, teams: &[(String, Vec<f64>)]) -> Vec<SoloFlag> {
    let share_col = feature_index("u0_churn_share_whole").expect("registry feature");
    let mut flags: Vec<(f64, SoloFlag)> = teams
        .iter()
        .filter_map(|(id, raw)| {
            let pred = model.predict(raw);
            if pred.style != TeamStyle::SoloSubmit {
                return None;
            }
            let z = model.standardizer.apply_row(raw);
            let features = pred
                .stage
                .map(|s| {
                    let stage = &model.stages[s];
                    stage.selected.iter().map(|&i| (registry()[i].clone(), z[i])).collect()
                })
                .unwrap_or_default();
            let flag = SoloFlag { team_id: id.clone(), style: pred.style, confidence: pred.confidence, features };
            Some((raw.get(share_col).copied().unwrap_or(0.0), flag))
        })
        .collect();
    flags.sort_by(|(sa, a), (sb, b)| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(sa.total_cmp(sb))
            .then_with(|| a.team_id.cmp(&b.team_id))
    });
    flags.into_iter().map(|(_, f)| f).collect()
}

/// Team style CSV (`team_id,style`).
pub fn read_styles_csv<R: std::io::Read>(reader: R) -> Result<Vec<(String, TeamStyle)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        if rec.len() < 2 {
            return Err(Error::Parse { line, message: "expected team_id,style".into() });
        }
        let style = rec[1].parse().map_err(|message| Error::Parse { line, message })?;
        out.push((rec[0].to_string(), style));
    }
    Ok(out)
}

pub fn write_styles_csv<W: std::io::Write>(writer: W, styles: &[(String, TeamStyle)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["team_id", "style"])?;
    for (id, s) in styles {
        w.write_record([id.as_str(), s.name()])?;
    }
    w.flush()?;
    Ok(())
}
