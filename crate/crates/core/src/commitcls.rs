// SPDX-License-Identifier: Apache-2.0

//! Commit message classification cascade.
//!
//! Stages run in a fixed order and the first one that fires assigns the
//! category:
//!
//! 1. keyword rules for Merge, Documentation and Style;
//! 2. the meaningfulness test, which sends messages without enough real
//!    words to Other;
//! 3. one binary TF-IDF + logistic regression stage per remaining category
//!    (Implementation, Test, Bugfix by default);
//! 4. whatever is left is Other.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::OnceLock;

use gitteams_ml::cv::training_indices;
use gitteams_ml::{
    prf1, stratified_kfold, BinaryScores, EvalReport, LogisticModel, LogisticParams, TfidfModel,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::CommitRecord;
use crate::textnorm::{meaningful_ratio, normalize, Lemmatizer, Lexicon, TokenStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CommitCategory {
    Implementation,
    Test,
    Bugfix,
    Documentation,
    Style,
    Merge,
    Other,
}

impl CommitCategory {
    pub const ALL: [CommitCategory; 7] = [
        CommitCategory::Implementation,
        CommitCategory::Test,
        CommitCategory::Bugfix,
        CommitCategory::Documentation,
        CommitCategory::Style,
        CommitCategory::Merge,
        CommitCategory::Other,
    ];

    pub const ML: [CommitCategory; 3] =
        [CommitCategory::Implementation, CommitCategory::Test, CommitCategory::Bugfix];

    pub fn name(self) -> &'static str {
        match self {
            Self::Implementation => "Implementation",
            Self::Test => "Test",
            Self::Bugfix => "Bugfix",
            Self::Documentation => "Documentation",
            Self::Style => "Style",
            Self::Merge => "Merge",
            Self::Other => "Other",
        }
    }
}

impl fmt::Display for CommitCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CommitCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let key: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        Ok(match key.as_str() {
            "implementation" | "impl" | "i" => Self::Implementation,
            "test" | "tests" | "testcases" | "writingtestcases" | "t" => Self::Test,
            "bugfix" | "bugfixes" | "bugfixing" | "bug" | "b" => Self::Bugfix,
            "documentation" | "doc" | "docs" | "d" => Self::Documentation,
            "style" | "stylefixing" | "s" => Self::Style,
            "merge" | "m" => Self::Merge,
            "other" | "o" => Self::Other,
            _ => return Err(format!("unknown commit category '{s}'")),
        })
    }
}

const MERGE_KEYWORDS: &str = include_str!("../data/keywords/merge.txt");
const DOC_KEYWORDS: &str = include_str!("../data/keywords/documentation.txt");
const STYLE_KEYWORDS: &str = include_str!("../data/keywords/style.txt");

/// Keywords plus their lemmas, since they are matched after lemmatizing.
fn keyword_set(text: &str) -> BTreeSet<String> {
    let lemmatizer = Lemmatizer::bundled();
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .flat_map(|w| [lemmatizer.lemma(&w), w])
        .collect()
}

/// Keyword lists for the static stages, matched against lemmatized tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordRules {
    pub merge: BTreeSet<String>,
    pub documentation: BTreeSet<String>,
    pub style: BTreeSet<String>,
}

impl KeywordRules {
    pub fn bundled() -> &'static KeywordRules {
        static BUNDLED: OnceLock<KeywordRules> = OnceLock::new();
        BUNDLED.get_or_init(|| KeywordRules {
            merge: keyword_set(MERGE_KEYWORDS),
            documentation: keyword_set(DOC_KEYWORDS),
            style: keyword_set(STYLE_KEYWORDS),
        })
    }

    fn any(set: &BTreeSet<String>, tokens: &TokenStream) -> bool {
        tokens.as_slice().iter().any(|t| set.contains(t))
    }

    pub fn is_merge(&self, tokens: &TokenStream) -> bool {
        Self::any(&self.merge, tokens)
    }

    pub fn is_documentation(&self, tokens: &TokenStream) -> bool {
        Self::any(&self.documentation, tokens)
    }

    pub fn is_style(&self, tokens: &TokenStream) -> bool {
        Self::any(&self.style, tokens)
    }
}

pub fn match_merge(tokens: &TokenStream) -> bool {
    KeywordRules::bundled().is_merge(tokens)
}

pub fn match_documentation(tokens: &TokenStream) -> bool {
    KeywordRules::bundled().is_documentation(tokens)
}

pub fn match_style(tokens: &TokenStream) -> bool {
    KeywordRules::bundled().is_style(tokens)
}

pub fn is_gibberish(tokens: &TokenStream, lexicon: &Lexicon, threshold: f64) -> bool {
    tokens.is_empty() || meaningful_ratio(tokens, lexicon) < threshold
}

/// Whole-token "pair" (any inflection, after lemmatization) or "pp".
pub fn detect_pair_programming(tokens: &TokenStream) -> bool {
    let lemmatizer = Lemmatizer::bundled();
    tokens.as_slice().iter().any(|t| t == "pp" || lemmatizer.lemma(t) == "pair")
}

/// Everything the cascade needs besides the trained stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticRules {
    pub lexicon: Lexicon,
    pub lemmatizer: Lemmatizer,
    pub keywords: KeywordRules,
    pub gibberish_threshold: f64,
}

impl StaticRules {
    pub fn bundled(gibberish_threshold: f64) -> Self {
        Self {
            lexicon: Lexicon::bundled().clone(),
            lemmatizer: Lemmatizer::bundled().clone(),
            keywords: KeywordRules::bundled().clone(),
            gibberish_threshold,
        }
    }

    pub fn normalize(&self, message: &str) -> TokenStream {
        normalize(message, &self.lexicon, &self.lemmatizer)
    }

    /// Label from the keyword and meaningfulness stages alone.
    pub fn static_label(&self, tokens: &TokenStream) -> Option<CommitCategory> {
        if self.keywords.is_merge(tokens) {
            Some(CommitCategory::Merge)
        } else if self.keywords.is_documentation(tokens) {
            Some(CommitCategory::Documentation)
        } else if self.keywords.is_style(tokens) {
            Some(CommitCategory::Style)
        } else if is_gibberish(tokens, &self.lexicon, self.gibberish_threshold) {
            Some(CommitCategory::Other)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CascadeConfig {
    pub gibberish_threshold: f64,
    pub ml_order: Vec<CommitCategory>,
    pub max_features: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub logistic: LogisticParams,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            gibberish_threshold: 0.34,
            ml_order: CommitCategory::ML.to_vec(),
            max_features: 45,
            ngram_min: 1,
            ngram_max: 4,
            logistic: LogisticParams::default(),
        }
    }
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for c in &self.ml_order {
            if !CommitCategory::ML.contains(c) {
                return Err(Error::Config(format!("{c} cannot be a learned cascade stage")));
            }
            if !seen.insert(*c) {
                return Err(Error::Config(format!("{c} appears twice in the cascade order")));
            }
        }
        if !(0.0..=1.0).contains(&self.gibberish_threshold) {
            return Err(Error::Config("gibberish threshold must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlStage {
    pub category: CommitCategory,
    pub tfidf: TfidfModel,
    pub model: LogisticModel,
}

impl MlStage {
    pub fn fires(&self, tokens: &TokenStream) -> bool {
        self.model.predict(&self.tfidf.transform(tokens.as_slice()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeModel {
    pub rules: StaticRules,
    pub stages: Vec<MlStage>,
}

impl CascadeModel {
    pub fn classify_tokens(&self, tokens: &TokenStream) -> CommitCategory {
        if let Some(c) = self.rules.static_label(tokens) {
            return c;
        }
        self.stages
            .iter()
            .find(|s| s.fires(tokens))
            .map_or(CommitCategory::Other, |s| s.category)
    }

    pub fn classify(&self, message: &str) -> CommitCategory {
        self.classify_tokens(&self.rules.normalize(message))
    }

    pub fn label(&self, commit: &CommitRecord) -> LabeledCommit {
        let tokens = self.rules.normalize(&commit.message);
        LabeledCommit {
            commit: commit.clone(),
            category: self.classify_tokens(&tokens),
            pair_programming: detect_pair_programming(&tokens),
        }
    }
}

pub fn classify(cascade: &CascadeModel, message: &str) -> CommitCategory {
    cascade.classify(message)
}

/// Trains the learned stages in cascade order. Each stage sees only the
/// messages that no earlier stage (static or learned) captured.
pub fn train_cascade(
    tagged: &[(String, CommitCategory)],
    config: &CascadeConfig,
    rules: StaticRules,
) -> Result<CascadeModel> {
    config.validate()?;
    let tokens: Vec<TokenStream> = tagged.iter().map(|(m, _)| rules.normalize(m)).collect();
    let mut remaining: Vec<usize> =
        (0..tagged.len()).filter(|&i| rules.static_label(&tokens[i]).is_none()).collect();

    let mut stages = Vec::with_capacity(config.ml_order.len());
    for &category in &config.ml_order {
        let positives = remaining.iter().filter(|&&i| tagged[i].1 == category).count();
        if positives == 0 {
            return Err(Error::MissingCategory(category));
        }
        let docs: Vec<Vec<String>> =
            remaining.iter().map(|&i| tokens[i].as_slice().to_vec()).collect();
        let tfidf =
            TfidfModel::fit(&docs, config.max_features, (config.ngram_min, config.ngram_max))?;
        let x = tfidf.transform_all(&docs);
        let y: Vec<bool> = remaining.iter().map(|&i| tagged[i].1 == category).collect();
        let model = LogisticModel::fit(&x, &y, &config.logistic)?;
        let stage = MlStage { category, tfidf, model };
        remaining.retain(|&i| !stage.fires(&tokens[i]));
        stages.push(stage);
    }
    Ok(CascadeModel { rules, stages })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCommit {
    pub commit: CommitRecord,
    pub category: CommitCategory,
    pub pair_programming: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelLine {
    sha: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    team: Option<String>,
    category: CommitCategory,
    pair_programming: bool,
}

pub fn write_labels_jsonl<W: Write>(mut out: W, labeled: &[LabeledCommit]) -> Result<()> {
    for l in labeled {
        let line = LabelLine {
            sha: l.commit.sha.clone(),
            team: l.commit.team_id.clone(),
            category: l.category,
            pair_programming: l.pair_programming,
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Joins a labels file back onto its commits by `(team, sha)`.
pub fn attach_labels(commits: &[CommitRecord], labels_jsonl: &str) -> Result<Vec<LabeledCommit>> {
    use std::collections::HashMap;
    let mut by_key: HashMap<(Option<String>, String), (CommitCategory, bool)> = HashMap::new();
    for (idx, raw) in labels_jsonl.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: LabelLine = serde_json::from_str(raw)
            .map_err(|e| Error::Parse { line: idx + 1, message: e.to_string() })?;
        by_key.insert((line.team, line.sha), (line.category, line.pair_programming));
    }
    commits
        .iter()
        .map(|c| {
            let key = (c.team_id.clone(), c.sha.clone());
            let (category, pair_programming) = by_key.get(&key).copied().ok_or_else(|| {
                Error::Parse { line: 0, message: format!("no label for commit {}", c.sha) }
            })?;
            Ok(LabeledCommit { commit: c.clone(), category, pair_programming })
        })
        .collect()
}

/// Parses the tagged-sample CSV (`message,category`, with header).
pub fn read_tagged_csv<R: std::io::Read>(reader: R) -> Result<Vec<(String, CommitCategory)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        if record.len() < 2 {
            return Err(Error::Parse { line, message: "expected message,category".into() });
        }
        let category = record[1]
            .parse::<CommitCategory>()
            .map_err(|message| Error::Parse { line, message })?;
        out.push((record[0].to_string(), category));
    }
    Ok(out)
}

pub fn write_tagged_csv<W: Write>(writer: W, tagged: &[(String, CommitCategory)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["message", "category"])?;
    for (m, c) in tagged {
        w.write_record([m.as_str(), c.name()])?;
    }
    w.flush()?;
    Ok(())
}

/// Cross-validated cascade scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeEvaluation {
    /// Merge, Style, Documentation and Other scored from the static stages
    /// alone (Other = messages failing the meaningfulness test).
    pub static_stages: Vec<EvalReport>,
    /// Every category scored on the full cascade output; Other here is the
    /// residual category.
    pub full_cascade: Vec<EvalReport>,
}

impl CascadeEvaluation {
    pub fn full(&self, category: CommitCategory) -> Option<&EvalReport> {
        self.full_cascade.iter().find(|r| r.label == category.name())
    }

    pub fn static_stage(&self, category: CommitCategory) -> Option<&EvalReport> {
        self.static_stages.iter().find(|r| r.label == category.name())
    }
}

/// Stratified k-fold evaluation; the cascade is retrained on every fold's
/// training split.
pub fn evaluate_cascade(
    tagged: &[(String, CommitCategory)],
    k: usize,
    seed: u64,
    config: &CascadeConfig,
    rules: &StaticRules,
) -> Result<CascadeEvaluation> {
    let truth: Vec<CommitCategory> = tagged.iter().map(|(_, c)| *c).collect();
    let folds = stratified_kfold(&truth, k, seed)?;

    const STATIC: [CommitCategory; 4] = [
        CommitCategory::Merge,
        CommitCategory::Style,
        CommitCategory::Documentation,
        CommitCategory::Other,
    ];
    let mut static_scores: Vec<Vec<BinaryScores>> = vec![Vec::new(); STATIC.len()];
    let mut full_scores: Vec<Vec<BinaryScores>> = vec![Vec::new(); CommitCategory::ALL.len()];

    for (f, test_idx) in folds.iter().enumerate() {
        let train: Vec<(String, CommitCategory)> =
            training_indices(&folds, f).into_iter().map(|i| tagged[i].clone()).collect();
        let model = train_cascade(&train, config, rules.clone())?;

        let fold_truth: Vec<CommitCategory> = test_idx.iter().map(|&i| truth[i]).collect();
        let tokens: Vec<TokenStream> =
            test_idx.iter().map(|&i| model.rules.normalize(&tagged[i].0)).collect();
        let static_pred: Vec<Option<CommitCategory>> =
            tokens.iter().map(|t| model.rules.static_label(t)).collect();
        let full_pred: Vec<CommitCategory> = tokens.iter().map(|t| model.classify_tokens(t)).collect();

        let truth_opt: Vec<Option<CommitCategory>> = fold_truth.iter().copied().map(Some).collect();
        for (slot, &c) in STATIC.iter().enumerate() {
            static_scores[slot].push(prf1(&truth_opt, &static_pred, &Some(c))?);
        }
        for (slot, &c) in CommitCategory::ALL.iter().enumerate() {
            full_scores[slot].push(prf1(&fold_truth, &full_pred, &c)?);
        }
    }

    Ok(CascadeEvaluation {
        static_stages: STATIC
            .iter()
            .zip(static_scores)
            .map(|(c, s)| EvalReport::from_folds(c.name(), s))
            .collect(),
        full_cascade: CommitCategory::ALL
            .iter()
            .zip(full_scores)
            .map(|(c, s)| EvalReport::from_folds(c.name(), s))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(words: &[&str]) -> TokenStream {
        TokenStream::from(words)
    }

    #[test]
    fn keyword_matchers() {
        assert!(match_merge(&ts(&["merge", "branch", "master", "of"])));
        assert!(match_merge(&ts(&["fix", "merge", "conflict"])));
        assert!(!match_merge(&ts(&["fix", "logout"])));

        assert!(match_documentation(&ts(&["add", "javadoc", "class"])));
        assert!(match_documentation(&ts(&["update", "documentation"])));
        assert!(!match_documentation(&ts(&["more", "test", "case"])));

        assert!(match_style(&ts(&["fix", "pmd", "error"])));
        assert!(match_style(&ts(&["checkstyle"])));
        assert!(!match_style(&ts(&["add", "constructor"])));
    }

    #[test]
    fn gibberish() {
        let lex = Lexicon::bundled();
        assert!(is_gibberish(&ts(&["asdf"]), lex, 0.34));
        assert!(!is_gibberish(&ts(&["fix", "logout"]), lex, 0.34));
        assert!(is_gibberish(&ts(&[]), lex, 0.34));
        // one meaningful token in three sits just under the default threshold
        assert!(is_gibberish(&ts(&["fix", "qqq", "zzz"]), lex, 0.34));
    }

    #[test]
    fn pair_programming() {
        assert!(detect_pair_programming(&ts(&["pp", "with", "john"])));
        assert!(detect_pair_programming(&ts(&["pair", "programming", "on", "gui"])));
        assert!(detect_pair_programming(&ts(&["paired"])));
        assert!(!detect_pair_programming(&ts(&["apply", "patch"])));
        assert!(!detect_pair_programming(&ts(&["repair", "app"])));
    }

    #[test]
    fn category_names_round_trip() {
        for c in CommitCategory::ALL {
            assert_eq!(c.name().parse::<CommitCategory>().unwrap(), c);
        }
        assert_eq!("Bug Fixes".parse::<CommitCategory>().unwrap(), CommitCategory::Bugfix);
        assert_eq!("Test Cases".parse::<CommitCategory>().unwrap(), CommitCategory::Test);
        assert!("nonsense".parse::<CommitCategory>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = CascadeConfig::default();
        assert!(c.validate().is_ok());
        c.ml_order = vec![CommitCategory::Merge];
        assert!(c.validate().is_err());
        c.ml_order = vec![CommitCategory::Test, CommitCategory::Test];
        assert!(c.validate().is_err());
    }

    fn small_tagged() -> Vec<(String, CommitCategory)> {
        let mut v = Vec::new();
        for item in ["user", "menu", "board", "card", "player", "route"] {
            v.push((format!("Implemented {item} class"), CommitCategory::Implementation));
            v.push((format!("Added constructor for {item}"), CommitCategory::Implementation));
            v.push((format!("Added test cases for {item}"), CommitCategory::Test));
            v.push((format!("More tests for {item}"), CommitCategory::Test));
            v.push((format!("Fixed bug in {item}"), CommitCategory::Bugfix));
            v.push((format!("Fixed null pointer in {item}"), CommitCategory::Bugfix));
        }
        v.push(("asdf".into(), CommitCategory::Other));
        v.push(("Merge branch 'master'".into(), CommitCategory::Merge));
        v
    }

    #[test]
    fn cascade_precedence_and_partition() {
        let model = train_cascade(&small_tagged(), &CascadeConfig::default(), StaticRules::bundled(0.34)).unwrap();
        assert_eq!(model.stages.len(), 3);
        assert_eq!(model.classify("Merge branch 'master' of ..."), CommitCategory::Merge);
        assert_eq!(model.classify("asdf"), CommitCategory::Other);
        assert_eq!(model.classify("Added Javadoc to the class"), CommitCategory::Documentation);
        assert_eq!(model.classify("Fixed bug in merge of test cases"), CommitCategory::Merge);
        assert_eq!(model.classify("Implemented deck class"), CommitCategory::Implementation);
        assert_eq!(model.classify("Added test cases for deck"), CommitCategory::Test);
        assert_eq!(model.classify("Fixed bug in deck"), CommitCategory::Bugfix);

        let test_stage = model.stages.iter().find(|s| s.category == CommitCategory::Test).unwrap();
        assert!(test_stage.tfidf.vocabulary.contains_key("test"));
    }

    #[test]
    fn missing_category_is_an_error() {
        let tagged: Vec<_> = small_tagged()
            .into_iter()
            .filter(|(_, c)| *c != CommitCategory::Bugfix)
            .collect();
        match train_cascade(&tagged, &CascadeConfig::default(), StaticRules::bundled(0.34)) {
            Err(Error::MissingCategory(CommitCategory::Bugfix)) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn labels_round_trip_through_jsonl() {
        let model = train_cascade(&small_tagged(), &CascadeConfig::default(), StaticRules::bundled(0.34)).unwrap();
        let commit = CommitRecord {
            sha: "c".repeat(40),
            author_key: "a".into(),
            author_email: None,
            author_id: None,
            team_id: Some("t".into()),
            timestamp: 1,
            message: "pp: Fixed bug in user".into(),
            files: vec![],
            is_merge_shape: false,
        };
        let labeled = vec![model.label(&commit)];
        assert!(labeled[0].pair_programming);
        let mut buf = Vec::new();
        write_labels_jsonl(&mut buf, &labeled).unwrap();
        let back = attach_labels(&[commit], std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, labeled);
    }

    #[test]
    fn tagged_csv_round_trip() {
        let tagged = vec![("Fixed, logout".to_string(), CommitCategory::Bugfix)];
        let mut buf = Vec::new();
        write_tagged_csv(&mut buf, &tagged).unwrap();
        assert_eq!(read_tagged_csv(buf.as_slice()).unwrap(), tagged);
        assert!(read_tagged_csv("message,category\nx,wat\n".as_bytes()).is_err());
    }
}
