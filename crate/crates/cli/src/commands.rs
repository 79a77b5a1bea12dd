// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gitteams_core::commitcls::{
    attach_labels, evaluate_cascade, read_tagged_csv, train_cascade, write_labels_jsonl, CascadeModel, StaticRules,
};
use gitteams_core::ingest::{
    assemble_teams, parse_commits_jsonl, parse_git_log, read_roster_csv, write_commits_jsonl, write_roster_csv,
    CommitRecord, TeamRecord,
};
use gitteams_core::synthgen::generate_corpus;
use gitteams_core::teamfeat::{build_matrix, read_features_csv, registry, write_features_csv, LabeledTeam};
use gitteams_core::teamstyle::{
    evaluate_team_model, flag_solo_submitters, oracle_label, read_styles_csv, train_team_model, write_styles_csv,
    Algorithm, TeamModelConfig, TeamStyle, TeamStyleModel,
};
use gitteams_core::{CommitCategory, LabeledCommit};
use gitteams_ml::{cohens_kappa, ModelDocument};

use crate::args::*;
use crate::config::{FileConfig, DEFAULT_FOLDS, DEFAULT_SEED};
use crate::error::{CliError, CliResult};
use crate::report::{self, CountRow, Prediction};
use crate::run::Run;

const CASCADE_KIND: &str = "commit_cascade";
const TEAM_KIND: &str = "team_style";

/// Everything a command needs besides its own arguments.
pub struct Ctx {
    pub global: GlobalOpts,
    pub config: FileConfig,
    pub seed: u64,
    pub run: Run,
}

impl Ctx {
    pub fn new(global: GlobalOpts) -> CliResult<Self> {
        let config = match &global.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let seed = global.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
        Ok(Self { global, config, seed, run: Run::default() })
    }

    fn folds(&self, flag: Option<usize>) -> usize {
        flag.or(self.config.folds).unwrap_or(DEFAULT_FOLDS)
    }

    fn out_dir(&self) -> Option<&Path> {
        self.global.out.as_deref()
    }

    fn require_out(&self, what: &str) -> CliResult<PathBuf> {
        self.global.out.clone().ok_or_else(|| CliError::Usage(format!("{what} needs --out <DIR>")))
    }

    /// Prints a report and, with `--out`, also saves it as `<stem>.<ext>`.
    fn emit(&mut self, stem: &str, text: &str) -> CliResult<()> {
        print!("{text}");
        if let Some(dir) = self.global.out.clone() {
            self.run.write(&dir.join(format!("{stem}.{}", self.global.format.ext())), text.as_bytes())?;
        }
        Ok(())
    }
}

fn data_err(path: &Path) -> impl Fn(gitteams_core::Error) -> CliError + '_ {
    move |e| if e.is_data_error() { CliError::input(path, e) } else { CliError::from(e) }
}

fn load_roster(ctx: &mut Ctx, path: &Path) -> CliResult<Vec<gitteams_core::ingest::RosterRow>> {
    let text = ctx.run.read(path)?;
    read_roster_csv(text.as_bytes()).map_err(data_err(path))
}

fn load_commits(ctx: &mut Ctx, path: &Path) -> CliResult<Vec<CommitRecord>> {
    let text = ctx.run.read(path)?;
    parse_commits_jsonl(&text).map_err(data_err(path))
}

/// Teams of a dataset directory, authors resolved against its roster.
fn load_teams(ctx: &mut Ctx, dataset: &Path) -> CliResult<Vec<TeamRecord>> {
    let rows = load_roster(ctx, &dataset.join("roster.csv"))?;
    let commits = load_commits(ctx, &dataset.join("commits.jsonl"))?;
    let assembly = assemble_teams(&rows, &commits)?;
    if assembly.unmatched + assembly.orphaned > 0 {
        log::warn!("{} commits without a roster author, {} without a known team", assembly.unmatched, assembly.orphaned);
    }
    Ok(assembly.teams)
}

fn load_labeled_teams(ctx: &mut Ctx, dataset: &Path) -> CliResult<Vec<LabeledTeam>> {
    let teams = load_teams(ctx, dataset)?;
    let path = dataset.join("labels.jsonl");
    let labels = ctx.run.read(&path)?;
    teams
        .into_iter()
        .map(|team| {
            let commits = attach_labels(&team.commits, &labels).map_err(data_err(&path))?;
            Ok(LabeledTeam { team, commits })
        })
        .collect()
}

fn load_features(ctx: &mut Ctx, dataset: &Path) -> CliResult<(Vec<String>, Vec<Vec<f64>>)> {
    let path = dataset.join("features.csv");
    let text = ctx.run.read(&path)?;
    read_features_csv(text.as_bytes()).map_err(data_err(&path))
}

fn load_model<T: serde::Serialize + serde::de::DeserializeOwned>(ctx: &mut Ctx, path: &Path, kind: &str) -> CliResult<T> {
    let text = ctx.run.read(path)?;
    ModelDocument::<T>::from_json(&text, kind).map(|d| d.model).map_err(|e| CliError::input(path, e))
}

fn save_model<T: serde::Serialize + serde::de::DeserializeOwned>(ctx: &mut Ctx, path: &Path, kind: &str, model: T) -> CliResult<()> {
    let mut text = ModelDocument::new(kind, model).to_json()?;
    text.push('\n');
    ctx.run.write(path, text.as_bytes())
}

pub fn ingest(ctx: &mut Ctx, a: &IngestArgs) -> CliResult<PathBuf> {
    let out = ctx.require_out("ingest")?;
    let rows = load_roster(ctx, &a.roster)?;
    let mut commits = Vec::new();
    if let Some(path) = &a.commits {
        commits = load_commits(ctx, path)?;
    }
    for spec in &a.logs {
        let (team, path) = spec
            .split_once('=')
            .filter(|(t, p)| !t.is_empty() && !p.is_empty())
            .ok_or_else(|| CliError::Usage(format!("--log expects TEAM=PATH, got '{spec}'")))?;
        let path = PathBuf::from(path);
        let text = ctx.run.read(&path)?;
        let mut parsed = parse_git_log(&text).map_err(data_err(&path))?;
        for c in &mut parsed {
            c.team_id = Some(team.to_string());
        }
        commits.extend(parsed);
    }
    let assembly = assemble_teams(&rows, &commits)?;
    let kept: Vec<CommitRecord> = assembly.teams.iter().flat_map(|t| t.commits.iter().cloned()).collect();

    let mut buf = Vec::new();
    write_commits_jsonl(&mut buf, &kept)?;
    ctx.run.write(&out.join("commits.jsonl"), &buf)?;
    let mut buf = Vec::new();
    write_roster_csv(&mut buf, &rows)?;
    ctx.run.write(&out.join("roster.csv"), &buf)?;

    println!("teams,commits,unmatched,orphaned");
    println!("{},{},{},{}", assembly.teams.len(), kept.len(), assembly.unmatched, assembly.orphaned);
    Ok(out)
}

pub fn synth(ctx: &mut Ctx, a: &SynthArgs) -> CliResult<PathBuf> {
    let out = ctx.require_out("synth")?;
    let mut cfg = ctx.config.synth.clone();
    cfg.seed = ctx.seed;
    if let Some(n) = a.teams {
        cfg.n_teams = n;
    }
    if let Some(r) = a.noise {
        cfg.noise_rate = r;
    }
    if let Some(m) = &a.mix {
        cfg.style_mix = [m[0], m[1], m[2]];
    }
    if let Some(c) = &a.commits {
        cfg.commits_per_team = [c[0], c[1]];
    }
    ctx.config.synth = cfg.clone();
    let corpus = generate_corpus(&cfg)?;
    corpus.write_to(&out)?;
    for name in ["commits.jsonl", "roster.csv", "truth_commits.csv", "truth_teams.csv", "tagged.csv"] {
        ctx.run.record(&out.join(name))?;
    }
    let styles: Vec<&str> = corpus.truth.team_styles.iter().map(|(_, s)| s.name()).collect();
    let names: Vec<&str> = TeamStyle::ALL.iter().map(|s| s.name()).collect();
    print!("{}", report::distribution(&report::count_rows(styles.into_iter(), &names), ctx.global.format)?);
    log::info!("{} commits in {} teams", corpus.commit_count(), corpus.teams.len());
    Ok(out)
}

fn tagged_set(ctx: &mut Ctx, path: &Path) -> CliResult<Vec<(String, CommitCategory)>> {
    let text = ctx.run.read(path)?;
    read_tagged_csv(text.as_bytes()).map_err(data_err(path))
}

fn rules(ctx: &Ctx) -> StaticRules {
    StaticRules::bundled(ctx.config.cascade.gibberish_threshold)
}

pub fn train_commits(ctx: &mut Ctx, a: &TrainCommitsArgs) -> CliResult<Option<PathBuf>> {
    let model_path = match (&a.model_out, ctx.out_dir()) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => dir.join("models").join("cascade.json"),
        (None, None) => return Err(CliError::Usage("train-commits needs --model-out or --out".into())),
    };
    let tagged = tagged_set(ctx, &a.tagged)?;
    let model = train_cascade(&tagged, &ctx.config.cascade, rules(ctx))?;
    let stages: Vec<String> = model.stages.iter().map(|s| format!("{}:{}", s.category, s.tfidf.dim())).collect();
    save_model(ctx, &model_path, CASCADE_KIND, model)?;
    println!("model,{}", model_path.display());
    println!("stages,{}", stages.join(" "));
    Ok(ctx.global.out.clone())
}

pub fn eval_commits(ctx: &mut Ctx, a: &EvalCommitsArgs) -> CliResult<Option<PathBuf>> {
    let tagged = tagged_set(ctx, &a.tagged)?;
    let folds = ctx.folds(a.folds);
    let ev = evaluate_cascade(&tagged, folds, ctx.seed, &ctx.config.cascade, &rules(ctx))?;
    let text = report::commit_eval(&ev, ctx.global.format)?;
    ctx.emit("commit_eval", &text)?;
    Ok(ctx.global.out.clone())
}

pub fn label_commits(ctx: &mut Ctx, a: &LabelCommitsArgs) -> CliResult<PathBuf> {
    let out = ctx.global.out.clone().unwrap_or_else(|| a.dataset.clone());
    let model: CascadeModel = load_model(ctx, &a.model, CASCADE_KIND)?;
    let commits = load_commits(ctx, &a.dataset.join("commits.jsonl"))?;
    let labeled: Vec<LabeledCommit> = commits.iter().map(|c| model.label(c)).collect();
    let mut buf = Vec::new();
    write_labels_jsonl(&mut buf, &labeled)?;
    ctx.run.write(&out.join("labels.jsonl"), &buf)?;

    let names: Vec<&str> = CommitCategory::ALL.iter().map(|c| c.name()).collect();
    let rows = report::count_rows(labeled.iter().map(|l| l.category.name()), &names);
    let text = report::distribution(&rows, ctx.global.format)?;
    print!("{text}");
    ctx.run.write(&out.join(format!("label_distribution.{}", ctx.global.format.ext())), text.as_bytes())?;
    Ok(out)
}

pub fn features(ctx: &mut Ctx, a: &DatasetArgs) -> CliResult<PathBuf> {
    let out = ctx.global.out.clone().unwrap_or_else(|| a.dataset.clone());
    let teams = load_labeled_teams(ctx, &a.dataset)?;
    let m = build_matrix(&teams)?;
    let mut buf = Vec::new();
    write_features_csv(&mut buf, &m.team_ids, &m.raw)?;
    ctx.run.write(&out.join("features.csv"), &buf)?;
    ctx.run.write(&out.join("registry.json"), report::json_string(&registry())?.as_bytes())?;
    println!("teams,features");
    println!("{},{}", m.team_ids.len(), m.registry.len());
    Ok(out)
}

pub fn label_teams(ctx: &mut Ctx, a: &DatasetArgs) -> CliResult<PathBuf> {
    let out = ctx.global.out.clone().unwrap_or_else(|| a.dataset.clone());
    let teams = load_labeled_teams(ctx, &a.dataset)?;
    let mut styles = Vec::new();
    for t in &teams {
        match oracle_label(&t.team, &t.commits, &ctx.config.oracle) {
            Ok(s) => styles.push((t.team.team_id.clone(), s)),
            Err(gitteams_core::Error::InsufficientActivity(id)) => log::warn!("team {id} skipped: insufficient activity"),
            Err(e) => return Err(e.into()),
        }
    }
    let mut buf = Vec::new();
    write_styles_csv(&mut buf, &styles)?;
    ctx.run.write(&out.join("team_styles.csv"), &buf)?;
    let names: Vec<&str> = TeamStyle::ALL.iter().map(|s| s.name()).collect();
    let rows: Vec<CountRow> = report::count_rows(styles.iter().map(|(_, s)| s.name()), &names);
    print!("{}", report::distribution(&rows, ctx.global.format)?);
    Ok(out)
}

fn team_config(ctx: &Ctx, a: &TeamModelArgs) -> TeamModelConfig {
    let mut cfg = ctx.config.team.clone();
    if let Some(alg) = a.algorithm {
        cfg.algorithm = match alg {
            AlgorithmArg::Forest => Algorithm::Forest,
            AlgorithmArg::LogisticRfe => Algorithm::LogisticRfe,
        };
    }
    if a.k.is_some() {
        cfg.k_features = a.k;
    }
    cfg
}

/// Feature rows of the labeled teams, in label-file order.
fn training_set(ctx: &mut Ctx, a: &TeamModelArgs) -> CliResult<(Vec<Vec<f64>>, Vec<TeamStyle>)> {
    let (ids, rows) = load_features(ctx, &a.dataset)?;
    let styles_path = a.styles.clone().unwrap_or_else(|| a.dataset.join("team_styles.csv"));
    let text = ctx.run.read(&styles_path)?;
    let styles = read_styles_csv(text.as_bytes()).map_err(data_err(&styles_path))?;
    let by_id: BTreeMap<&str, &Vec<f64>> = ids.iter().map(String::as_str).zip(&rows).collect();
    let mut x = Vec::with_capacity(styles.len());
    let mut y = Vec::with_capacity(styles.len());
    for (id, style) in styles {
        let row = by_id
            .get(id.as_str())
            .ok_or_else(|| CliError::input(&styles_path, format!("team {id} has no feature row")))?;
        x.push((*row).clone());
        y.push(style);
    }
    Ok((x, y))
}

pub fn train_teams(ctx: &mut Ctx, a: &TeamModelArgs) -> CliResult<PathBuf> {
    let cfg = team_config(ctx, a);
    let out = ctx.global.out.clone().unwrap_or_else(|| a.dataset.clone());
    let model_path = a
        .model_out
        .clone()
        .unwrap_or_else(|| out.join("models").join(format!("team_{}.json", algorithm_slug(cfg.algorithm))));
    let (x, y) = training_set(ctx, a)?;
    let model = train_team_model(&x, &y, &cfg, ctx.seed)?;
    println!("stage,features");
    for s in &model.stages {
        println!("{},{}", s.style, s.selected_names().join(" "));
    }
    ctx.config.team = cfg;
    save_model(ctx, &model_path, TEAM_KIND, model)?;
    Ok(out)
}

pub fn eval_teams(ctx: &mut Ctx, a: &TeamModelArgs) -> CliResult<PathBuf> {
    let cfg = team_config(ctx, a);
    let out = ctx.global.out.clone().unwrap_or_else(|| a.dataset.clone());
    let folds = ctx.folds(a.folds);
    let (x, y) = training_set(ctx, a)?;
    let ev = evaluate_team_model(&x, &y, &cfg, folds, ctx.seed)?;
    let slug = algorithm_slug(cfg.algorithm);
    ctx.config.team = cfg;
    let text = report::team_eval(&ev, ctx.global.format)?;
    print!("{text}");
    let ext = ctx.global.format.ext();
    ctx.run.write(&out.join(format!("team_eval_{slug}.{ext}")), text.as_bytes())?;
    ctx.run.write(&out.join(format!("team_eval_{slug}_features.csv")), report::selected_features(&ev)?.as_bytes())?;
    Ok(out)
}

fn algorithm_slug(algorithm: Algorithm) -> String {
    algorithm.to_string().replace('-', "_")
}

pub fn predict(ctx: &mut Ctx, a: &PredictArgs) -> CliResult<PathBuf> {
    let out = ctx.global.out.clone().unwrap_or_else(|| a.dataset.clone());
    let model: TeamStyleModel = load_model(ctx, &a.model, TEAM_KIND)?;
    let (ids, rows) = load_features(ctx, &a.dataset)?;
    let preds: Vec<Prediction> = ids
        .into_iter()
        .zip(&rows)
        .map(|(team_id, row)| {
            let p = model.predict(row);
            Prediction { team_id, style: p.style.to_string(), confidence: p.confidence }
        })
        .collect();
    let text = report::predictions(&preds, ctx.global.format)?;
    print!("{text}");
    ctx.run.write(&out.join(format!("predictions.{}", ctx.global.format.ext())), text.as_bytes())?;
    Ok(out)
}

pub fn flag(ctx: &mut Ctx, a: &PredictArgs) -> CliResult<PathBuf> {
    let out = ctx.global.out.clone().unwrap_or_else(|| a.dataset.clone());
    let model: TeamStyleModel = load_model(ctx, &a.model, TEAM_KIND)?;
    let (ids, rows) = load_features(ctx, &a.dataset)?;
    let teams: Vec<(String, Vec<f64>)> = ids.into_iter().zip(rows).collect();
    let flags = flag_solo_submitters(&model, &teams);
    let text = report::json_string(&flags)?;
    print!("{text}");
    ctx.run.write(&out.join("flags.json"), text.as_bytes())?;
    Ok(out)
}

fn read_id_labels(ctx: &mut Ctx, path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = ctx.run.read(path)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::input(path, e))?;
        if rec.len() < 2 {
            return Err(CliError::input(path, format!("line {}: expected id,label", i + 2)));
        }
        if out.insert(rec[0].to_string(), rec[1].trim().to_string()).is_some() {
            return Err(CliError::input(path, format!("line {}: duplicate id '{}'", i + 2, &rec[0])));
        }
    }
    Ok(out)
}

pub fn kappa(ctx: &mut Ctx, a: &KappaArgs) -> CliResult<Option<PathBuf>> {
    let left = read_id_labels(ctx, &a.labels_a)?;
    let right = read_id_labels(ctx, &a.labels_b)?;
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    for (id, la) in &left {
        match right.get(id) {
            Some(lb) => {
                xa.push(la.clone());
                xb.push(lb.clone());
            }
            None => log::warn!("id {id} only in {}", a.labels_a.display()),
        }
    }
    let missing = right.keys().filter(|k| !left.contains_key(*k)).count();
    if missing > 0 {
        log::warn!("{missing} ids only in {}", a.labels_b.display());
    }
    if xa.is_empty() {
        return Err(CliError::Data("the two label files share no ids".into()));
    }
    let k = cohens_kappa(&xa, &xb)?;
    let text = match ctx.global.format {
        Format::Csv => format!("{k:?}\n"),
        Format::Json => report::json_string(&serde_json::json!({ "kappa": k, "items": xa.len() }))?,
    };
    ctx.emit("kappa", &text)?;
    Ok(ctx.global.out.clone())
}

pub fn registry_cmd(ctx: &mut Ctx) -> CliResult<Option<PathBuf>> {
    let text = report::json_string(&registry())?;
    print!("{text}");
    if let Some(dir) = ctx.global.out.clone() {
        ctx.run.write(&dir.join("registry.json"), text.as_bytes())?;
    }
    Ok(ctx.global.out.clone())
}

/// Runs one command and writes its manifest next to its outputs.
pub fn dispatch(command: &Command, global: GlobalOpts) -> CliResult<()> {
    let mut ctx = Ctx::new(global)?;
    let manifest_dir: Option<PathBuf> = match command {
        Command::Ingest(a) => Some(ingest(&mut ctx, a)?),
        Command::Synth(a) => Some(synth(&mut ctx, a)?),
        Command::TrainCommits(a) => train_commits(&mut ctx, a)?,
        Command::EvalCommits(a) => eval_commits(&mut ctx, a)?,
        Command::LabelCommits(a) => Some(label_commits(&mut ctx, a)?),
        Command::Features(a) => Some(features(&mut ctx, a)?),
        Command::LabelTeams(a) => Some(label_teams(&mut ctx, a)?),
        Command::TrainTeams(a) => Some(train_teams(&mut ctx, a)?),
        Command::EvalTeams(a) => Some(eval_teams(&mut ctx, a)?),
        Command::Predict(a) => Some(predict(&mut ctx, a)?),
        Command::Flag(a) => Some(flag(&mut ctx, a)?),
        Command::Kappa(a) => kappa(&mut ctx, a)?,
        Command::Registry => registry_cmd(&mut ctx)?,
    };
    // Without --out a model written elsewhere still gets a manifest beside it.
    let manifest_dir = manifest_dir.or_else(|| match command {
        Command::TrainCommits(TrainCommitsArgs { model_out: Some(p), .. }) => p.parent().map(Path::to_path_buf),
        _ => None,
    });
    if let Some(dir) = manifest_dir.filter(|_| ctx.run.has_outputs()) {
        let Ctx { global, config, seed, run } = ctx;
        // Team commands name the algorithm so forest and logistic runs in
        // one directory keep separate manifests.
        let stem = match command {
            Command::TrainTeams(_) | Command::EvalTeams(_) => {
                format!("{}-{}", command.name(), algorithm_slug(config.team.algorithm))
            }
            _ => command.name().to_string(),
        };
        run.finish(&dir, &stem, command, &global, seed, &config)?;
    }
    Ok(())
}
