//! Command-line surface. `main.rs` only parses arguments and maps errors to
//! exit codes; everything else lives here so it can be driven from tests.

mod output;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::conflict_metrics::{pairwise_reports, report_csv_row, CosineGranularity, CSV_HEADER};
use crate::error::{Error, Result};
use crate::merge_engine::{merge, Combiner, MergeMethod, MergeRecipe};
use crate::repr_diag::{
    drop_one_ranking, hiddensim, mds, pairwise_hidden_distance, ActivationSet, Normalization, PerformanceTable,
};
use crate::stats::{anova_oneway, pearson};
use crate::tensor_store::{apply_task_vector, task_vector, Checkpoint, TaskVector};
use crate::theory::{distortion_report, min_enclosing_ball, synth_lmc_ensemble, ReprEnsemble, DEFAULT_TOLERANCE};

use output::{kv, matrix_text, write_file, Emit};

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "MERGEMETER_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mergemeter", version, about = "Merge fine-tuned checkpoints and measure how well they merge")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum NormArg {
    #[default]
    PerDim,
    UnitVector,
    None,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::PerDim => Normalization::PerDim,
            NormArg::UnitVector => Normalization::UnitVector,
            NormArg::None => Normalization::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CosineArg {
    Global,
    PerTensor,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Merge fine-tuned checkpoints into one checkpoint plus a manifest.
    Merge(MergeArgs),
    /// Full mergeability report over an activation set.
    Report(ReportArgs),
    /// Write task vectors (checkpoint minus base).
    Taskvec(TaskvecArgs),
    /// Pairwise parameter-conflict metrics.
    Conflicts(ConflictsArgs),
    /// Pairwise HiddenSim matrix.
    Hiddensim(ActsArgs),
    /// Merging difficulty score per model.
    Mds(ActsArgs),
    /// Diameter, enclosing-ball distortion and budget verdicts.
    Bound(BoundArgs),
    /// Minimum enclosing ball of the stacked hidden states.
    Meb(MebArgs),
    /// Significance tests.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Merging losses from a performance table.
    Losscalc(LosscalcArgs),
    /// Generate a synthetic linear-mode-connected ensemble.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    pub inputs: Vec<PathBuf>,
    /// LA, TA, TIES, DARE or SLERP.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub keep: Option<f64>,
    #[arg(long = "drop-p")]
    pub drop_p: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "slerp-t")]
    pub slerp_t: Option<f64>,
    /// Combiner after DARE masking: TA or TIES.
    #[arg(long)]
    pub combiner: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// TOML recipe; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Activation set (`act/<model>/<datapoint>` tensors).
    #[arg(long, num_args = 1, required = true)]
    pub inputs: PathBuf,
    /// Performance table CSV: task_id,technique,finetuned,merged.
    #[arg(long)]
    pub perf: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub norm: NormArg,
    #[arg(long, value_delimiter = ',')]
    pub budget: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TaskvecArgs {
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ConflictsArgs {
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long, num_args = 2.., required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "per-tensor")]
    pub cosine: CosineArg,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ActsArgs {
    #[arg(long, num_args = 1, required = true)]
    pub inputs: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub norm: NormArg,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, num_args = 1, required = true)]
    pub inputs: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub budget: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct MebArgs {
    #[arg(long, num_args = 1, required = true)]
    pub inputs: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum StatsCommand {
    /// Pearson correlation of two single-column files.
    Pearson {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// One-way ANOVA over a `group,value` CSV.
    Anova {
        #[arg(long)]
        groups: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

#[derive(Debug, Args)]
pub struct LosscalcArgs {
    #[arg(long)]
    pub perf: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "models", default_value_t = 4)]
    pub n_models: usize,
    #[arg(long = "param-dim", default_value_t = 16)]
    pub param_dim: usize,
    #[arg(long = "hidden-dim", default_value_t = 4)]
    pub hidden_dim: usize,
    #[arg(long = "datapoints", default_value_t = 5)]
    pub n_datapoints: usize,
    #[arg(long, default_value_t = 1.0)]
    pub spread: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

/// Reads `MERGEMETER_THREADS` and sizes the global rayon pool.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

/// Runs one parsed invocation, writing reports to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let text = match cli.command {
        Command::Merge(a) => cmd_merge(&a)?,
        Command::Report(a) => cmd_report(&a)?,
        Command::Taskvec(a) => cmd_taskvec(&a)?,
        Command::Conflicts(a) => cmd_conflicts(&a)?,
        Command::Hiddensim(a) => cmd_hiddensim(&a)?,
        Command::Mds(a) => cmd_mds(&a)?,
        Command::Bound(a) => cmd_bound(&a)?,
        Command::Meb(a) => cmd_meb(&a)?,
        Command::Stats(StatsCommand::Pearson { x, y, format }) => cmd_pearson(&x, &y, format)?,
        Command::Stats(StatsCommand::Anova { groups, format }) => cmd_anova(&groups, format)?,
        Command::Losscalc(a) => cmd_losscalc(&a)?,
        Command::Synth(a) => cmd_synth(&a)?,
    };
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn task_vectors(base: &Checkpoint, inputs: &[PathBuf]) -> Result<Vec<TaskVector>> {
    inputs
        .iter()
        .map(|p| task_vector(&Checkpoint::read(p)?, base))
        .collect()
}

fn recipe_from(a: &MergeArgs) -> Result<MergeRecipe> {
    let mut recipe = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            MergeRecipe::from_toml_str(&text)?
        }
        None => MergeRecipe::default(),
    };
    if let Some(m) = &a.method {
        recipe.method = m.parse::<MergeMethod>()?;
    }
    if let Some(l) = a.lambda {
        recipe.scale_lambda = Some(l);
    }
    if let Some(k) = a.keep {
        recipe.trim_keep_fraction = k;
    }
    if let Some(p) = a.drop_p {
        recipe.drop_probability = p;
    }
    if let Some(s) = a.seed {
        recipe.seed = s;
    }
    if let Some(t) = a.slerp_t {
        recipe.slerp_t = t;
    }
    if let Some(c) = &a.combiner {
        recipe.combiner = c.parse::<Combiner>()?;
    }
    if let Some(w) = &a.weights {
        recipe.weights = Some(w.clone());
    }
    Ok(recipe)
}

fn cmd_merge(a: &MergeArgs) -> Result<String> {
    let recipe = recipe_from(a)?;
    if a.inputs.len() < 2 {
        return Err(Error::invalid("merge needs at least two input checkpoints"));
    }
    let base = Checkpoint::read(&a.base)?;
    let taus = task_vectors(&base, &a.inputs)?;
    let refs: Vec<&TaskVector> = taus.iter().collect();
    let merged_tau = merge(&refs, &recipe)?;
    let merged = apply_task_vector(&base, &merged_tau, 1.0, false)?;
    create_dir(&a.out)?;
    let merged_path = a.out.join("merged.mmk");
    merged.write(&merged_path)?;

    let n = taus.len();
    let lambda = match recipe.method {
        MergeMethod::TaskArithmetic | MergeMethod::Ties => recipe.lambda_for(recipe.method, n).to_string(),
        MergeMethod::Dare => {
            let m = match recipe.combiner {
                Combiner::TaskArithmetic => MergeMethod::TaskArithmetic,
                Combiner::Ties => MergeMethod::Ties,
            };
            recipe.lambda_for(m, n).to_string()
        }
        _ => String::new(),
    };
    let weights = recipe
        .weights
        .as_ref()
        .map(|w| w.iter().map(f64::to_string).collect::<Vec<_>>().join(","))
        .unwrap_or_default();
    let mut rows: Vec<(String, String)> = vec![
        ("method".into(), recipe.method.to_string()),
        ("scale_lambda".into(), lambda),
        ("trim_keep_fraction".into(), recipe.trim_keep_fraction.to_string()),
        ("drop_probability".into(), recipe.drop_probability.to_string()),
        ("slerp_t".into(), recipe.slerp_t.to_string()),
        ("seed".into(), recipe.seed.to_string()),
        ("combiner".into(), recipe.combiner.to_string()),
        ("weights".into(), weights),
        ("base".into(), a.base.display().to_string()),
        ("base_digest".into(), base.digest().to_string()),
    ];
    for (i, p) in a.inputs.iter().enumerate() {
        rows.push((format!("input.{i}"), p.display().to_string()));
        rows.push((format!("input.{i}.digest"), Checkpoint::read(p)?.digest().to_string()));
    }
    // Relative to the manifest, which sits next to the merged file.
    rows.push(("merged".into(), "merged.mmk".into()));
    rows.push(("merged_digest".into(), merged.digest().to_string()));
    let manifest = kv(&rows);
    write_file(&a.out.join("manifest.txt"), &manifest)?;
    Ok(Emit::rows(&rows).render(a.format))
}

fn cmd_taskvec(a: &TaskvecArgs) -> Result<String> {
    let base = Checkpoint::read(&a.base)?;
    create_dir(&a.out)?;
    let mut table = Emit::new(&["input", "task_vector", "base_digest", "digest"]);
    for p in &a.inputs {
        let tau = task_vector(&Checkpoint::read(p)?, &base)?;
        let path = a.out.join(format!("{}.tau.mmk", stem(p)));
        tau.write(&path)?;
        let digest = tau.checkpoint().digest();
        table.push(vec![
            p.display().to_string(),
            path.display().to_string(),
            tau.base_digest().to_string(),
            digest.to_string(),
        ]);
    }
    Ok(table.render(a.format))
}

fn cmd_conflicts(a: &ConflictsArgs) -> Result<String> {
    let base = Checkpoint::read(&a.base)?;
    let taus = task_vectors(&base, &a.inputs)?;
    let gran = match a.cosine {
        CosineArg::Global => CosineGranularity::Global,
        CosineArg::PerTensor => CosineGranularity::PerTensor,
    };
    let labels: Vec<String> = a.inputs.iter().map(|p| stem(p)).collect();
    let reports = pairwise_reports(&taus, gran)?;
    let mut out = String::new();
    match a.format {
        Format::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for (i, j, r) in &reports {
                out.push_str(&report_csv_row(&labels[*i], &labels[*j], r));
                out.push('\n');
            }
        }
        Format::Text => {
            let _ = writeln!(out, "cosine_granularity={gran}");
            for (i, j, r) in &reports {
                let pair = format!("{}:{}", labels[*i], labels[*j]);
                let _ = writeln!(out, "{pair}.magnitude_change_ratio={}", r.magnitude_change_ratio);
                let _ = writeln!(out, "{pair}.sign_change_ratio={}", r.sign_change_ratio);
                let _ = writeln!(out, "{pair}.conflicting_magnitude_ratio={}", r.conflicting_magnitude_ratio);
                let _ = writeln!(out, "{pair}.avg_cosine_similarity={}", r.avg_cosine_similarity);
                let _ = writeln!(out, "{pair}.n_positions={}", r.n_positions);
            }
        }
    }
    Ok(out)
}

fn cmd_hiddensim(a: &ActsArgs) -> Result<String> {
    let acts = ActivationSet::read(&a.inputs)?;
    let sim = hiddensim(&pairwise_hidden_distance(&acts, a.norm.into())?)?;
    Ok(match a.format {
        Format::Csv => sim.to_csv(),
        Format::Text => matrix_text(&sim),
    })
}

fn mds_table(labels: &[String], scores: &[f64]) -> Emit {
    let mut table = Emit::new(&["model", "mds"]);
    for (l, s) in labels.iter().zip(scores) {
        table.push(vec![l.clone(), s.to_string()]);
    }
    table
}

fn cmd_mds(a: &ActsArgs) -> Result<String> {
    let acts = ActivationSet::read(&a.inputs)?;
    let sim = hiddensim(&pairwise_hidden_distance(&acts, a.norm.into())?)?;
    let scores = mds(&sim)?;
    Ok(mds_table(&sim.labels, &scores).render(a.format))
}

fn cmd_bound(a: &BoundArgs) -> Result<String> {
    let acts = ActivationSet::read(&a.inputs)?;
    let ens = ReprEnsemble::from_activations(&acts);
    let report = distortion_report(&ens, &a.budget, a.tol)?;
    Ok(match a.format {
        Format::Text => report.to_text(ens.labels()),
        Format::Csv => report.to_csv(ens.labels()),
    })
}

fn cmd_meb(a: &MebArgs) -> Result<String> {
    let acts = ActivationSet::read(&a.inputs)?;
    let ens = ReprEnsemble::from_activations(&acts);
    let ball = min_enclosing_ball(&ens, a.tol)?;
    let labels = ens.labels();
    let rows = vec![
        ("method".to_string(), ball.method.to_string()),
        ("radius".into(), ball.radius.to_string()),
        ("d_star".into(), ball.squared_radius().to_string()),
        ("radius_lower_bound".into(), ball.radius_lower_bound.to_string()),
        ("tolerance".into(), ball.tolerance.to_string()),
        (
            "support".into(),
            ball.support_indices
                .iter()
                .map(|&i| labels[i].clone())
                .collect::<Vec<_>>()
                .join(";"),
        ),
    ];
    let mut emit = Emit::rows(&rows);
    for (l, w) in labels.iter().zip(&ball.alpha) {
        emit.push(vec![format!("alpha.{l}"), w.to_string()]);
    }
    Ok(emit.render(a.format))
}

fn read_column(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        let Some(field) = rec.get(0).filter(|f| !f.is_empty()) else {
            continue;
        };
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => {}
            Err(_) => return Err(Error::Csv(format!("{}: line {}: {field:?} is not a number", path.display(), i + 1))),
        }
    }
    Ok(values)
}

fn cmd_pearson(x: &Path, y: &Path, format: Format) -> Result<String> {
    let r = pearson(&read_column(x)?, &read_column(y)?)?;
    Ok(Emit::rows(&[
        ("r".into(), r.r.to_string()),
        ("n".into(), r.n.to_string()),
        ("t".into(), r.t_stat.to_string()),
        ("p".into(), r.p_two_sided.to_string()),
    ])
    .render_wide(format))
}

/// `group,value` rows; groups keep their order of first appearance.
pub fn read_groups(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["group", "value"] {
        return Err(Error::Csv(format!("expected header group,value, found {headers:?}")));
    }
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        let v: f64 = rec[1]
            .parse()
            .map_err(|_| Error::Csv(format!("row {}: {:?} is not a number", line + 2, &rec[1])))?;
        match groups.iter_mut().find(|(g, _)| *g == rec[0]) {
            Some((_, vals)) => vals.push(v),
            None => groups.push((rec[0].to_string(), vec![v])),
        }
    }
    Ok(groups)
}

fn cmd_anova(path: &Path, format: Format) -> Result<String> {
    let groups: Vec<Vec<f64>> = read_groups(path)?.into_iter().map(|(_, v)| v).collect();
    let r = anova_oneway(&groups)?;
    Ok(Emit::rows(&[
        ("f".into(), r.f_stat.to_string()),
        ("df_between".into(), r.df_between.to_string()),
        ("df_within".into(), r.df_within.to_string()),
        ("p".into(), r.p.to_string()),
        ("degenerate".into(), r.degenerate.to_string()),
    ])
    .render_wide(format))
}

fn loss_table(perf: &PerformanceTable) -> Result<Emit> {
    let losses = perf.losses()?;
    let best = perf.best_losses()?;
    let mut header: Vec<&str> = vec!["task_id"];
    header.extend(losses.keys().map(String::as_str));
    header.push("best");
    let mut table = Emit::new(&header);
    for (t, task) in perf.task_ids.iter().enumerate() {
        let mut row = vec![task.clone()];
        row.extend(losses.values().map(|l| l[t].to_string()));
        row.push(best[t].to_string());
        table.push(row);
    }
    let mut mean_row = vec!["mean".to_string()];
    for l in losses.values().chain(std::iter::once(&best)) {
        mean_row.push(crate::repr_diag::average_merging_loss(l)?.to_string());
    }
    table.push(mean_row);
    Ok(table)
}

fn cmd_losscalc(a: &LosscalcArgs) -> Result<String> {
    let perf = PerformanceTable::read(&a.perf)?;
    Ok(loss_table(&perf)?.render(a.format))
}

fn cmd_synth(a: &SynthArgs) -> Result<String> {
    let (ens, acts) = synth_lmc_ensemble(a.seed, a.n_models, a.param_dim, a.hidden_dim, a.n_datapoints, a.spread)?;
    create_dir(&a.out)?;
    let acts_path = a.out.join("activations.mmk");
    acts.write(&acts_path)?;
    let (base, minima) = ens.checkpoints()?;
    let base_path = a.out.join("base.mmk");
    base.write(&base_path)?;
    let mut rows = vec![
        ("seed".to_string(), a.seed.to_string()),
        ("n_models".into(), a.n_models.to_string()),
        ("param_dim".into(), a.param_dim.to_string()),
        ("hidden_dim".into(), a.hidden_dim.to_string()),
        ("n_datapoints".into(), a.n_datapoints.to_string()),
        ("spread".into(), a.spread.to_string()),
        ("activations".into(), acts_path.display().to_string()),
        ("activations_digest".into(), acts.to_checkpoint()?.digest().to_string()),
        ("base".into(), base_path.display().to_string()),
        ("base_digest".into(), base.digest().to_string()),
    ];
    for (id, ck) in ens.model_ids.iter().zip(&minima) {
        let path = a.out.join(format!("{id}.mmk"));
        ck.write(&path)?;
        rows.push((format!("model.{id}"), path.display().to_string()));
        rows.push((format!("model.{id}.digest"), ck.digest().to_string()));
    }
    Ok(Emit::rows(&rows).render(a.format))
}

fn cmd_report(a: &ReportArgs) -> Result<String> {
    let acts = ActivationSet::read(&a.inputs)?;
    create_dir(&a.out)?;
    let distances = pairwise_hidden_distance(&acts, a.norm.into())?;
    let sim = hiddensim(&distances)?;
    let scores = mds(&sim)?;
    let labels = sim.labels.clone();
    let ens = ReprEnsemble::from_activations(&acts);
    let report = distortion_report(&ens, &a.budget, DEFAULT_TOLERANCE)?;

    write_file(&a.out.join("distances.csv"), &distances.to_csv())?;
    write_file(&a.out.join("hiddensim.csv"), &sim.to_csv())?;
    write_file(&a.out.join("mds.csv"), &mds_table(&labels, &scores).render(Format::Csv))?;
    write_file(&a.out.join("distortion.txt"), &report.to_text(ens.labels()))?;
    write_file(&a.out.join("distortion.csv"), &report.to_csv(ens.labels()))?;

    let worst = scores
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
        .map(|(i, _)| i)
        .expect("mds has entries");
    let mut rows: Vec<(String, String)> = vec![
        ("n_models".into(), acts.n_models().to_string()),
        ("n_datapoints".into(), acts.n_datapoints().to_string()),
        ("hidden_dim".into(), acts.hidden_dim().to_string()),
        ("normalization".into(), Normalization::from(a.norm).to_string()),
        ("worst_mds_model".into(), labels[worst].clone()),
        ("worst_mds".into(), scores[worst].to_string()),
        ("diameter_sq".into(), report.diameter_sq.to_string()),
        ("d_star".into(), report.d_star.to_string()),
        ("upper_bound".into(), report.upper_bound.to_string()),
    ];
    for (budget, verdict) in &report.budgets {
        rows.push((format!("mergeable@{budget}"), verdict.to_string()));
    }

    if acts.n_models() >= 4 {
        let ranking = drop_one_ranking(&distances)?;
        let mut table = Emit::new(&["dropped", "worst_mds", "worst_model"]);
        for c in &ranking {
            table.push(vec![c.dropped.clone(), c.worst_mds.to_string(), c.worst_model.clone()]);
        }
        write_file(&a.out.join("drop_one.csv"), &table.render(Format::Csv))?;
        rows.push(("drop_one_first".into(), ranking[0].dropped.clone()));
    }

    if let Some(perf_path) = &a.perf {
        let perf = PerformanceTable::read(perf_path)?;
        let by_task: BTreeMap<&str, usize> = perf.task_ids.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
        let mut model_tasks = Vec::with_capacity(labels.len());
        for l in &labels {
            let t = by_task.get(l.as_str()).ok_or_else(|| {
                Error::invalid(format!("model {l} has no row in the performance table"))
            })?;
            model_tasks.push(*t);
        }
        if perf.task_ids.len() != labels.len() {
            return Err(Error::invalid("performance table tasks do not match the activation models"));
        }
        write_file(&a.out.join("losses.csv"), &loss_table(&perf)?.render(Format::Csv))?;
        let best = perf.best_losses()?;
        let aligned: Vec<f64> = model_tasks.iter().map(|&t| best[t]).collect();
        let corr = pearson(&scores, &aligned)?;
        let corr_rows = vec![
            ("r".to_string(), corr.r.to_string()),
            ("n".into(), corr.n.to_string()),
            ("t".into(), corr.t_stat.to_string()),
            ("p".into(), corr.p_two_sided.to_string()),
        ];
        write_file(&a.out.join("correlation.txt"), &kv(&corr_rows))?;
        rows.push(("pearson_mds_best_loss.r".into(), corr.r.to_string()));
        rows.push(("pearson_mds_best_loss.p".into(), corr.p_two_sided.to_string()));
    }
    Ok(Emit::rows(&rows).render(a.format))
}
