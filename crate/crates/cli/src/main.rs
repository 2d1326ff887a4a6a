use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use morphlab_core::backend::{
    toy, toy_cohort, Backend, ExternalBackend, ToyBackend, ToyCohort, ToyImage, ToyWorld,
};
use morphlab_core::io::{self, PairRecord, ScoreLabels};
use morphlab_core::mad::{detectability_table, DEFAULT_BPCER_TARGETS};
use morphlab_core::model::{Embedding, MadScoreSet, MetaTable, MetricsReport, Provenance, ScorePolarity};
use morphlab_core::pairs::{partition_by_metadata, select_top_pairs, DEFAULT_PAIRS_PER_SPLIT};
use morphlab_core::pipeline::{run_morph_pipeline, MorphOutcome, PipelineConfig, MORPHS_FILE};
use morphlab_core::report::{combine, render_text};
use morphlab_core::vulnerability::{vulnerability_table, VulnerabilityInputs, DEFAULT_FMR_TARGETS};
use morphlab_core::Error;

/// Morph generation by latent interpolation and morphing-attack evaluation.
#[derive(Parser)]
#[command(name = "morphlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select the most similar cross-subject pairs per gender/expression split.
    Pairs(PairsArgs),
    /// Generate morphs for a pair list through an encoder/decoder backend.
    Morph(MorphArgs),
    /// MMPMR/FMMPMR at FMR-anchored thresholds.
    Vuln(VulnArgs),
    /// EER and APCER at fixed BPCER for detector scores.
    Mad(MadArgs),
    /// Render metrics files as tables or merged JSON.
    Report(ReportArgs),
    /// Synthetic toy-world fixtures, scoring and backend.
    #[command(subcommand)]
    Toy(ToyCommand),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct PairsArgs {
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    meta: PathBuf,
    /// Pairs kept per split.
    #[arg(long, default_value_t = DEFAULT_PAIRS_PER_SPLIT)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MorphArgs {
    #[arg(long)]
    pairs: PathBuf,
    /// Image index: `id=` / `path=` lines, paths relative to the index file.
    #[arg(long)]
    images: PathBuf,
    /// `toy` runs in process; `external` runs `morphlab-backend-<NAME>` found
    /// on MORPHLAB_BACKEND_PATH.
    #[arg(long, value_enum, default_value_t = BackendKind::Toy)]
    backend: BackendKind,
    /// Name of the external backend.
    #[arg(long, required_if_eq("backend", "external"))]
    backend_name: Option<String>,
    /// Overrides the lambda stored in the pair list.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Opaque backend parameter, `name=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, String)>,
    #[arg(long)]
    job_dir: PathBuf,
    #[command(flatten)]
    world: WorldArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Toy,
    External,
}

#[derive(Args)]
struct WorldArgs {
    /// Seed of the toy world (must match the fixture).
    #[arg(long, default_value_t = 0)]
    world_seed: u64,
}

#[derive(Args)]
struct VulnArgs {
    /// Mated-morph score files; repeatable.
    #[arg(long, required = true, num_args = 1..)]
    mated: Vec<PathBuf>,
    /// Non-mated score files, one per model; repeatable.
    #[arg(long, required = true, num_args = 1..)]
    nonmated: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_FMR_TARGETS)]
    fmr: Vec<f64>,
    /// Also report FMMPMR.
    #[arg(long)]
    fmmpmr: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct MadArgs {
    /// Detection score files; repeatable.
    #[arg(long, required = true, num_args = 1..)]
    scores: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_BPCER_TARGETS)]
    bpcer: Vec<f64>,
    /// Override the polarity declared in the score files.
    #[arg(long)]
    polarity: Option<ScorePolarity>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Where to write the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// What to print on stdout.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(required = true)]
    metrics: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ToyCommand {
    /// Write a synthetic cohort: source images, image index, embeddings,
    /// metadata and probes.
    Fixture {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 200)]
        subjects: usize,
        #[arg(long, default_value_t = 2)]
        probes: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        world: WorldArgs,
    },
    /// Score morphs from a morph job against fixture probes with the toy
    /// face-recognition feature.
    Score {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long)]
        job_dir: PathBuf,
        #[arg(long, default_value = "toy-fr")]
        model: String,
        #[arg(long, default_value = "toy-morph")]
        morph_type: String,
        #[arg(long)]
        mated_out: PathBuf,
        #[arg(long)]
        nonmated_out: PathBuf,
        #[command(flatten)]
        world: WorldArgs,
    },
    /// Run the toy world as an external backend executable.
    Backend {
        #[command(subcommand)]
        op: BackendOp,
        #[command(flatten)]
        world: WorldArgs,
    },
}

#[derive(Subcommand)]
enum BackendOp {
    Describe,
    Serve { job_dir: PathBuf },
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .ok_or_else(|| format!("expected name=value, got {s:?}"))
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Backend(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_backend() {
            Failure::Backend(e.to_string())
        } else if e.is_internal() {
            Failure::Internal(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn provenance(inputs: &[&Path], parameters: &[(&str, String)]) -> CliResult<Provenance> {
    Ok(Provenance {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        inputs: inputs.iter().map(|p| io::digest_file(p)).collect::<Result<_, _>>()?,
        parameters: parameters.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
    })
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn emit(report: &MetricsReport, output: &OutputArgs) -> CliResult {
    if let Some(out) = &output.out {
        io::write_atomic(out, io::format_report(report)?.as_bytes())?;
    }
    match output.format {
        Format::Text => print!("{}", render_text(report)),
        Format::Json => print!("{}", io::format_report(report)?),
    }
    Ok(())
}

fn cmd_pairs(a: PairsArgs) -> CliResult {
    let embeddings = io::load(&a.embeddings, io::parse_embeddings)?;
    let meta = MetaTable::new(io::load(&a.meta, io::parse_meta)?)?;
    let splits = partition_by_metadata(&embeddings, &meta)?;
    let mut records = Vec::new();
    for (key, split) in splits.iter() {
        if split.is_empty() {
            continue;
        }
        let pairs = select_top_pairs(split, a.k).map_err(|e| Failure::Input(format!("split {key}: {e}")))?;
        records.extend(pairs.into_iter().map(|pair| PairRecord {
            split: key.to_string(),
            pair,
        }));
    }
    io::write_atomic(&a.out, io::format_pairs(&records)?.as_bytes())?;
    eprintln!("wrote {} pairs to {}", records.len(), a.out.display());
    Ok(())
}

fn toy_world(w: &WorldArgs) -> CliResult<ToyWorld> {
    Ok(ToyWorld::with_seed(w.world_seed)?)
}

fn cmd_morph(a: MorphArgs) -> CliResult {
    let pairs: Vec<_> = io::load(&a.pairs, io::parse_pairs)?.into_iter().map(|r| r.pair).collect();
    let base = a.images.parent().unwrap_or(Path::new("."));
    let images = io::load(&a.images, |t| io::parse_image_index(t, base))?;
    if let Some(missing) = pairs
        .iter()
        .flat_map(|p| [&p.source_a, &p.source_b])
        .find(|id| !images.contains_key(*id))
    {
        return Err(Failure::Input(format!("image {missing:?} is not in {}", a.images.display())));
    }
    let backend: Box<dyn Backend> = match (a.backend, &a.backend_name) {
        (BackendKind::Toy, _) => Box::new(ToyBackend::new(toy_world(&a.world)?)),
        (BackendKind::External, Some(name)) => Box::new(ExternalBackend::locate(name)?),
        (BackendKind::External, None) => return Err(Failure::Input("--backend-name is required".into())),
    };
    let config = PipelineConfig {
        lambda: a.lambda,
        seed: a.seed,
        backend_params: a.params.into_iter().collect(),
        ..Default::default()
    };
    let records = run_morph_pipeline(&pairs, &images, backend.as_ref(), &config, &a.job_dir)?;
    let failed: Vec<_> = records
        .iter()
        .filter_map(|r| match &r.outcome {
            MorphOutcome::Failed { reason } => Some(format!("{}: {reason}", r.morph_id)),
            MorphOutcome::Ok { .. } => None,
        })
        .collect();
    eprintln!(
        "{} of {} morphs written; manifest {}",
        records.len() - failed.len(),
        records.len(),
        a.job_dir.join(MORPHS_FILE).display()
    );
    match failed.first() {
        None => Ok(()),
        Some(first) => Err(Failure::Backend(format!("{} morphs failed, first {first}", failed.len()))),
    }
}

fn cmd_vuln(a: VulnArgs) -> CliResult {
    let mut inputs = VulnerabilityInputs::default();
    for p in &a.mated {
        let (labels, set) = io::load(p, io::parse_mated)?;
        let key = (labels.model, labels.morph_type);
        if inputs.mated.insert(key.clone(), set).is_some() {
            return Err(Failure::Input(format!("duplicate mated scores for {}/{}", key.0, key.1)));
        }
    }
    for p in &a.nonmated {
        let (model, set) = io::load(p, io::parse_nonmated)?;
        if inputs.nonmated.insert(model.clone(), set).is_some() {
            return Err(Failure::Input(format!("duplicate non-mated scores for {model}")));
        }
    }
    let files: Vec<&Path> = a.mated.iter().chain(&a.nonmated).map(PathBuf::as_path).collect();
    let prov = provenance(
        &files,
        &[("fmr", join(&a.fmr)), ("fmmpmr", a.fmmpmr.to_string())],
    )?;
    let report = vulnerability_table(&inputs, &a.fmr, a.fmmpmr, prov)?;
    emit(&report, &a.output)
}

fn cmd_mad(a: MadArgs) -> CliResult {
    let mut sets = BTreeMap::new();
    for p in &a.scores {
        let (labels, mut set) = io::load(p, io::parse_mad)?;
        if let Some(pol) = a.polarity {
            set = MadScoreSet::new(set.bona_fide().to_vec(), set.attack().to_vec(), pol)?;
        }
        let key = (labels.model, labels.morph_type);
        if sets.insert(key.clone(), set).is_some() {
            return Err(Failure::Input(format!("duplicate scores for {}/{}", key.0, key.1)));
        }
    }
    let files: Vec<&Path> = a.scores.iter().map(PathBuf::as_path).collect();
    let mut params = vec![("bpcer", join(&a.bpcer))];
    if let Some(p) = a.polarity {
        params.push(("polarity", p.to_string()));
    }
    let report = detectability_table(&sets, &a.bpcer, provenance(&files, &params)?)?;
    emit(&report, &a.output)
}

fn cmd_report(a: ReportArgs) -> CliResult {
    let reports = a
        .metrics
        .iter()
        .map(|p| io::load(p, io::parse_report))
        .collect::<Result<Vec<_>, _>>()?;
    let combined = combine(reports)?;
    let text = match a.format {
        Format::Text => combined.iter().map(render_text).collect::<Vec<_>>().join("\n"),
        Format::Json => combined
            .iter()
            .map(io::format_report)
            .collect::<Result<Vec<_>, _>>()?
            .join(""),
    };
    match &a.out {
        Some(out) => io::write_atomic(out, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

const FIXTURE_IMAGES: &str = "images";
const FIXTURE_INDEX: &str = "images.txt";
const FIXTURE_EMBEDDINGS: &str = "embeddings.txt";
const FIXTURE_META: &str = "meta.txt";
const FIXTURE_PROBES: &str = "probes.txt";

fn cmd_toy(c: ToyCommand) -> CliResult {
    match c {
        ToyCommand::Fixture {
            out_dir,
            subjects,
            probes,
            seed,
            world,
        } => {
            let world = toy_world(&world)?;
            let cohort = toy_cohort(&world, subjects, probes, seed)?;
            let mut index = BTreeMap::new();
            for img in &cohort.sources {
                let rel = format!("{FIXTURE_IMAGES}/{}.vec", img.id);
                toy::write_image(&out_dir.join(&rel), &img.id, img.values.clone())?;
                index.insert(img.id.clone(), rel);
            }
            let probes: Vec<Embedding> = cohort
                .probes
                .iter()
                .map(|p| Embedding::new(&p.id, &p.subject_id, p.values.clone()))
                .collect::<Result<_, _>>()?;
            let files = [
                (FIXTURE_INDEX, io::format_image_index(&index)?),
                (FIXTURE_EMBEDDINGS, io::format_embeddings(&cohort.source_embeddings(&world)?)?),
                (FIXTURE_META, io::format_meta(&cohort.meta)?),
                (FIXTURE_PROBES, io::format_embeddings(&probes)?),
            ];
            for (name, text) in files {
                io::write_atomic(&out_dir.join(name), text.as_bytes())?;
            }
            eprintln!("wrote {subjects} subjects to {}", out_dir.display());
            Ok(())
        }
        ToyCommand::Score {
            fixture,
            job_dir,
            model,
            morph_type,
            mated_out,
            nonmated_out,
            world,
        } => {
            let world = toy_world(&world)?;
            let probes = io::load(&fixture.join(FIXTURE_PROBES), io::parse_embeddings)?;
            let cohort = ToyCohort {
                sources: Vec::new(),
                probes: probes
                    .into_iter()
                    .map(|e| ToyImage {
                        id: e.id,
                        subject_id: e.subject_id,
                        values: e.values,
                    })
                    .collect(),
                meta: Vec::new(),
            };
            let manifest = job_dir.join(MORPHS_FILE);
            let morphs = io::load(&manifest, morphlab_core::pipeline::parse_morphs)?
                .into_iter()
                .filter_map(|m| m.result.ok().map(|(image, _)| (m.morph_id, m.pair, image)))
                .map(|(id, pair, image)| Ok((id, pair, toy::read_image(&job_dir.join(image))?)))
                .collect::<Result<Vec<_>, Error>>()?;
            let labels = ScoreLabels { model, morph_type };
            let mated = cohort.mated_scores(&world, &morphs)?;
            let nonmated = cohort.nonmated_scores(&world)?;
            io::write_atomic(&mated_out, io::format_mated(&labels, &mated)?.as_bytes())?;
            io::write_atomic(&nonmated_out, io::format_nonmated(&labels.model, &nonmated)?.as_bytes())?;
            Ok(())
        }
        ToyCommand::Backend { op, world } => {
            let backend = ToyBackend::new(toy_world(&world)?);
            match op {
                BackendOp::Describe => print!("{}", backend.descriptor()?.to_text()),
                BackendOp::Serve { job_dir } => backend.serve(&job_dir)?,
            }
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Pairs(a) => cmd_pairs(a),
        Command::Morph(a) => cmd_morph(a),
        Command::Vuln(a) => cmd_vuln(a),
        Command::Mad(a) => cmd_mad(a),
        Command::Report(a) => cmd_report(a),
        Command::Toy(c) => cmd_toy(c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Backend(msg)) => {
            eprintln!("backend error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(4)
        }
    }
}
