use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use diversample_core::analysis::{
    clsd_report, profile_blocks, sigma_distance, BaselineReport, BlockProfile,
};
use diversample_core::corpus::{load_normalized, write_locked, CorpusReader};
use diversample_core::entropy::{alpha_grid, renyi_entropy};
use diversample_core::normalize::token_counts;
use diversample_core::sampler::{heuristic_sample, random_sample};
use diversample_core::syntax::{syntactic_counts_par, ConlluOptions, ConlluReader};
use diversample_core::{
    AlphaOrder, CategoryCounts, DependencySentence, Error, NormalizedDocument, Normalizer,
    PosColumn, Result, SampleManifest, SamplerConfig, Strictness,
};
use rayon::prelude::*;

use crate::settings::Settings;
use crate::{
    BaselineArgs, Cli, CliError, Command, CorrelateArgs, EntropyArgs, RunManifest, SampleArgs,
    SelectionArgs, SyntaxArgs, TokenizeArgs, TreebankArgs,
};

const DEFAULT_RUNS: usize = 20;
const DEFAULT_ALPHA_MAX: f64 = 5.0;
const DEFAULT_ALPHA_STEP: f64 = 0.1;
/// Documents normalized per parallel batch by `tokenize`.
const TOKENIZE_BATCH: usize = 4096;

struct Ctx<'a> {
    settings: Settings,
    strictness: Strictness,
    threads: usize,
    argv: &'a [String],
    name: &'static str,
}

impl Ctx<'_> {
    fn manifest(&self) -> RunManifest {
        RunManifest::new(self.name, self.argv)
    }

    fn normalizer(&self) -> Result<Normalizer> {
        Normalizer::new(self.settings.normalizer()?)
    }
}

pub fn dispatch(cli: &Cli, argv: &[String]) -> std::result::Result<(), CliError> {
    let settings = Settings::load(cli.config.as_deref())?;
    let threads = match settings.pick(cli.threads, "threads")? {
        Some(0) => return Err(Error::Config("threads must be ≥ 1".into()).into()),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let strictness = if settings.flag("lenient", cli.lenient)? {
        Strictness::Lenient
    } else {
        Strictness::Strict
    };
    let ctx = Ctx {
        settings,
        strictness,
        threads,
        argv,
        name: cli.command.name(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Tokenize(a) => tokenize(&ctx, a),
        Command::Entropy(a) => entropy(&ctx, a),
        Command::Sample(a) => sample(&ctx, a),
        Command::Baseline(a) => baseline(&ctx, a),
        Command::Syntax(a) => syntax(&ctx, a),
        Command::Correlate(a) => correlate(&ctx, a),
    })?;
    Ok(())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn read_counts(path: &Path) -> Result<CategoryCounts> {
    let file = File::open(path).map_err(|source| Error::File {
        path: path.to_owned(),
        source,
    })?;
    CategoryCounts::read_tsv(BufReader::new(file), &path.display().to_string())
}

fn report_skipped(what: &str, n: usize) {
    if n > 0 {
        log::warn!("skipped {n} malformed {what}");
    }
}

fn tokenize(ctx: &Ctx, args: &TokenizeArgs) -> Result<()> {
    let normalizer = ctx.normalizer()?;
    let mut reader = CorpusReader::open(&args.input, ctx.strictness)?;
    let mut counts = CategoryCounts::new();
    let mut batch = Vec::with_capacity(TOKENIZE_BATCH);
    let mut documents = 0usize;
    loop {
        batch.clear();
        for doc in reader.by_ref().take(TOKENIZE_BATCH) {
            batch.push(doc?);
        }
        if batch.is_empty() {
            break;
        }
        documents += batch.len();
        let partial = batch
            .par_iter()
            .map(|d| token_counts(&normalizer.normalize(&d.text)))
            .reduce(CategoryCounts::new, |a, b| a.merge(&b));
        counts.merge_from(&partial);
    }
    report_skipped("records", reader.skipped());
    log::info!(
        "{documents} documents, {} tokens, {} forms",
        counts.total(),
        counts.variety()
    );
    write_locked(&args.output, &counts.to_tsv_bytes())?;

    let mut m = ctx.manifest();
    m.config_fingerprint = Some(normalizer.config().fingerprint());
    m.input(&args.input)?;
    m.outputs.push(args.output.display().to_string());
    m.write(&args.output)
}

fn alphas(
    ctx: &Ctx,
    list: Option<&Vec<f64>>,
    max: Option<f64>,
    step: Option<f64>,
) -> Result<Vec<AlphaOrder>> {
    if let Some(list) = ctx.settings.pick_list(list, "alphas")? {
        if list.is_empty() {
            return Err(Error::Config("empty alpha list".into()));
        }
        return list.into_iter().map(AlphaOrder::new).collect();
    }
    let max = ctx
        .settings
        .pick(max, "alpha_max")?
        .unwrap_or(DEFAULT_ALPHA_MAX);
    let step = ctx
        .settings
        .pick(step, "alpha_step")?
        .unwrap_or(DEFAULT_ALPHA_STEP);
    alpha_grid(max, step)
}

fn entropy(ctx: &Ctx, args: &EntropyArgs) -> Result<()> {
    let counts = read_counts(&args.input)?;
    let grid = alphas(ctx, args.alphas.as_ref(), args.alpha_max, args.alpha_step)?;
    let mut out = String::from("alpha,entropy\n");
    for a in grid {
        out.push_str(&format!("{a},{}\n", renyi_entropy(&counts, a)?));
    }
    write_locked(&args.output, out.as_bytes())?;

    let mut m = ctx.manifest();
    m.input(&args.input)?;
    m.outputs.push(args.output.display().to_string());
    m.write(&args.output)
}

struct Pool {
    initial: CategoryCounts,
    candidates: Vec<NormalizedDocument>,
    target: u64,
    fingerprint: String,
}

fn load_pool(ctx: &Ctx, args: &SelectionArgs, m: &mut RunManifest) -> Result<Pool> {
    let target = ctx.settings.require(args.target_tokens, "target_tokens")?;
    if target == 0 {
        return Err(Error::Config("target size must be positive".into()));
    }
    let normalizer = ctx.normalizer()?;
    let initial = match &args.initial {
        Some(p) => {
            m.input(p)?;
            read_counts(p)?
        }
        None => CategoryCounts::new(),
    };
    let mut reader = CorpusReader::open(&args.candidates, ctx.strictness)?;
    let candidates = load_normalized(reader.by_ref(), &normalizer)?;
    report_skipped("records", reader.skipped());
    m.input(&args.candidates)?;
    let fingerprint = normalizer.config().fingerprint();
    m.config_fingerprint = Some(fingerprint.clone());
    Ok(Pool {
        initial,
        candidates,
        target,
        fingerprint,
    })
}

fn sample(ctx: &Ctx, args: &SampleArgs) -> Result<()> {
    let mut m = ctx.manifest();
    let pool = load_pool(ctx, &args.selection, &mut m)?;
    let mut config = SamplerConfig::new(pool.target);
    if let Some(levels) = ctx
        .settings
        .pick_list(args.exhaustivity.as_ref(), "exhaustivity")?
    {
        config = config.with_exhaustivity(levels);
    }
    config.seed = ctx.settings.pick(args.seed, "seed")?;
    config.threads = ctx.threads;
    let result = heuristic_sample(&pool.initial, &pool.candidates, &config)?;
    if !result.reached_target {
        log::warn!(
            "target of {} tokens not reached ({} tokens)",
            pool.target,
            result.tokens_total
        );
    }
    for (e, commits) in &result.exhaustivity_used {
        log::info!("exhaustivity {e}: {commits} commits");
    }

    let manifest = SampleManifest {
        ids: result.selected.clone(),
        seed: config.seed,
        config_fingerprint: pool.fingerprint,
        final_entropy: result.final_entropy,
        tokens_total: result.tokens_total,
        reached_target: result.reached_target,
    };
    let trajectory = args
        .trajectory
        .clone()
        .unwrap_or_else(|| with_suffix(&args.output, ".trajectory.csv"));
    write_locked(&args.output, &manifest.to_bytes()?)?;
    write_locked(&trajectory, result.trajectory_csv().as_bytes())?;

    m.seeds.extend(config.seed);
    m.outputs.push(args.output.display().to_string());
    m.outputs.push(trajectory.display().to_string());
    m.write(&args.output)
}

fn baseline(ctx: &Ctx, args: &BaselineArgs) -> Result<()> {
    let mut m = ctx.manifest();
    let first: u64 = ctx.settings.require(args.seed, "seed")?;
    let runs = ctx
        .settings
        .pick(args.runs, "runs")?
        .unwrap_or(DEFAULT_RUNS);
    let pool = load_pool(ctx, &args.selection, &mut m)?;
    let seeds: Vec<u64> = (0..runs as u64).map(|i| first.wrapping_add(i)).collect();
    let entropies = seeds
        .par_iter()
        .map(|&s| {
            random_sample(&pool.initial, &pool.candidates, pool.target, s)?
                .final_entropy
                .ok_or(Error::EmptyDistribution)
        })
        .collect::<Result<Vec<f64>>>()?;
    let report = BaselineReport::new(seeds.clone(), entropies)?;
    log::info!(
        "baseline mean {} sd {} normality p {}",
        report.distribution.mean(),
        report.distribution.std_dev(),
        report.normality.p_value
    );
    write_locked(&args.output, report.to_csv().as_bytes())?;
    m.seeds = seeds;
    m.outputs.push(args.output.display().to_string());

    let against =
        match (&args.against_manifest, args.against_value) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::File {
                    path: path.clone(),
                    source,
                })?;
                let sample = SampleManifest::parse(&text, &path.display().to_string())?;
                if sample.config_fingerprint != pool.fingerprint {
                    log::warn!(
                        "{} was produced with a different normalizer config",
                        path.display()
                    );
                }
                m.input(path)?;
                Some(sample.final_entropy.ok_or_else(|| {
                    Error::Domain(format!("{} has no final entropy", path.display()))
                })?)
            }
            (None, value) => value,
        };
    if let Some(value) = against {
        let d = sigma_distance(value, &report.distribution)?;
        let path = args
            .significance
            .clone()
            .unwrap_or_else(|| with_suffix(&args.output, ".significance.csv"));
        write_locked(&path, d.to_csv().as_bytes())?;
        m.outputs.push(path.display().to_string());
    }
    m.write(&args.output)
}

fn read_treebank(ctx: &Ctx, args: &TreebankArgs) -> Result<Vec<DependencySentence>> {
    let pos_column = match ctx.settings.pick(args.pos_column.clone(), "pos_column")? {
        Some(s) => s.parse()?,
        None => PosColumn::default(),
    };
    let file = File::open(&args.input).map_err(|source| Error::File {
        path: args.input.clone(),
        source,
    })?;
    let options = ConlluOptions {
        pos_column,
        strictness: ctx.strictness,
    };
    let mut reader = ConlluReader::new(
        BufReader::new(file),
        args.input.display().to_string(),
        options,
    );
    let sentences = reader.by_ref().collect::<Result<Vec<_>>>()?;
    report_skipped("sentences", reader.rejected());
    Ok(sentences)
}

fn syntax(ctx: &Ctx, args: &SyntaxArgs) -> Result<()> {
    let sentences = read_treebank(ctx, &args.treebank)?;
    let counts = syntactic_counts_par(&sentences);
    log::info!(
        "{} sentences, {} subtrees, {} categories",
        sentences.len(),
        counts.total(),
        counts.variety()
    );
    write_locked(&args.output, &counts.to_tsv_bytes())?;

    let mut m = ctx.manifest();
    m.input(&args.treebank.input)?;
    m.outputs.push(args.output.display().to_string());
    m.write(&args.output)
}

fn profiles_csv(profiles: &[BlockProfile]) -> String {
    let mut out = String::from("block,partial,sentences,alpha,lexical,syntactic\n");
    for p in profiles {
        for ((a, lex), syn) in p.lexical.iter().zip(p.syntactic.values()) {
            out.push_str(&format!(
                "{},{},{},{a},{lex},{syn}\n",
                p.block, p.partial, p.sentences
            ));
        }
    }
    out
}

fn correlate(ctx: &Ctx, args: &CorrelateArgs) -> Result<()> {
    let block_size = ctx.settings.require(args.block_size, "block_size")?;
    let grid = alphas(ctx, None, args.alpha_max, args.alpha_step)?;
    let include_partial = ctx.settings.flag("include_partial", args.include_partial)?;
    let sentences = read_treebank(ctx, &args.treebank)?;
    let profiles = profile_blocks(&sentences, block_size, &grid)?;
    let report = clsd_report(&profiles, include_partial)?;
    write_locked(&args.output, report.to_csv().as_bytes())?;

    let mut m = ctx.manifest();
    m.input(&args.treebank.input)?;
    m.outputs.push(args.output.display().to_string());
    if let Some(path) = &args.profiles {
        write_locked(path, profiles_csv(&profiles).as_bytes())?;
        m.outputs.push(path.display().to_string());
    }
    m.write(&args.output)
}
