use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ardl_core::ardl::Criterion;
use ardl_core::dgp::{synthetic_panel, SyntheticPanelSpec};
use ardl_core::diagnostics::BreuschPaganForm;
use ardl_core::frame::{IndicatorMap, YearRange};
use ardl_lab::config::{CodePolicy, ModelDef, RunConfig, SEED_ENV};
use ardl_lab::exec::{with_threads, Rayon};
use ardl_lab::io::{write_long_csv, write_wb_wide};
use ardl_lab::{emit_report, run_pipeline, run_single, LabError, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ardl-lab", version, about = "Bootstrap ARDL-ECM analysis of indicator panels")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed; overrides ARDLLAB_SEED and the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "ardl-run")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Data {
    /// Panel file: long CSV or World Bank wide export.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    first_year: Option<i32>,
    #[arg(long)]
    last_year: Option<i32>,
    /// Keep unmapped indicator codes as variable keys.
    #[arg(long)]
    pass_through_codes: bool,
}

#[derive(Args, Clone, Default)]
struct Models {
    #[command(flatten)]
    data: Data,
    /// Research-question presets (RQ1..RQ4), comma separated.
    #[arg(long, value_delimiter = ',')]
    rq: Vec<String>,
    /// Dependent variable of an explicit model (with --x).
    #[arg(long, requires = "x")]
    dep: Option<String>,
    /// Regressors of an explicit model, comma separated.
    #[arg(long, value_delimiter = ',', requires = "dep")]
    x: Vec<String>,
    /// Fit one entity instead of pooling all of them.
    #[arg(long, conflicts_with = "pool")]
    entity: Option<String>,
    /// Pool all entities (the default).
    #[arg(long)]
    pool: bool,
    /// Entity dummies in pooled fits.
    #[arg(long)]
    entity_effects: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Aic,
    Bic,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum WideOrLong {
    #[default]
    Long,
    Wide,
}

#[derive(Subcommand)]
enum Command {
    /// Read a panel and write it as canonical long CSV with a summary.
    Ingest(Data),
    /// Fill missing cells with random-forest imputation.
    Impute {
        #[command(flatten)]
        data: Data,
        #[arg(long)]
        trees: Option<usize>,
        #[arg(long)]
        min_leaf: Option<usize>,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// One model per indicator across all entities.
        #[arg(long)]
        pooled: bool,
    },
    /// Rolling-correlation screening against white-noise bands.
    Rollcorr {
        #[command(flatten)]
        models: Models,
        #[arg(long, value_delimiter = ',')]
        widths: Vec<usize>,
        #[arg(long = "B")]
        replications: Option<usize>,
        /// Bands from permutations of the data instead of Gaussian noise.
        #[arg(long)]
        permutation: bool,
    },
    /// Finite distributed-lag models, full and reduced.
    Dlm {
        #[command(flatten)]
        models: Models,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        drop_whole_series: bool,
    },
    /// ARDL error-correction fits with lag selection.
    Ardl {
        #[command(flatten)]
        models: Models,
        #[command(flatten)]
        ardl: ArdlArgs,
    },
    /// Bootstrap PSS bounds test.
    Bounds {
        #[command(flatten)]
        models: Models,
        #[command(flatten)]
        ardl: ArdlArgs,
        #[arg(long = "B")]
        replications: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        levels: Vec<f64>,
        /// Also report the single-restriction summed-form F.
        #[arg(long)]
        summed_form: bool,
        /// Write the bootstrap F sample to CSV.
        #[arg(long)]
        dump_sample: bool,
    },
    /// Residual diagnostics battery (Table 9 layout).
    Diagnose {
        #[command(flatten)]
        models: Models,
        #[command(flatten)]
        ardl: ArdlArgs,
        #[arg(long = "B")]
        replications: Option<usize>,
        #[arg(long)]
        bg_lags: Option<usize>,
        #[arg(long)]
        lb_lags: Option<usize>,
        /// Classic Breusch-Pagan instead of the Koenker form.
        #[arg(long)]
        bp_classic: bool,
    },
    /// Write the synthetic G20-style panel.
    Simulate {
        #[arg(long)]
        entities: Option<usize>,
        #[arg(long)]
        years: Option<usize>,
        #[arg(long)]
        first_year: Option<i32>,
        /// Share of cells masked as missing.
        #[arg(long)]
        missing: Option<f64>,
        #[arg(long, value_enum, default_value_t)]
        format: WideOrLong,
    },
    /// Run all seven stages and write the manifest.
    Run,
    /// Build table CSVs and report.json from a run directory.
    Report {
        /// Run directory (defaults to --out).
        #[arg(long)]
        run: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Default)]
struct ArdlArgs {
    /// Fixed lag of the dependent variable (with --q).
    #[arg(long, requires = "q")]
    p: Option<usize>,
    /// Fixed lag of the regressors (with --p).
    #[arg(long, requires = "p")]
    q: Option<usize>,
    #[arg(long)]
    pmax: Option<usize>,
    #[arg(long)]
    qmax: Option<usize>,
    #[arg(long, value_enum)]
    criterion: Option<CriterionArg>,
    /// Add the contemporaneous differenced regressors.
    #[arg(long)]
    contemporaneous: bool,
    #[arg(long)]
    trend: bool,
}

fn base_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let env = std::env::var(SEED_ENV).ok();
    cfg.apply_seed(cli.seed, env.as_deref())?;
    Ok(cfg)
}

fn apply_data(cfg: &mut RunConfig, d: &Data) {
    if let Some(input) = &d.input {
        cfg.input = Some(input.clone());
    }
    if d.first_year.is_some() || d.last_year.is_some() {
        cfg.year_range = Some(YearRange {
            first: d.first_year.unwrap_or(i32::MIN),
            last: d.last_year.unwrap_or(i32::MAX),
        });
    }
    if d.pass_through_codes {
        cfg.unknown_codes = CodePolicy::PassThrough;
    }
}

fn apply_models(cfg: &mut RunConfig, m: &Models) {
    apply_data(cfg, &m.data);
    if !m.rq.is_empty() || m.dep.is_some() {
        cfg.research_questions = m.rq.clone();
        cfg.custom.clear();
    }
    if let Some(dep) = &m.dep {
        cfg.custom.push(ModelDef {
            name: "custom".into(),
            dependent: dep.clone(),
            regressors: m.x.clone(),
        });
    }
    if m.entity.is_some() {
        cfg.sample.entity = m.entity.clone();
    }
    if m.pool {
        cfg.sample.entity = None;
    }
    cfg.sample.entity_effects |= m.entity_effects;
}

fn apply_ardl(cfg: &mut RunConfig, a: &ArdlArgs, fixed_for_tests: bool) {
    let a_cfg = &mut cfg.ardl;
    if let (Some(p), Some(q)) = (a.p, a.q) {
        if fixed_for_tests {
            a_cfg.test_lags = Some((p, q));
        } else {
            a_cfg.lags = Some((p, q));
        }
    }
    if let Some(v) = a.pmax {
        a_cfg.p_max = v;
    }
    if let Some(v) = a.qmax {
        a_cfg.q_max = v;
    }
    if let Some(c) = a.criterion {
        a_cfg.criterion = match c {
            CriterionArg::Aic => Criterion::Aic,
            CriterionArg::Bic => Criterion::Bic,
        };
    }
    a_cfg.contemporaneous |= a.contemporaneous;
    a_cfg.trend |= a.trend;
}

fn log(stage: &str, msg: &str) {
    eprintln!("[{stage}] {msg}");
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn simulate(cfg: &RunConfig, out: &Path, format: WideOrLong) -> Result<PathBuf> {
    let panel = synthetic_panel(&cfg.synthetic)?;
    std::fs::create_dir_all(out).map_err(|e| LabError::io(out, e))?;
    let path = out.join("synthetic_panel.csv");
    let file = std::fs::File::create(&path).map_err(|e| LabError::io(&path, e))?;
    let written = match format {
        WideOrLong::Long => write_long_csv(&panel, file),
        WideOrLong::Wide => write_wb_wide(&panel, &IndicatorMap::builtin(), file),
    };
    written.map_err(|e| LabError::Data(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn dispatch(cli: &Cli) -> Result<()> {
    let mut cfg = base_config(cli)?;
    let exec = Rayon;
    let out = &cli.out;
    let stage = match &cli.command {
        Command::Ingest(d) => {
            apply_data(&mut cfg, d);
            "ingest"
        }
        Command::Impute {
            data,
            trees,
            min_leaf,
            rounds,
            tol,
            pooled,
        } => {
            apply_data(&mut cfg, data);
            let i = &mut cfg.impute;
            i.enabled = true;
            i.trees = trees.unwrap_or(i.trees);
            i.min_leaf = min_leaf.unwrap_or(i.min_leaf);
            i.max_rounds = rounds.unwrap_or(i.max_rounds);
            i.tol = tol.unwrap_or(i.tol);
            i.pooled |= pooled;
            "impute"
        }
        Command::Rollcorr {
            models,
            widths,
            replications,
            permutation,
        } => {
            apply_models(&mut cfg, models);
            if !widths.is_empty() {
                cfg.rollcorr.widths = widths.clone();
            }
            cfg.rollcorr.replications = replications.unwrap_or(cfg.rollcorr.replications);
            cfg.rollcorr.permutation |= permutation;
            "rollcorr"
        }
        Command::Dlm {
            models,
            q,
            alpha,
            drop_whole_series,
        } => {
            apply_models(&mut cfg, models);
            cfg.dlm.q = q.unwrap_or(cfg.dlm.q);
            cfg.dlm.alpha = alpha.unwrap_or(cfg.dlm.alpha);
            cfg.dlm.drop_whole_series |= drop_whole_series;
            "dlm"
        }
        Command::Ardl { models, ardl } => {
            apply_models(&mut cfg, models);
            apply_ardl(&mut cfg, ardl, false);
            "ardl"
        }
        Command::Bounds {
            models,
            ardl,
            replications,
            levels,
            summed_form,
            dump_sample,
        } => {
            apply_models(&mut cfg, models);
            apply_ardl(&mut cfg, ardl, true);
            cfg.bounds.replications = replications.unwrap_or(cfg.bounds.replications);
            if !levels.is_empty() {
                cfg.bounds.levels = levels.clone();
            }
            cfg.bounds.summed_form |= summed_form;
            cfg.bounds.dump_sample |= dump_sample;
            "bounds"
        }
        Command::Diagnose {
            models,
            ardl,
            replications,
            bg_lags,
            lb_lags,
            bp_classic,
        } => {
            apply_models(&mut cfg, models);
            apply_ardl(&mut cfg, ardl, true);
            let d = &mut cfg.diagnostics;
            d.replications = replications.unwrap_or(d.replications);
            d.bg_lags = bg_lags.unwrap_or(d.bg_lags);
            d.lb_lags = lb_lags.or(d.lb_lags);
            if *bp_classic {
                d.bp_form = BreuschPaganForm::Classic;
            }
            "diagnostics"
        }
        Command::Simulate {
            entities,
            years,
            first_year,
            missing,
            format,
        } => {
            let s: &mut SyntheticPanelSpec = &mut cfg.synthetic;
            s.entities = entities.unwrap_or(s.entities);
            s.years = years.unwrap_or(s.years);
            s.first_year = first_year.unwrap_or(s.first_year);
            s.missing_fraction = missing.unwrap_or(s.missing_fraction);
            if cli.seed.is_some() || std::env::var(SEED_ENV).is_ok() {
                s.seed = cfg.seed;
            }
            let path = simulate(&cfg, out, *format)?;
            println!("{}", path.display());
            return Ok(());
        }
        Command::Run => {
            let manifest = with_threads(cli.threads, || run_pipeline(&cfg, out, &exec, &log))??;
            log("run", &format!("{} stages complete", manifest.stages.len()));
            println!("{}", out.join(ardl_lab::pipeline::MANIFEST).display());
            return Ok(());
        }
        Command::Report { run } => {
            let dir = run.as_deref().unwrap_or(out);
            print_paths(&emit_report(dir)?);
            return Ok(());
        }
    };
    let paths = with_threads(cli.threads, || run_single(&cfg, stage, out, &exec, &log))??;
    print_paths(&paths);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
