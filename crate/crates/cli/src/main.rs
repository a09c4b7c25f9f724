//! `woakm`: run PAM / WOA-kMedoids clustering experiments.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use woakm::bench::{self, BenchConfig};
use woakm::Error;

#[derive(Parser)]
#[command(
    name = "woakm",
    version,
    about = "WOA-kMedoids and PAM clustering benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run each method per seed and write records.csv and summary.json.
    Compare(Flags),
    /// Record WOA fitness and diversity traces per seed.
    Converge(Flags),
    /// Run WOA across a population x iteration grid and write sweep.csv.
    Sweep(Flags),
    /// Build the distance matrix and store it in the cache directory.
    Distances(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// key = value settings file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// UCR-format dataset file.
    #[arg(long, conflicts_with = "synth")]
    data: Option<String>,
    /// Synthetic dataset, e.g. n=50,k=4,len=32,noise=0.1,seed=3.
    #[arg(long)]
    synth: Option<String>,
    /// Field separator override: tab, comma or space.
    #[arg(long)]
    delimiter: Option<String>,
    /// euclidean or dtw.
    #[arg(long)]
    metric: Option<String>,
    /// Sakoe-Chiba band half-width in samples (dtw only).
    #[arg(long)]
    window: Option<usize>,
    /// Number of clusters; defaults to the dataset's class count.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated subset of pam,woa.
    #[arg(long)]
    methods: Option<String>,
    /// Whale population size.
    #[arg(long)]
    population: Option<usize>,
    /// WOA iterations.
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    min_cluster_size: Option<usize>,
    /// Logarithmic spiral shape constant.
    #[arg(long)]
    spiral_shape: Option<f64>,
    /// Explicit comma-separated seed list.
    #[arg(long)]
    seeds: Option<String>,
    /// Number of runs; seeds are seed, seed+1, ...
    #[arg(long)]
    reps: Option<usize>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Sweep populations, comma-separated.
    #[arg(long)]
    grid_population: Option<String>,
    /// Sweep iteration counts, comma-separated.
    #[arg(long)]
    grid_iterations: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Distance-matrix cache directory.
    #[arg(long)]
    cache: Option<PathBuf>,
}

impl Flags {
    fn settings(&self) -> Result<BTreeMap<String, String>, Error> {
        let mut settings = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                bench::parse_settings(&text)?
            }
            None => BTreeMap::new(),
        };

        // Flags that replace a conflicting setting from the file.
        if self.data.is_some() || self.synth.is_some() {
            settings.remove("data");
            settings.remove("synth");
        }
        if self.seeds.is_some() {
            settings.remove("reps");
        }
        if self.reps.is_some() || self.seed.is_some() {
            settings.remove("seeds");
        }

        let num = |v: Option<usize>| v.map(|x| x.to_string());
        let path = |v: &Option<PathBuf>| v.as_ref().map(|x| x.display().to_string());
        let overrides = [
            ("data", self.data.clone()),
            ("synth", self.synth.clone()),
            ("delimiter", self.delimiter.clone()),
            ("metric", self.metric.clone()),
            ("window", num(self.window)),
            ("k", num(self.k)),
            ("methods", self.methods.clone()),
            ("population", num(self.population)),
            ("iterations", num(self.iterations)),
            ("min-cluster-size", num(self.min_cluster_size)),
            ("spiral-shape", self.spiral_shape.map(|x| x.to_string())),
            ("seeds", self.seeds.clone()),
            ("reps", num(self.reps)),
            ("seed", self.seed.map(|x| x.to_string())),
            ("grid-population", self.grid_population.clone()),
            ("grid-iterations", self.grid_iterations.clone()),
            ("out", path(&self.out)),
            ("threads", num(self.threads)),
            ("cache", path(&self.cache)),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                settings.insert(key.to_owned(), v);
            }
        }
        Ok(settings)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let flags = match &cli.command {
        Command::Compare(f) | Command::Converge(f) | Command::Sweep(f) | Command::Distances(f) => f,
    };
    let config = BenchConfig::from_settings(&flags.settings()?)?;
    bench::with_threads(config.threads, || match cli.command {
        Command::Compare(_) => compare(&config),
        Command::Converge(_) => converge(&config),
        Command::Sweep(_) => sweep(&config),
        Command::Distances(_) => distances(&config),
    })?
}

fn compare(config: &BenchConfig) -> Result<(), Error> {
    let cmp = bench::run_comparison(config)?;
    let table = bench::emit_report(&cmp.records, &cmp.summary, &config.out_dir)?;
    print!("{table}");
    Ok(())
}

fn converge(config: &BenchConfig) -> Result<(), Error> {
    let report = bench::run_convergence(config)?;
    println!(
        "{:>10} {:>16} {:>8} {:>8}  unique medoids",
        "seed", "final fitness", "RI", "iter90"
    );
    for s in &report.seeds {
        println!(
            "{:>10} {:>16.6} {:>8.4} {:>8}  {} -> {}",
            s.seed,
            s.final_fitness,
            s.ri,
            s.iteration_90pct.map_or("-".into(), |i| i.to_string()),
            s.initial_unique_medoids,
            s.final_unique_medoids
        );
    }
    println!("traces written to {}", config.out_dir.display());
    Ok(())
}

fn sweep(config: &BenchConfig) -> Result<(), Error> {
    let rows = bench::run_sweep(config)?;
    println!(
        "{:>6} {:>6} {:>8} {:>16}",
        "L", "t_max", "mean RI", "mean fitness"
    );
    for r in &rows {
        println!(
            "{:>6} {:>6} {:>8.4} {:>16.6}",
            r.population, r.t_max, r.mean_ri, r.mean_fitness
        );
    }
    println!(
        "{} cells written to {}",
        rows.len(),
        config.out_dir.join("sweep.csv").display()
    );
    Ok(())
}

fn distances(config: &BenchConfig) -> Result<(), Error> {
    let (prepared, path) = bench::build_distance_cache(config)?;
    println!(
        "{}: {n}x{n} {} matrix {} in {:.3}s -> {}",
        prepared.dataset.name(),
        config.metric,
        if prepared.matrix_from_cache {
            "loaded"
        } else {
            "built"
        },
        prepared.matrix_seconds,
        path.display(),
        n = prepared.matrix.size(),
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
