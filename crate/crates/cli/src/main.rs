use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pwt::model::generate::{benchmark_like, Correlation};
use pwt::model::randomized_tour;
use pwt::{Bound, Reward, SolveReport, Variant};
use pwt_cli::commands::{
    self, load_context, load_instance, read_plan_ids, reward_spec, tour_text, ChanceArgs, HHArgs,
    TourSource,
};
use pwt_cli::experiment::run_config;
use pwt_cli::{CliError, Result};

/// Greedy and hyper-heuristic solvers for the packing while travelling problem.
#[derive(Debug, Parser)]
#[command(name = "pwt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one greedy packing heuristic and print its report as JSON.
    Solve {
        #[command(flatten)]
        input: Input,
        /// Reward function r1..r7.
        #[arg(long)]
        heuristic: Reward,
        /// Exponent of r1.
        #[arg(long)]
        gamma: Option<f64>,
        #[command(flatten)]
        chance: ChanceFlags,
    },
    /// Run a hyper-heuristic variant and print its report as JSON.
    Hh {
        #[command(flatten)]
        input: Input,
        /// HH1..HH6; HH5 and HH6 need --alpha and --delta.
        #[arg(long)]
        variant: Variant,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long, default_value_t = 0.1)]
        mutation: f64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        chance: ChanceFlags,
    },
    /// Run the experiment described by a TOML config.
    Experiment { config: PathBuf },
    /// Estimate the chance-constraint violation rate of a plan by Monte Carlo.
    Validate {
        /// JSON plan record or solve report.
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exhaustive optimum for instances with at most 24 items.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        chance: ChanceFlags,
    },
    /// Write a synthetic instance in the benchmark format.
    Generate {
        #[arg(long, default_value_t = 51)]
        cities: usize,
        #[arg(long, default_value_t = 1)]
        items_per_city: usize,
        #[arg(long, value_enum, default_value_t = CorrelationArg::Unc)]
        correlation: CorrelationArg,
        #[arg(long, default_value_t = 1)]
        capacity_class: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output if omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Write the randomized tour used for a given tour seed.
    Tour {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Input {
    #[arg(long)]
    instance: PathBuf,
    /// Tour file (plain city list or TOUR_SECTION).
    #[arg(
        long,
        required_unless_present = "tour_seed",
        conflicts_with = "tour_seed"
    )]
    tour: Option<PathBuf>,
    /// Generate the tour from this seed instead of reading a file.
    #[arg(long)]
    tour_seed: Option<u64>,
}

impl Input {
    fn source(&self) -> TourSource {
        match (&self.tour, self.tour_seed) {
            (Some(path), _) => TourSource::File(path.clone()),
            (None, Some(seed)) => TourSource::Seed(seed),
            (None, None) => unreachable!("clap requires --tour or --tour-seed"),
        }
    }
}

#[derive(Debug, Args)]
struct ChanceFlags {
    /// Enforce the capacity as a chance constraint.
    #[arg(long)]
    chance: bool,
    #[arg(long)]
    alpha: Option<f64>,
    /// Half-width of the uniform weight noise.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    bound: Option<Bound>,
}

impl From<&ChanceFlags> for ChanceArgs {
    fn from(f: &ChanceFlags) -> Self {
        ChanceArgs {
            chance: f.chance,
            alpha: f.alpha,
            delta: f.delta,
            bound: f.bound,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CorrelationArg {
    Unc,
    Bsc,
    Usw,
}

impl From<CorrelationArg> for Correlation {
    fn from(c: CorrelationArg) -> Self {
        match c {
            CorrelationArg::Unc => Correlation::Uncorrelated,
            CorrelationArg::Bsc => Correlation::BoundedStronglyCorrelated,
            CorrelationArg::Usw => Correlation::UncorrelatedSimilarWeights,
        }
    }
}

fn print_report(report: &SolveReport) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(report)?);
    Ok(())
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => commands::write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            input,
            heuristic,
            gamma,
            chance,
        } => {
            let instance = load_instance(&input.instance)?;
            let mode = ChanceArgs::from(&chance).mode(&instance)?;
            let reward = reward_spec(heuristic, gamma)?;
            commands::check_pairing(heuristic, &mode)?;
            let ctx = load_context(instance, &input.source())?;
            print_report(&commands::solve(&ctx, reward, &mode)?)
        }
        Command::Hh {
            input,
            variant,
            iters,
            mutation,
            seed,
            chance,
        } => {
            let instance = load_instance(&input.instance)?;
            let mode = ChanceArgs::from(&chance).implied_mode(&instance)?;
            let ctx = load_context(instance, &input.source())?;
            let args = HHArgs {
                variant,
                iterations: iters,
                mutation,
                seed,
            };
            print_report(&commands::hyper_heuristic(&ctx, args, mode)?)
        }
        Command::Experiment { config } => {
            let results = run_config(&config)?;
            eprintln!(
                "{} runs, {} aggregate rows",
                results.raw.len(),
                results.aggregate.len()
            );
            Ok(())
        }
        Command::Validate {
            plan,
            instance,
            alpha,
            delta,
            samples,
            seed,
        } => {
            let inst = load_instance(&instance)?;
            let ids = read_plan_ids(&plan)?;
            println!(
                "{}",
                commands::validate_plan(&inst, &ids, alpha, delta, samples, seed)?
            );
            Ok(())
        }
        Command::Oracle { input, chance } => {
            let instance = load_instance(&input.instance)?;
            let mode = ChanceArgs::from(&chance).implied_mode(&instance)?;
            let ctx = load_context(instance, &input.source())?;
            print_report(&commands::oracle(&ctx, &mode)?)
        }
        Command::Generate {
            cities,
            items_per_city,
            correlation,
            capacity_class,
            seed,
            output,
        } => {
            if cities < 2 || items_per_city == 0 || capacity_class == 0 {
                return Err(CliError::usage(
                    "need at least 2 cities, 1 item per city and class >= 1",
                ));
            }
            let inst = benchmark_like(
                cities,
                items_per_city,
                correlation.into(),
                capacity_class,
                seed,
            );
            emit(&inst.to_ttp_string(), output.as_ref())
        }
        Command::Tour {
            instance,
            seed,
            output,
        } => {
            let inst = load_instance(&instance)?;
            emit(&tour_text(&randomized_tour(&inst, seed)), output.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
