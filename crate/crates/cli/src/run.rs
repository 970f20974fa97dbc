//! Command dispatch.

use std::fs;

use serde::Serialize;

use blockmix::{
    fit, fit_traditional, forward_search, generate, grid_search, scenario_spec, ColumnCoupling,
    DataMatrix, GeneratorSpec, ModelSpec, SearchConfig, SearchRecord,
};

use crate::args::{
    parse_ranges, parse_spec, parse_traditional_spec, Cli, Command, ForwardArgs, GridArgs,
    InputArgs, ModelArg, RunArgs, SimulateArgs,
};
use crate::data::load_csv;
use crate::output::{ensure_dir, envelope, write_fit, write_json};
use crate::{reproduce, CliError};

pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(a) => {
            let spec = parse_spec(&a.spec)?;
            let x = prepare(&a.input, &a.run)?;
            let cfg = a.sem.config();
            let res = fit(&x, spec, &cfg)?;
            write_fit(&a.run.output, "fit", cfg.seed, a, &res)
        }
        Command::FitTraditional(a) => {
            let spec = parse_traditional_spec(&a.spec)?;
            let x = prepare(&a.input, &a.run)?;
            let cfg = a.sem.config();
            let res = fit_traditional(&x, spec, &cfg)?;
            write_fit(&a.run.output, "fit-traditional", cfg.seed, a, &res)
        }
        Command::Grid(a) => grid(a),
        Command::Forward(a) => forward(a),
        Command::Simulate(a) => simulate(a),
        Command::Reproduce(a) => {
            setup(&a.run)?;
            reproduce::run(a)
        }
    }
}

fn setup(run: &RunArgs) -> Result<(), CliError> {
    if let Some(j) = run.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        // a pool that already exists (e.g. in tests) is fine to reuse
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global();
    }
    ensure_dir(&run.output)
}

fn prepare(input: &InputArgs, run: &RunArgs) -> Result<DataMatrix, CliError> {
    let x = load_csv(&input.input, input.has_header, input.delimiter)?;
    setup(run)?;
    Ok(if input.standardize {
        x.standardized()
    } else {
        x
    })
}

fn coupling(m: ModelArg) -> ColumnCoupling {
    match m {
        ModelArg::NonId => ColumnCoupling::Free,
        ModelArg::Traditional => ColumnCoupling::Tied,
    }
}

fn write_search<C: Serialize>(
    a: &RunArgs,
    command: &str,
    seed: u64,
    config: &C,
    rec: &SearchRecord,
) -> Result<(), CliError> {
    write_json(
        &a.output,
        "search.json",
        &envelope(command, seed, config, rec),
    )?;
    match &rec.best {
        Some(best) => write_fit(&a.output, command, seed, config, best),
        None => Ok(()),
    }
}

fn grid(a: &GridArgs) -> Result<(), CliError> {
    let ranges = parse_ranges(&a.range)?;
    let x = prepare(&a.input, &a.run)?;
    let cfg = a.sem.config();
    let rec = grid_search(&x, &ranges, &cfg, coupling(a.model), a.fits_per_candidate)?;
    write_search(&a.run, "grid", cfg.seed, a, &rec)
}

// "G,L" for the traditional model, where L stands for both column axes
fn search_spec(s: &str, model: ModelArg) -> Result<ModelSpec, CliError> {
    match model {
        ModelArg::NonId => parse_spec(s),
        ModelArg::Traditional => Ok(parse_traditional_spec(s)?.as_model_spec()),
    }
}

fn forward(a: &ForwardArgs) -> Result<(), CliError> {
    let (start, max) = match a.model {
        ModelArg::Traditional if a.start == "1,1,1" && a.max == "5,5,5" => ("1,1", "5,5"),
        _ => (a.start.as_str(), a.max.as_str()),
    };
    let cfg = SearchConfig {
        start: search_spec(start, a.model)?,
        max: search_spec(max, a.model)?,
        fits_per_candidate: a.fits_per_candidate,
        sem: a.sem.config(),
        coupling: coupling(a.model),
    };
    cfg.validate()?;
    let x = prepare(&a.input, &a.run)?;
    let rec = forward_search(&x, &cfg)?;
    write_search(&a.run, "forward", cfg.sem.seed, a, &rec)
}

#[derive(Serialize)]
struct Truth<'a> {
    generator: &'a GeneratorSpec,
    partitions: &'a blockmix::Partitions,
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let t = scenario_spec(a.scenario.scenario(), a.sigma_reading.reading());
    let (n, p) = (a.n.unwrap_or(t.n), a.p.unwrap_or(t.p));
    if n == 0 || p == 0 {
        return Err(CliError::Usage("--n and --p must be positive".into()));
    }
    let gs = t.with_size(n, p).with_seed(a.seed);
    let (x, parts) = generate(&gs);
    ensure_dir(&a.output)?;
    let path = a.output.join("data.csv");
    let mut text = String::with_capacity(n * p * 12);
    for i in 0..n {
        let row: Vec<String> = x.row(i).iter().map(|v| v.to_string()).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(&path, text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let truth = Truth {
        generator: &gs,
        partitions: &parts,
    };
    write_json(
        &a.output,
        "truth.json",
        &envelope("simulate", a.seed, a, &truth),
    )
}
