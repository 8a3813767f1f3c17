//! `simulate`: size/power grids for the three published designs or a custom one.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sparsecov::io;
use sparsecov::rng::derive_seed;
use sparsecov::simulate::{
    run_methods, table_constants, AlternativeSpec, CovarianceModel, Generator, Method, ModelKind, SimConfig, SimResult,
};

use crate::{parse_alpha, parse_count, Format, Output, EXIT_ACCEPT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GridScale {
    /// d = 40, n = m ∈ {200, 1000}, 400 replicates, 500 bootstrap draws.
    Desk,
    /// d ∈ {40, 100}, n = m ∈ {200, 500, 1000}, 5000 replicates, 1000 bootstrap draws.
    Full,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("design").required(true).args(["table", "custom"]))]
pub struct SimulateArgs {
    /// Published design: 1 long range, 2 short range, 3 isotropic.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub table: Option<u8>,
    /// JSON grid description (see README).
    #[arg(long)]
    pub custom: Option<PathBuf>,
    /// Monte Carlo replicates per cell (overrides the scale default).
    #[arg(long, value_parser = parse_count)]
    pub mc: Option<u64>,
    /// Bootstrap replicates per test (overrides the scale default).
    #[arg(long, value_parser = parse_count)]
    pub boot: Option<u64>,
    #[arg(long, value_enum, default_value_t = GridScale::Desk)]
    pub scale: GridScale,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    pub alpha: f64,
    /// Draw the diagonal scaling once per cell instead of once per replicate.
    #[arg(long)]
    pub fix_scale_seed: bool,
}

/// Custom grid file. Every `(size, alternative)` cell runs all `methods` on
/// shared samples with `n = m = size`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomGrid {
    pub model: CovarianceModel,
    pub sizes: Vec<usize>,
    pub alternatives: Vec<AlternativeSpec>,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub mc_reps: Option<usize>,
    #[serde(default)]
    pub boot_reps: Option<usize>,
    #[serde(default)]
    pub fix_scale: bool,
    #[serde(default)]
    pub generator: Generator,
}

struct Cell {
    model: CovarianceModel,
    n: usize,
    alternative: AlternativeSpec,
    methods: Vec<Method>,
}

fn table_cells(table: u8, scale: GridScale) -> anyhow::Result<Vec<Cell>> {
    let kind = match table {
        1 => ModelKind::LongRange,
        2 => ModelKind::ShortRange,
        _ => ModelKind::Isotropic,
    };
    let (dims, sizes): (&[usize], &[usize]) = match scale {
        GridScale::Desk => (&[40], &[200, 1000]),
        GridScale::Full => (&[40, 100], &[200, 500, 1000]),
    };
    let mut cells = Vec::new();
    for &d in dims {
        let (c1, c2, c3) = table_constants(&kind, d).expect("published dimension");
        let model = CovarianceModel::new(kind.clone(), d)?;
        let methods: Vec<Method> = [3, 5, 10].iter().map(|&s| Method::sparse(d, s)).chain([Method::Linf]).collect();
        for &n in sizes {
            for alternative in [
                AlternativeSpec::Null,
                AlternativeSpec::Alt1 { c1, support: None },
                AlternativeSpec::Alt2 { c2 },
                AlternativeSpec::Alt3 { c3 },
            ] {
                cells.push(Cell { model: model.clone(), n, alternative, methods: methods.clone() });
            }
        }
    }
    Ok(cells)
}

fn cell_seed(seed: u64, cell: &Cell) -> u64 {
    let s = derive_seed(seed, cell.model.name(), cell.model.d as u64);
    let s = derive_seed(s, "n", cell.n as u64);
    derive_seed(s, cell.alternative.label(), 0)
}

pub(crate) fn simulate(args: &SimulateArgs, out: &Output) -> anyhow::Result<u8> {
    let (default_mc, default_boot) = match args.scale {
        GridScale::Desk => (400, 500),
        GridScale::Full => (5000, 1000),
    };
    let (cells, custom) = match (&args.table, &args.custom) {
        (Some(t), _) => (table_cells(*t, args.scale)?, None),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let grid: CustomGrid =
                serde_json::from_str(&text).with_context(|| format!("parsing grid {}", path.display()))?;
            if grid.sizes.is_empty() || grid.alternatives.is_empty() || grid.methods.is_empty() {
                bail!("custom grid needs at least one size, alternative and method");
            }
            let cells = grid
                .sizes
                .iter()
                .flat_map(|&n| {
                    grid.alternatives.iter().map(move |a| (n, a.clone()))
                })
                .map(|(n, alternative)| Cell {
                    model: grid.model.clone(),
                    n,
                    alternative,
                    methods: grid.methods.clone(),
                })
                .collect();
            (cells, Some(grid))
        }
        (None, None) => unreachable!("clap requires --table or --custom"),
    };
    let mc_reps = args.mc.map(|v| v as usize).or(custom.as_ref().and_then(|g| g.mc_reps)).unwrap_or(default_mc);
    let boot_reps = args.boot.map(|v| v as usize).or(custom.as_ref().and_then(|g| g.boot_reps)).unwrap_or(default_boot);
    let alpha = custom.as_ref().and_then(|g| g.alpha).unwrap_or(args.alpha);
    let fix_scale = args.fix_scale_seed || custom.as_ref().is_some_and(|g| g.fix_scale);
    let generator = custom.as_ref().map(|g| g.generator).unwrap_or_default();

    if args.scale == GridScale::Full {
        let tests: usize = cells.iter().map(|c| c.methods.len()).sum::<usize>() * mc_reps;
        eprintln!("warning: full scale runs {tests} bootstrap tests of {boot_reps} draws each; expect many hours");
    }

    let mut results: Vec<SimResult> = Vec::new();
    for (k, cell) in cells.iter().enumerate() {
        let base = SimConfig {
            model: cell.model.clone(),
            alternative: cell.alternative.clone(),
            n: cell.n,
            m: cell.n,
            method: cell.methods[0],
            alpha,
            boot_reps,
            mc_reps,
            seed: cell_seed(out.seed, cell),
            fix_scale,
            generator,
        };
        let cell_results = run_methods(&base, &cell.methods)?;
        for r in &cell_results {
            eprintln!(
                "[{}/{}] {} d={} n={} {} {}: {:.3} ({:.1}s{})",
                k + 1,
                cells.len(),
                r.config.model.name(),
                r.config.model.d,
                r.config.n,
                r.config.alternative.label(),
                r.config.method,
                r.rejection_rate,
                r.wall_time_secs,
                if r.errors.is_empty() { String::new() } else { format!(", {} failed replicates", r.errors.len()) },
            );
        }
        results.extend(cell_results);
    }

    #[derive(Serialize)]
    struct Echo<'a> {
        command: &'static str,
        args: &'a SimulateArgs,
        grid: Option<&'a CustomGrid>,
        mc_reps: usize,
        boot_reps: usize,
    }
    let echo = Echo { command: "simulate", args, grid: custom.as_ref(), mc_reps, boot_reps };
    match &out.out {
        Some(dir) => {
            io::write_bytes(&dir.join("grid.csv"), io::sim_grid_to_csv(&results)?.as_bytes())?;
            for r in &results {
                let c = &r.config;
                let name = format!("{}_d{}_n{}_{}_{}.csv", c.model.name(), c.model.d, c.n, c.alternative.label(), c.method);
                io::write_bytes(&dir.join("replicates").join(name), io::sim_result_to_csv(r)?.as_bytes())?;
            }
            let json = out.artifact(results, &echo)?;
            io::write_bytes(&dir.join("simulate.json"), json.as_bytes())?;
        }
        None => {
            let text = match out.format {
                Format::Json => out.artifact(results, &echo)?,
                Format::Csv => io::sim_grid_to_csv(&results)?,
            };
            out.emit(&text)?;
        }
    }
    Ok(EXIT_ACCEPT)
}
