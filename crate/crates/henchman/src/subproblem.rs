use henchman_core::rd::BaOptions;
use henchman_core::subproblem::{check_regime, decay_row, DecayParams, DecayRow, RegimeReport, SuccessOptions};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{build_channel, DecayConfig};
use crate::error::CliError;
use crate::output::{ensure_dir, fmt9, round9, svg_plot, write_csv, write_json, write_text, Series};
use crate::{Format, Report, RunContext};

pub fn params(cfg: &DecayConfig, base_seed: u64) -> Result<DecayParams, CliError> {
    let generator = cfg.generator.build("generator")?;
    let noise = cfg.noise.as_ref().map(|rows| build_channel(rows, "noise")).transpose()?;
    let source_alphabet = noise.as_ref().map_or(generator.alphabet_size(), |c| c.output_size());
    Ok(DecayParams {
        d: cfg.d.build(source_alphabet, "d")?,
        generator,
        noise,
        codebook_rate: cfg.codebook_rate,
        rate: cfg.rate,
        level: cfg.level,
        n_grid: cfg.n_grid.clone(),
        seeds: cfg.seeds.seeds(base_seed),
        tau: cfg.tau.family(),
        delta: cfg.delta,
        options: SuccessOptions {
            exhaustive_limit: cfg.exhaustive_limit,
            ..SuccessOptions::default()
        },
        ba: BaOptions::default(),
    })
}

/// The decay table with rows in `(n, seed)` grid order.
pub fn decay(p: &DecayParams) -> Result<(RegimeReport, Vec<DecayRow>), henchman_core::Error> {
    let report = check_regime(p)?;
    let jobs: Vec<(usize, u64)> = p
        .n_grid
        .iter()
        .flat_map(|&n| p.seeds.iter().map(move |&s| (n, s)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(n, s)| decay_row(p, n, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((report, rows))
}

#[derive(Serialize)]
struct RowRecord {
    n: usize,
    seed: u64,
    lower: f64,
    upper: f64,
    exact: bool,
    tau_n: f64,
    exceeds: bool,
}

#[derive(Serialize)]
struct DecayRecord {
    rd: f64,
    ry: Option<f64>,
    threshold: f64,
    alpha: f64,
    beta: f64,
    rows: Vec<RowRecord>,
}

pub fn run(cfg: &DecayConfig, ctx: &RunContext) -> Result<Report, CliError> {
    let p = params(cfg, ctx.seed)?;
    let (regime, rows) = decay(&p)?;
    let exps = henchman_core::subproblem::DecayExponents::from_regime(&regime, p.codebook_rate, p.rate);
    ensure_dir(&ctx.out_dir)?;
    let mut report = Report::default();
    match ctx.format {
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.seed.to_string(),
                        fmt9(r.lower),
                        fmt9(r.upper),
                        r.exact.to_string(),
                        fmt9(r.tau_n),
                        r.exceeds.to_string(),
                    ]
                })
                .collect();
            report.files.push(write_csv(
                &ctx.out_dir.join("subproblem.csv"),
                &["n", "seed", "lower", "upper", "exact", "tau_n", "exceeds"],
                &table,
            )?);
        }
        Format::Json => {
            let rec = DecayRecord {
                rd: round9(regime.rd),
                ry: regime.ry.map(round9),
                threshold: round9(regime.threshold),
                alpha: round9(exps.alpha),
                beta: round9(exps.beta),
                rows: rows
                    .iter()
                    .map(|r| RowRecord {
                        n: r.n,
                        seed: r.seed,
                        lower: round9(r.lower),
                        upper: round9(r.upper),
                        exact: r.exact,
                        tau_n: round9(r.tau_n),
                        exceeds: r.exceeds,
                    })
                    .collect(),
            };
            report.files.push(write_json(&ctx.out_dir.join("subproblem.json"), &rec)?);
        }
        Format::Svg => {
            let mean = |f: fn(&DecayRow) -> f64| -> Vec<(f64, f64)> {
                p.n_grid
                    .iter()
                    .map(|&n| {
                        let sel: Vec<f64> = rows.iter().filter(|r| r.n == n).map(f).collect();
                        (n as f64, sel.iter().sum::<f64>() / sel.len() as f64)
                    })
                    .collect()
            };
            let series = [
                Series {
                    name: "mean upper".into(),
                    points: mean(|r| r.upper),
                },
                Series {
                    name: "mean lower".into(),
                    points: mean(|r| r.lower),
                },
                Series {
                    name: "tau_n".into(),
                    points: p.n_grid.iter().map(|&n| (n as f64, p.tau.at(n))).collect(),
                },
            ];
            let svg = svg_plot("Best-code success", "n", "success", &series);
            report.files.push(write_text(&ctx.out_dir.join("subproblem.svg"), &svg)?);
        }
    }
    report.lines.push(format!(
        "threshold={} alpha={} beta={}",
        fmt9(regime.threshold),
        fmt9(exps.alpha),
        fmt9(exps.beta)
    ));
    for &n in &p.n_grid {
        let sel: Vec<&DecayRow> = rows.iter().filter(|r| r.n == n).collect();
        let exceed = sel.iter().filter(|r| r.exceeds).count();
        report.lines.push(format!("n={n} exceeds_tau={exceed}/{}", sel.len()));
    }
    Ok(report)
}
