use henchman_core::rd::BaOptions;
use henchman_core::region::{
    Boundary, ChannelGrid, LosslessRegionQuery, LossyRegionQuery, RegionTemplate, SweepPoint,
};
use henchman_core::Channel;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RegionConfig, RegionMode};
use crate::error::CliError;
use crate::output::{ensure_dir, fmt9, round9, svg_plot, write_csv, write_json, write_text, Series};
use crate::{Format, Report, RunContext};

pub fn template(cfg: &RegionConfig) -> Result<RegionTemplate, CliError> {
    let source = cfg.source.build("source")?;
    let d_e = cfg.d_e.build(source.alphabet_size(), "d_e")?;
    Ok(match cfg.mode {
        RegionMode::Lossless => {
            if cfg.d_b.is_some() {
                return Err(CliError::Config("d_b applies to lossy mode only".into()));
            }
            RegionTemplate::Lossless(LosslessRegionQuery {
                rate: cfg.rate,
                key_rate: cfg.key_rate,
                list_rate: cfg.list_rate,
                source,
                d_e,
            })
        }
        RegionMode::Lossy => {
            let d_b = cfg
                .d_b
                .as_ref()
                .unwrap_or(&cfg.d_e)
                .build(source.alphabet_size(), "d_b")?;
            let mut grid = ChannelGrid::for_alphabets(source.alphabet_size(), d_b.cols());
            if let Some(k) = cfg.channel_divisions {
                if k == 0 {
                    return Err(CliError::Config("channel_divisions must be positive".into()));
                }
                grid.divisions = k;
            }
            grid.refine = cfg.refine;
            RegionTemplate::Lossy(
                LossyRegionQuery {
                    rate: cfg.rate,
                    key_rate: cfg.key_rate,
                    list_rate: cfg.list_rate,
                    d_b_max: cfg.bob_distortion,
                    source,
                    d_b,
                    d_e,
                },
                grid,
            )
        }
    })
}

/// The sweep, one boundary per grid value, computed in parallel and
/// returned in increasing sweep order.
pub fn sweep(cfg: &RegionConfig) -> Result<Vec<SweepPoint>, CliError> {
    let t = template(cfg)?;
    let var = cfg.sweep.var.var();
    let mut values = cfg.sweep.grid.values("sweep.grid")?;
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let ba = BaOptions::default();
    // Reject a bad template before spending time on the grid.
    t.at(var, values[0])?;
    values
        .par_iter()
        .map(|&v| {
            Ok(SweepPoint {
                value: v,
                boundary: t.at(var, v)?.boundary(&ba)?,
            })
        })
        .collect()
}

fn channel_rows(ch: &Channel) -> Vec<Vec<f64>> {
    ch.rows().iter().map(|r| r.mass().iter().map(|&v| round9(v)).collect()).collect()
}

#[derive(Serialize)]
struct PointRecord {
    sweep_var: &'static str,
    value: f64,
    d_e_max: Option<f64>,
    feasible: bool,
    witness_channel: Option<Vec<Vec<f64>>>,
    needed_rate: Option<f64>,
}

fn record(label: &'static str, p: &SweepPoint) -> PointRecord {
    match &p.boundary {
        Boundary::Feasible { d_e_max, witness } => PointRecord {
            sweep_var: label,
            value: round9(p.value),
            d_e_max: Some(round9(*d_e_max)),
            feasible: true,
            witness_channel: witness.as_ref().map(channel_rows),
            needed_rate: None,
        },
        Boundary::Infeasible { needed_rate } => PointRecord {
            sweep_var: label,
            value: round9(p.value),
            d_e_max: None,
            feasible: false,
            witness_channel: None,
            needed_rate: Some(round9(*needed_rate)),
        },
    }
}

pub fn run(cfg: &RegionConfig, ctx: &RunContext) -> Result<Report, CliError> {
    let points = sweep(cfg)?;
    let label = cfg.sweep.var.label();
    ensure_dir(&ctx.out_dir)?;
    let mut report = Report::default();
    let records: Vec<PointRecord> = points.iter().map(|p| record(label, p)).collect();
    if ctx.format == Format::Json {
        report.files.push(write_json(&ctx.out_dir.join("region.json"), &records)?);
    }
    if ctx.format == Format::Csv {
        let rows: Vec<Vec<String>> = records
            .iter()
            .map(|r| {
                vec![
                    r.sweep_var.to_string(),
                    fmt9(r.value),
                    r.d_e_max.map(fmt9).unwrap_or_default(),
                    r.feasible.to_string(),
                    r.witness_channel
                        .as_ref()
                        .map(|w| serde_json::to_string(w).expect("plain numbers"))
                        .unwrap_or_default(),
                ]
            })
            .collect();
        report.files.push(write_csv(
            &ctx.out_dir.join("region.csv"),
            &["sweep_var", "value", "D_E_max", "feasible", "witness_channel"],
            &rows,
        )?);
    }
    if matches!(ctx.format, Format::Csv | Format::Svg) {
        let series = Series {
            name: format!("max D_E vs {label}"),
            points: points
                .iter()
                .filter_map(|p| p.boundary.value().map(|v| (p.value, v)))
                .collect(),
        };
        let svg = svg_plot("Eavesdropper distortion boundary", label, "max D_E", &[series]);
        report.files.push(write_text(&ctx.out_dir.join("region.svg"), &svg)?);
    }
    for r in &records {
        report.lines.push(format!(
            "{}={} D_E_max={}",
            r.sweep_var,
            fmt9(r.value),
            r.d_e_max.map(fmt9).unwrap_or_else(|| "infeasible".into())
        ));
    }
    Ok(report)
}
