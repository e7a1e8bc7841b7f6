use henchman_core::adversary::{key_enumeration_attack, key_enumeration_index, p2p_attack, P2pOptions};
use henchman_core::cipher::{CipherCode, Codebook};
use henchman_core::prob::avg_distortion;
use henchman_core::rd::{distortion_rate, BaOptions};
use henchman_core::rng::{sample, stream, Purpose};
use henchman_core::Sequence;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::SimulateConfig;
use crate::error::CliError;
use crate::output::{ensure_dir, fmt9, round9, write_csv, write_json};
use crate::{Format, Report, RunContext};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackParams {
    pub list_rate: f64,
    pub key_rate: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackRecord {
    pub attack: &'static str,
    pub params: AttackParams,
    /// Fraction of counted trials with distortion at most the reference
    /// (plus the configured margin for the p2p attack).
    pub empirical_success: f64,
    pub mean_distortion: f64,
    pub reference_value: f64,
    /// Trials the average runs over.
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub n: usize,
    pub messages: usize,
    pub keys: usize,
    pub decoder_error_rate: f64,
    /// Trials where no codeword under the key matched the source.
    pub encoder_fallbacks: usize,
    pub attacks: Vec<AttackRecord>,
}

pub fn simulate_seed(cfg: &SimulateConfig, seed: u64) -> Result<SeedRecord, CliError> {
    let src = cfg.source.build("source")?;
    let d = cfg.d_e.build(src.alphabet_size(), "d_e")?;
    if cfg.n == 0 || cfg.trials == 0 {
        return Err(CliError::Config("n and trials must be positive".into()));
    }
    let code = CipherCode::lossless(Codebook::build(seed, cfg.n, cfg.rate, cfg.key_rate, &src)?);
    let ba = BaOptions::default();
    let reference = distortion_rate(&src, &d, cfg.list_rate, &ba)?;
    let p2p = p2p_attack(&src, &d, cfg.list_rate, cfg.n, seed, &P2pOptions::default())?;
    let keyed = if cfg.list_rate >= cfg.key_rate {
        Some(key_enumeration_attack(&code, cfg.list_rate)?)
    } else {
        None
    };
    let mut rng = stream(Purpose::Trial, seed, 0);
    let mut errors = 0usize;
    let mut fallbacks = 0usize;
    let (mut p2p_sum, mut p2p_hits) = (0.0, 0usize);
    let (mut key_sum, mut key_hits, mut key_trials) = (0.0, 0usize, 0usize);
    for _ in 0..cfg.trials {
        let x = Sequence::from_symbols((0..cfg.n).map(|_| sample(&src, &mut rng) as u8).collect());
        let k = rng.gen_range(0..code.keys());
        let enc = code.likelihood_encode(&x, k, &mut rng)?;
        fallbacks += enc.fallback as usize;
        if code.decode(enc.message, k)? != x {
            errors += 1;
        }
        let (_, dist) = p2p.nearest(x.symbols(), enc.message, &d).expect("nonempty list");
        p2p_sum += dist;
        p2p_hits += (dist <= reference + cfg.margin + 1e-12) as usize;
        // The keyed henchman names the key; when the encoder had to fall
        // back, the key's entry is not the source and Bob fails as well.
        if let (Some(list), false) = (&keyed, enc.fallback) {
            let j = key_enumeration_index(&code, k)?;
            let dist = avg_distortion(&x, &list.list(enc.message)[j], &d)?;
            key_sum += dist;
            key_hits += (dist == 0.0) as usize;
            key_trials += 1;
        }
    }
    let params = AttackParams {
        list_rate: cfg.list_rate,
        key_rate: cfg.key_rate,
        n: cfg.n,
    };
    let trials = cfg.trials as f64;
    let mut attacks = vec![AttackRecord {
        attack: "p2p",
        params: params.clone(),
        empirical_success: round9(p2p_hits as f64 / trials),
        mean_distortion: round9(p2p_sum / trials),
        reference_value: round9(reference),
        trials: cfg.trials,
    }];
    if keyed.is_some() {
        let denom = key_trials.max(1) as f64;
        attacks.push(AttackRecord {
            attack: "key_enumeration",
            params,
            empirical_success: round9(key_hits as f64 / denom),
            mean_distortion: round9(key_sum / denom),
            reference_value: 0.0,
            trials: key_trials,
        });
    }
    Ok(SeedRecord {
        seed,
        n: cfg.n,
        messages: code.messages(),
        keys: code.keys(),
        decoder_error_rate: round9(errors as f64 / trials),
        encoder_fallbacks: fallbacks,
        attacks,
    })
}

pub fn run(cfg: &SimulateConfig, ctx: &RunContext) -> Result<Report, CliError> {
    if ctx.format == Format::Svg {
        return Err(CliError::Config("simulate writes csv or json".into()));
    }
    let seeds = cfg.seeds.seeds(ctx.seed);
    if seeds.is_empty() {
        return Err(CliError::Config("no seeds".into()));
    }
    let records: Vec<SeedRecord> = seeds
        .par_iter()
        .map(|&s| simulate_seed(cfg, s))
        .collect::<Result<_, _>>()?;
    ensure_dir(&ctx.out_dir)?;
    let mut report = Report::default();
    match ctx.format {
        Format::Json | Format::Svg => {
            report.files.push(write_json(&ctx.out_dir.join("simulate.json"), &records)?);
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = records
                .iter()
                .flat_map(|r| {
                    r.attacks.iter().map(move |a| {
                        vec![
                            r.seed.to_string(),
                            r.n.to_string(),
                            fmt9(r.decoder_error_rate),
                            r.encoder_fallbacks.to_string(),
                            a.attack.to_string(),
                            fmt9(a.params.list_rate),
                            fmt9(a.params.key_rate),
                            fmt9(a.empirical_success),
                            fmt9(a.mean_distortion),
                            fmt9(a.reference_value),
                            a.trials.to_string(),
                        ]
                    })
                })
                .collect();
            report.files.push(write_csv(
                &ctx.out_dir.join("simulate.csv"),
                &[
                    "seed",
                    "n",
                    "decoder_error_rate",
                    "encoder_fallbacks",
                    "attack",
                    "list_rate",
                    "key_rate",
                    "empirical_success",
                    "mean_distortion",
                    "reference_value",
                    "trials",
                ],
                &rows,
            )?);
        }
    }
    for r in &records {
        let attacks: Vec<String> = r
            .attacks
            .iter()
            .map(|a| format!("{} mean_distortion={}", a.attack, fmt9(a.mean_distortion)))
            .collect();
        report.lines.push(format!(
            "seed={} decoder_error_rate={} {}",
            r.seed,
            fmt9(r.decoder_error_rate),
            attacks.join(" ")
        ));
    }
    Ok(report)
}
