mod args;

use std::io::{self, BufWriter, Write};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Parser;
use elastic_dist::engines::{distance, Cutoff, Variant};
use elastic_dist::search::{
    accuracy, classify_1nn, classify_1nn_parallel, subsequence_search, QueryReport, SearchConfig,
    SearchStats,
};
use elastic_dist::series::{load_series, load_tsv};
use elastic_dist::LabeledDataset;
use serde::Serialize;
use serde_json::json;

use args::{BenchArgs, Cli, Command, DistArgs, NnArgs, SubseqArgs};

const EXIT_USAGE: u8 = 1;
const EXIT_ABANDONED: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Dist(a) => cmd_dist(&a),
        Command::Nn(a) => cmd_nn(&a).map(|()| ExitCode::SUCCESS),
        Command::Subseq(a) => cmd_subseq(&a).map(|()| ExitCode::SUCCESS),
        Command::Bench(a) => cmd_bench(&a).map(|()| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(EXIT_USAGE)
    })
}

fn series_arg(
    inline: Option<&str>,
    file: Option<&std::path::Path>,
    row: Option<usize>,
    delimiter: args::DelimiterArg,
    name: &str,
) -> Result<Vec<f64>> {
    match (inline, file) {
        (Some(text), _) => args::parse_values(text).with_context(|| format!("--{name}")),
        (None, Some(path)) => match row {
            Some(row) => {
                let data = load_tsv(path, delimiter.into())?;
                let entry = data.entries.get(row).with_context(|| {
                    format!(
                        "{} has {} rows, asked for row {row}",
                        path.display(),
                        data.len()
                    )
                })?;
                Ok(entry.series.values().to_vec())
            }
            None => Ok(load_series(path)?.into_values()),
        },
        (None, None) => bail!("series {name} missing: pass --{name} or --{name}-file"),
    }
}

fn cmd_dist(a: &DistArgs) -> Result<ExitCode> {
    let spec = a.spec.spec()?;
    let s = series_arg(
        a.a.as_deref(),
        a.a_file.as_deref(),
        a.a_row,
        a.delimiter,
        "a",
    )?;
    let t = series_arg(
        a.b.as_deref(),
        a.b_file.as_deref(),
        a.b_row,
        a.delimiter,
        "b",
    )?;
    let s = a.spec.prepare(s)?;
    let t = a.spec.prepare(t)?;
    let cutoff = match a.cutoff {
        Some(c) if c.is_nan() || c < 0.0 => bail!("--cutoff must be >= 0, got {c}"),
        Some(c) => Cutoff::new(c),
        None => Cutoff::NONE,
    };
    let r = distance(&spec, a.spec.variant, &s, &t, cutoff)?;
    let out = json!({
        "spec": a.spec.echo(),
        "len_a": s.len(),
        "len_b": t.len(),
        "cutoff": a.cutoff,
        "cost": if r.is_abandoned() { None } else { Some(r.cost) },
        "abandoned": r.is_abandoned(),
        "cells_computed": r.cells_computed,
    });
    println!("{out}");
    Ok(if r.is_abandoned() {
        ExitCode::from(EXIT_ABANDONED)
    } else {
        ExitCode::SUCCESS
    })
}

#[derive(Serialize)]
struct QueryRow {
    query: usize,
    label: i64,
    predicted: i64,
    nn_index: usize,
    nn_distance: f64,
    computed: u64,
    abandoned: u64,
    lb_skips: u64,
    cells: u64,
    wall_s: f64,
}

impl From<&QueryReport> for QueryRow {
    fn from(r: &QueryReport) -> Self {
        Self {
            query: r.query,
            label: r.label,
            predicted: r.predicted,
            nn_index: r.nn_index,
            nn_distance: r.nn_distance,
            computed: r.stats.computed,
            abandoned: r.stats.abandoned,
            lb_skips: r.stats.lb_skips,
            cells: r.stats.cells,
            wall_s: r.wall.as_secs_f64(),
        }
    }
}

fn totals(reports: &[QueryReport]) -> SearchStats {
    let mut total = SearchStats::default();
    for r in reports {
        total.merge(&r.stats);
    }
    total
}

fn run_classification(
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &SearchConfig,
    threads: usize,
) -> Result<Vec<QueryReport>> {
    if threads == 0 {
        bail!("--threads must be at least 1");
    }
    Ok(if threads == 1 {
        classify_1nn(train, test, cfg)?
    } else {
        classify_1nn_parallel(train, test, cfg, threads)?
    })
}

fn cmd_nn(a: &NnArgs) -> Result<()> {
    let spec = a.spec.spec()?;
    let cfg = SearchConfig::new(spec, a.spec.variant).with_lb(a.lb);
    cfg.validate()?;
    let (train, test) = a.data.load(&a.spec)?;
    let start = Instant::now();
    let reports = run_classification(&train, &test, &cfg, a.threads)?;
    let wall = start.elapsed();

    let mut out = BufWriter::new(io::stdout().lock());
    for r in &reports {
        serde_json::to_writer(&mut out, &QueryRow::from(r))?;
        writeln!(out)?;
    }
    let total = totals(&reports);
    let summary = json!({
        "summary": {
            "command": "nn",
            "spec": a.spec.echo(),
            "lb": a.lb.name(),
            "normalize": a.data.normalize,
            "threads": a.threads,
            "train": train.name,
            "test": test.name,
            "seed": a.data.seed(),
            "queries": reports.len(),
            "candidates": train.len(),
            "accuracy": accuracy(&reports),
            "computed": total.computed,
            "abandoned": total.abandoned,
            "lb_skips": total.lb_skips,
            "cells": total.cells,
            "wall_s": wall.as_secs_f64(),
        }
    });
    writeln!(out, "{summary}")?;
    out.flush()?;
    Ok(())
}

fn cmd_subseq(a: &SubseqArgs) -> Result<()> {
    let spec = a.spec.spec()?;
    let cfg = SearchConfig::new(spec, a.spec.variant)
        .with_lb(a.lb)
        .with_normalize(a.normalize);
    let q = a.spec.prepare(load_series(&a.query)?.into_values())?;
    let reference = a.spec.prepare(load_series(&a.reference)?.into_values())?;
    let start = Instant::now();
    let r = subsequence_search(&q, &reference, &cfg)?;
    let out = json!({
        "spec": a.spec.echo(),
        "lb": a.lb.name(),
        "normalize": a.normalize,
        "offset": r.offset,
        "distance": r.distance,
        "windows": r.windows,
        "computed": r.stats.computed,
        "abandoned": r.stats.abandoned,
        "lb_skips": r.stats.lb_skips,
        "cells": r.stats.cells,
        "wall_s": start.elapsed().as_secs_f64(),
    });
    println!("{out}");
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    if a.variants.is_empty() || a.reps == 0 {
        bail!("bench needs at least one variant and one repetition");
    }
    let spec = a.spec.spec()?;
    let (train, test) = a.data.load(&a.spec)?;
    let mut out = BufWriter::new(io::stdout().lock());
    writeln!(
        out,
        "variant,rep,wall_s,cells,computed,abandoned,lb_skips,accuracy,speedup_vs_base"
    )?;
    for rep in 0..a.reps {
        let mut base_wall = None;
        let mut rows = Vec::new();
        // Base always runs first so every row of the repetition has a ratio.
        let mut variants = vec![Variant::Base];
        variants.extend(a.variants.iter().copied().filter(|&v| v != Variant::Base));
        for variant in variants {
            let cfg = SearchConfig::new(spec, variant).with_lb(a.lb);
            cfg.validate()?;
            let start = Instant::now();
            let reports = run_classification(&train, &test, &cfg, a.threads)?;
            let wall = start.elapsed().as_secs_f64();
            let base = *base_wall.get_or_insert(wall);
            if a.variants.contains(&variant) {
                rows.push((
                    variant,
                    wall,
                    totals(&reports),
                    accuracy(&reports),
                    base / wall,
                ));
            }
        }
        for (variant, wall, t, acc, speedup) in rows {
            writeln!(
                out,
                "{},{rep},{wall:.6},{},{},{},{},{acc},{speedup:.4}",
                variant.name(),
                t.cells,
                t.computed,
                t.abandoned,
                t.lb_skips
            )?;
        }
    }
    out.flush()?;
    Ok(())
}
