//! Command implementations.

use std::time::Instant;

use half::f16;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cli::{
    BatchChoice, Command, CompressArgs, DataDtype, EngineArgs, GenArgs, OutputArgs, SampleArgs,
    ScanArgs, ScanDtype, SortArgs, TopkArgs, ToppArgs,
};
use super::data::{mask_flags, peaked_probs, sort_keys, uniform_i8, uniform_u16, unit_f16};
use super::oracle::{
    inverse_cdf_index, nucleus_distribution, stable_sort_indices, top_k_indices,
    total_variation, ScanOracle, FREQ_SIGMAS, TV_TOL,
};
use super::{BenchRecord, Outcome};
use crate::counters::WorkSpanCounters;
use crate::error::{Error, Result};
use crate::exec_model::{default_workers, parallel_map, ExecutionTrace};
use crate::io::{read_input, write_output, ArrayData};
use crate::scan_kernels::{batched_scan, scan, BatchStrategy, ScanConfig, Strategy};
use crate::scan_ops::{KeyType, Operators};
use crate::vector_engine::MaskSegment;

/// Scan sweep used when no `--n` is given: 2^10 through 2^26.
const DEFAULT_SWEEP_EXPONENTS: std::ops::RangeInclusive<u32> = 10..=26;
/// Radix-sort split passes plus the cumulative scan behind one nucleus draw.
const SCANS_PER_TOP_P_DRAW: u64 = 17;

pub(super) fn dispatch(command: &Command) -> Result<Outcome> {
    match command {
        Command::Scan(a) => cmd_scan(a),
        Command::Sort(a) => cmd_sort(a),
        Command::Compress(a) => cmd_compress(a),
        Command::Topk(a) => cmd_topk(a),
        Command::Topp(a) => cmd_topp(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Gen(a) => cmd_gen(a),
    }
}

/// Result of one timed run, before it becomes a record.
struct Measurement {
    elems: usize,
    secs: f64,
    counters: WorkSpanCounters,
    passed: bool,
}

/// Builds records and tallies failed checks for one command.
struct Recorder<'a> {
    out: &'a OutputArgs,
    outcome: Outcome,
}

impl<'a> Recorder<'a> {
    fn new(out: &'a OutputArgs) -> Self {
        Recorder {
            out,
            outcome: Outcome::default(),
        }
    }

    fn push(&mut self, algo: &str, n: usize, cfg: &ScanConfig, dtype: &str, m: Measurement) {
        let verified = self.out.verify && m.passed;
        if self.out.verify && !m.passed {
            self.outcome.failed_checks += 1;
            eprintln!("{algo} n={n} dtype={dtype}: output does not match the oracle");
        }
        let elems_per_sec = match self.out.no_timing {
            true => None,
            false => Some(m.elems as f64 / m.secs.max(1e-9)),
        };
        self.outcome.records.push(BenchRecord {
            algo: algo.to_string(),
            n: n as u64,
            s: cfg.s as u64,
            blocks: cfg.blocks as u64,
            dtype: dtype.to_string(),
            elems_per_sec,
            matmuls: m.counters.matmul_count,
            vector_ops: m.counters.vector_op_count,
            span_units: m.counters.span_units,
            verified,
        });
    }

    fn finish(self) -> Outcome {
        self.outcome
    }
}

fn engine_config(algo: Strategy, engine: &EngineArgs) -> Result<ScanConfig> {
    let cfg = ScanConfig::new(algo, engine.s, engine.blocks)
        .with_vector_ratio(engine.vector_ratio)
        .with_default_workers();
    cfg.validate()?;
    Ok(cfg)
}

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cmd_scan(a: &ScanArgs) -> Result<Outcome> {
    let cfg = engine_config(a.algo, &a.engine)?
        .with_exclusive(a.exclusive)
        .with_l2_chunk(a.l2_chunk)
        .with_trace(a.trace.is_some());
    cfg.validate()?;
    if a.trace.is_some() && !matches!(a.algo, Strategy::MCScan | Strategy::MCScanUL1) {
        return Err(Error::InvalidArgument(format!(
            "--trace needs a multi-core algorithm, not {}",
            a.algo
        )));
    }
    if a.batch.is_some()
        && (a.input.is_some() || a.exclusive || a.l2_chunk.is_some() || a.trace.is_some())
    {
        return Err(Error::InvalidArgument(
            "--batch cannot be combined with --input, --exclusive, --l2-chunk or --trace".into(),
        ));
    }

    let mut rec = Recorder::new(&a.out);
    let mut rng = seeded(a.out.seed);
    let mut trace = ExecutionTrace::default();

    if let Some(path) = &a.input {
        match (read_input(path)?, a.dtype) {
            (ArrayData::F16(x), None | Some(ScanDtype::F16)) => {
                trace = scan_once(&x, &cfg, &mut rec)?;
            }
            (ArrayData::I8(x), None | Some(ScanDtype::I8)) => {
                trace = scan_once(&x, &cfg, &mut rec)?;
            }
            (data, _) => {
                return Err(Error::InvalidArgument(format!(
                    "cannot scan a {} file with --dtype {:?}",
                    data.dtype_name(),
                    a.dtype
                )))
            }
        }
    } else {
        let sizes: Vec<usize> = match a.n.is_empty() {
            true => DEFAULT_SWEEP_EXPONENTS.map(|e| 1usize << e).collect(),
            false => a.n.clone(),
        };
        let dtype = a.dtype.unwrap_or(ScanDtype::F16);
        for n in sizes {
            match (dtype, a.batch) {
                (ScanDtype::F16, None) => trace = scan_once(&unit_f16(n, &mut rng), &cfg, &mut rec)?,
                (ScanDtype::I8, None) => trace = scan_once(&uniform_i8(n, &mut rng), &cfg, &mut rec)?,
                (ScanDtype::F16, Some(rows)) => {
                    let data: Vec<_> = (0..rows).map(|_| unit_f16(n, &mut rng)).collect();
                    scan_batch(&data, &cfg, a.batch_strategy, &mut rec)?;
                }
                (ScanDtype::I8, Some(rows)) => {
                    let data: Vec<_> = (0..rows).map(|_| uniform_i8(n, &mut rng)).collect();
                    scan_batch(&data, &cfg, a.batch_strategy, &mut rec)?;
                }
            }
        }
    }

    if let Some(path) = &a.trace {
        trace.validate()?;
        std::fs::write(path, trace.to_text())?;
    }
    Ok(rec.finish())
}

fn scan_once<S: ScanOracle>(
    x: &[S],
    cfg: &ScanConfig,
    rec: &mut Recorder<'_>,
) -> Result<ExecutionTrace> {
    let start = Instant::now();
    let out = scan(x, cfg)?;
    let secs = start.elapsed().as_secs_f64();
    let passed = rec.out.verify && S::scan_matches(x, &out.values, cfg.exclusive);
    rec.push(
        cfg.strategy.name(),
        x.len(),
        cfg,
        S::NAME,
        Measurement {
            elems: x.len(),
            secs,
            counters: out.counters,
            passed,
        },
    );
    Ok(out.trace)
}

/// Records use `n` = rows * row length.
fn scan_batch<S: ScanOracle>(
    rows: &[Vec<S>],
    cfg: &ScanConfig,
    choice: BatchChoice,
    rec: &mut Recorder<'_>,
) -> Result<()> {
    let strategy = match choice {
        BatchChoice::Auto => BatchStrategy::Auto,
        BatchChoice::Scanu => BatchStrategy::BatchScanU,
        BatchChoice::Scanul1 => BatchStrategy::BatchScanUL1,
    };
    let start = Instant::now();
    let out = batched_scan(rows, cfg, strategy)?;
    let secs = start.elapsed().as_secs_f64();
    let passed = rec.out.verify
        && out.rows.len() == rows.len()
        && rows.iter().zip(&out.rows).all(|(x, y)| S::scan_matches(x, y, false));
    let algo = match out.strategy {
        BatchStrategy::BatchScanU => "batch_scanu",
        _ => "batch_scanul1",
    };
    let total: usize = rows.iter().map(Vec::len).sum();
    eprintln!(
        "{algo}: {} rows of {} elements",
        rows.len(),
        rows.first().map_or(0, Vec::len)
    );
    rec.push(
        algo,
        total,
        cfg,
        S::NAME,
        Measurement {
            elems: total,
            secs,
            counters: out.counters,
            passed,
        },
    );
    Ok(())
}

fn cmd_sort(a: &SortArgs) -> Result<Outcome> {
    let cfg = engine_config(a.algo, &a.engine)?;
    let mut rec = Recorder::new(&a.out);
    let mut rng = seeded(a.out.seed);

    let inputs: Vec<(Vec<u16>, KeyType)> = match &a.input {
        Some(path) => match read_input(path)? {
            ArrayData::F16(v) => vec![(v.iter().map(|x| x.to_bits()).collect(), KeyType::F16)],
            ArrayData::U16(v) if a.dtype != KeyType::F16 => vec![(v, a.dtype)],
            data => {
                return Err(Error::InvalidArgument(format!(
                    "cannot sort a {} file as {} keys",
                    data.dtype_name(),
                    a.dtype
                )))
            }
        },
        None => a
            .n
            .iter()
            .map(|&n| (sort_keys(n, a.dtype, &mut rng), a.dtype))
            .collect(),
    };

    for (keys, key_type) in inputs {
        let mut ops = Operators::new(cfg.clone())?;
        let start = Instant::now();
        let sorted = ops.radix_sort_bits(&keys, key_type, a.bits)?;
        let secs = start.elapsed().as_secs_f64();
        let passed = rec.out.verify
            && sorted.passes == a.bits
            && sorted.indices == stable_sort_indices(&keys, key_type, a.bits)
            && sorted.values.iter().zip(&sorted.indices).all(|(&v, &i)| v == keys[i]);
        rec.push(
            "radix_sort",
            keys.len(),
            &cfg,
            key_type.name(),
            Measurement {
                elems: keys.len(),
                secs,
                counters: ops.stats().counters,
                passed,
            },
        );
    }
    Ok(rec.finish())
}

fn cmd_compress(a: &CompressArgs) -> Result<Outcome> {
    if !(0.0..=1.0).contains(&a.mask_density) {
        return Err(Error::InvalidArgument(format!(
            "--mask-density {} outside [0, 1]",
            a.mask_density
        )));
    }
    let cfg = engine_config(a.algo, &a.engine)?;
    let mut rec = Recorder::new(&a.out);
    let mut rng = seeded(a.out.seed);
    for &n in &a.n {
        match a.dtype {
            DataDtype::F16 => {
                let x: Vec<u16> = unit_f16(n, &mut rng).iter().map(|v| v.to_bits()).collect();
                compress_once(&x, "f16", a.mask_density, &cfg, &mut rng, &mut rec)?;
            }
            DataDtype::I8 => {
                let x = uniform_i8(n, &mut rng);
                compress_once(&x, "i8", a.mask_density, &cfg, &mut rng, &mut rec)?;
            }
            DataDtype::U16 => {
                let x = uniform_u16(n, &mut rng);
                compress_once(&x, "u16", a.mask_density, &cfg, &mut rng, &mut rec)?;
            }
        }
    }
    Ok(rec.finish())
}

fn compress_once<T: Copy + PartialEq>(
    x: &[T],
    dtype: &str,
    density: f64,
    cfg: &ScanConfig,
    rng: &mut ChaCha8Rng,
    rec: &mut Recorder<'_>,
) -> Result<()> {
    let flags = mask_flags(x.len(), density, rng);
    let mask = MaskSegment::from_bools(flags.iter().copied());
    let mut ops = Operators::new(cfg.clone())?;
    let start = Instant::now();
    let kept = ops.compress(x, &mask)?;
    let secs = start.elapsed().as_secs_f64();
    let passed = rec.out.verify
        && kept
            .iter()
            .eq(x.iter().zip(&flags).filter(|(_, &f)| f).map(|(v, _)| v));
    rec.push(
        "compress",
        x.len(),
        cfg,
        dtype,
        Measurement {
            elems: x.len(),
            secs,
            counters: ops.stats().counters,
            passed,
        },
    );
    Ok(())
}

fn cmd_topk(a: &TopkArgs) -> Result<Outcome> {
    let cfg = engine_config(a.algo, &a.engine)?;
    let mut rec = Recorder::new(&a.out);
    let mut rng = seeded(a.out.seed);
    for &n in &a.n {
        let keys = sort_keys(n, a.dtype, &mut rng);
        let pivot_seed = rng.gen();
        let mut ops = Operators::new(cfg.clone())?;
        let start = Instant::now();
        let top = ops.top_k(&keys, a.dtype, a.k, pivot_seed)?;
        let secs = start.elapsed().as_secs_f64();
        let passed = rec.out.verify
            && top.indices == top_k_indices(&keys, a.dtype, a.k)
            && top.values.iter().zip(&top.indices).all(|(&v, &i)| v == keys[i]);
        rec.push(
            "top_k",
            n,
            &cfg,
            a.dtype.name(),
            Measurement {
                elems: n,
                secs,
                counters: ops.stats().counters,
                passed,
            },
        );
    }
    Ok(rec.finish())
}

/// Per-draw result of an independent operator run.
struct DrawResult {
    index: usize,
    scan_calls: u64,
    counters: WorkSpanCounters,
}

/// Runs `draw` once per seed, spreading draws over the default worker
/// count. Each draw owns a single-threaded operator handle, so results do
/// not depend on the worker count.
fn run_draws<F>(cfg: &ScanConfig, seeds: Vec<u64>, draw: F) -> Result<Vec<DrawResult>>
where
    F: Fn(&mut Operators, u64) -> Result<usize> + Sync,
{
    let cfg = cfg.clone().with_workers(1);
    parallel_map(default_workers(), seeds, &|_, seed| {
        let mut ops = Operators::new(cfg.clone())?;
        let index = draw(&mut ops, seed)?;
        Ok(DrawResult {
            index,
            scan_calls: ops.stats().scan_calls,
            counters: ops.stats().counters,
        })
    })
    .into_iter()
    .collect()
}

fn total_counters(results: &[DrawResult]) -> WorkSpanCounters {
    results
        .iter()
        .fold(WorkSpanCounters::default(), |acc, r| acc.then(&r.counters))
}

fn cmd_topp(a: &ToppArgs) -> Result<Outcome> {
    if a.vocab == 0 || a.draws == 0 {
        return Err(Error::InvalidArgument("--vocab and --draws must be positive".into()));
    }
    if !(a.sigma.is_finite() && a.sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("--sigma {} must be positive", a.sigma)));
    }
    let cfg = ScanConfig::new(a.algo, a.s, a.blocks);
    cfg.validate()?;
    let mut rec = Recorder::new(&a.out);
    let mut rng = seeded(a.out.seed);
    let probs = peaked_probs(a.vocab, a.sigma, &mut rng);
    let seeds: Vec<u64> = (0..a.draws).map(|_| rng.gen()).collect();

    let start = Instant::now();
    let results = run_draws(&cfg, seeds, |ops, seed| {
        Ok(ops.top_p_sample(&probs, a.p, seed)?.index)
    })?;
    let secs = start.elapsed().as_secs_f64();

    let mut counts = vec![0u64; a.vocab];
    results.iter().for_each(|r| counts[r.index] += 1);
    let tv = total_variation(&counts, &nucleus_distribution(&probs, a.p));
    let scans_ok = results.iter().all(|r| r.scan_calls == SCANS_PER_TOP_P_DRAW);
    eprintln!(
        "top_p vocab={} p={} draws={}: tv_distance={tv:.5} (limit {TV_TOL}), scans per draw {}",
        a.vocab,
        a.p,
        a.draws,
        if scans_ok { "17" } else { "not 17" }
    );
    rec.push(
        "top_p",
        a.vocab,
        &cfg,
        "f16",
        Measurement {
            elems: a.vocab * a.draws,
            secs,
            counters: total_counters(&results),
            passed: tv <= TV_TOL && scans_ok,
        },
    );
    Ok(rec.finish())
}

fn cmd_sample(a: &SampleArgs) -> Result<Outcome> {
    if a.draws == 0 || a.grid == 0 {
        return Err(Error::InvalidArgument("--draws and --grid must be positive".into()));
    }
    let cfg = ScanConfig::new(a.algo, a.s, a.blocks);
    cfg.validate()?;
    let weights: Vec<f16> = a.weights.iter().map(|&w| f16::from_f64(w)).collect();
    let wide: Vec<f64> = weights.iter().map(|w| w.to_f64()).collect();
    let mut rec = Recorder::new(&a.out);
    let mut ops = Operators::new(cfg.clone().with_workers(1))?;

    let mut grid_mismatches = 0;
    for j in 0..a.grid {
        let theta = j as f64 / a.grid as f64;
        if ops.weighted_sample(&weights, theta)?.index != inverse_cdf_index(&wide, theta) {
            grid_mismatches += 1;
        }
    }

    let mut rng = seeded(a.out.seed);
    let seeds: Vec<u64> = (0..a.draws).map(|_| rng.gen()).collect();
    let start = Instant::now();
    let results = run_draws(&cfg, seeds, |ops, seed| {
        Ok(ops.weighted_sample_seeded(&weights, seed)?.index)
    })?;
    let secs = start.elapsed().as_secs_f64();

    let total: f64 = wide.iter().sum();
    let mut counts = vec![0u64; weights.len()];
    results.iter().for_each(|r| counts[r.index] += 1);
    let draws = a.draws as f64;
    let mut freq_ok = true;
    for (i, (&c, &w)) in counts.iter().zip(&wide).enumerate() {
        let q = w / total;
        let freq = c as f64 / draws;
        let sigma = (q * (1.0 - q) / draws).sqrt();
        let ok = (freq - q).abs() <= FREQ_SIGMAS * sigma;
        freq_ok &= ok;
        eprintln!("weight {i}: frequency {freq:.5}, expected {q:.5} +/- {:.5}", FREQ_SIGMAS * sigma);
    }
    eprintln!("grid of {} thresholds: {grid_mismatches} mismatches", a.grid);

    let mut counters = ops.stats().counters;
    counters = counters.then(&total_counters(&results));
    rec.push(
        "weighted_sample",
        weights.len(),
        &cfg,
        "f16",
        Measurement {
            elems: weights.len() * a.draws,
            secs,
            counters,
            passed: freq_ok && grid_mismatches == 0,
        },
    );
    Ok(rec.finish())
}

fn cmd_gen(a: &GenArgs) -> Result<Outcome> {
    let mut rng = seeded(a.seed);
    let data = match a.dtype {
        DataDtype::F16 => ArrayData::F16(unit_f16(a.n, &mut rng)),
        DataDtype::I8 => ArrayData::I8(uniform_i8(a.n, &mut rng)),
        DataDtype::U16 => ArrayData::U16(uniform_u16(a.n, &mut rng)),
    };
    write_output(&a.out, &data)?;
    Ok(Outcome::default())
}
