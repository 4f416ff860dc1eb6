//! Isolated forward/backward timing of the activation zoo, normalized to
//! the Identity row.
//!
//! Protocol: one fixed input drawn from a seeded standard normal, a warmup
//! phase, then each iteration timed individually with the monotonic clock
//! (so the standard deviation means something). Every output buffer is
//! consumed by `black_box` and folded into a running checksum, which the
//! report carries — differing checksums across activations are the proof
//! that no timed call was optimized away.
//!
//! "Backward" times the pure derivative kernel (`backward_x`) in isolation;
//! no upstream-gradient multiply or loss cost is included.
//!
//! The harness is strictly single-threaded inside timed regions. Background
//! machine load invalidates comparisons between runs.

use iglu_core::{rng, Activation};
use serde::Serialize;
use std::fmt::Write as _;
use std::time::Instant;

pub const BENCH_SCHEMA: &str = "iglu.bench.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Single,
    Double,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchProtocol {
    pub input_dim: usize,
    pub iterations: usize,
    pub warmup_iterations: usize,
    pub seed: u64,
    pub precision: Precision,
}

impl Default for BenchProtocol {
    fn default() -> Self {
        BenchProtocol {
            input_dim: 10_000,
            iterations: 1_000,
            warmup_iterations: 50,
            seed: 42,
            precision: Precision::Single,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub name: String,
    pub forward_ns_mean: f64,
    pub forward_ns_stddev: f64,
    pub backward_ns_mean: f64,
    pub backward_ns_stddev: f64,
    pub forward_ratio_vs_identity: f64,
    pub backward_ratio_vs_identity: f64,
    /// Sum of every output element across all timed iterations.
    pub checksum: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub schema: String,
    pub protocol: BenchProtocol,
    /// Smallest observable tick of the monotonic clock, in ns.
    pub timer_resolution_ns: f64,
    pub rows: Vec<BenchRow>,
    pub warnings: Vec<String>,
}

#[derive(Debug)]
pub enum BenchError {
    /// The zoo must contain Identity (the normalizer).
    MissingIdentity,
    InvalidProtocol(&'static str),
}

impl std::fmt::Display for BenchError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BenchError::MissingIdentity => {
                write!(f, "the benchmark zoo must include Identity")
            }
            BenchError::InvalidProtocol(msg) => write!(f, "invalid protocol: {msg}"),
        }
    }
}

impl std::error::Error for BenchError {}

struct Timed {
    forward_ns: Vec<f64>,
    backward_ns: Vec<f64>,
    checksum: f64,
}

fn time_f64(act: &Activation, xs: &[f64], iters: usize, warmup: usize) -> Timed {
    let mut out = vec![0.0f64; xs.len()];
    for _ in 0..warmup {
        act.forward_into(xs, &mut out).unwrap();
        std::hint::black_box(&out);
        act.backward_x_into(xs, &mut out).unwrap();
        std::hint::black_box(&out);
    }
    let mut checksum = 0.0;
    let mut forward_ns = Vec::with_capacity(iters);
    for _ in 0..iters {
        let t = Instant::now();
        act.forward_into(xs, &mut out).unwrap();
        let ns = t.elapsed().as_nanos() as f64;
        std::hint::black_box(&out);
        forward_ns.push(ns);
        checksum += out.iter().sum::<f64>();
    }
    let mut backward_ns = Vec::with_capacity(iters);
    for _ in 0..iters {
        let t = Instant::now();
        act.backward_x_into(xs, &mut out).unwrap();
        let ns = t.elapsed().as_nanos() as f64;
        std::hint::black_box(&out);
        backward_ns.push(ns);
        checksum += out.iter().sum::<f64>();
    }
    Timed { forward_ns, backward_ns, checksum }
}

fn time_f32(act: &Activation, xs: &[f32], iters: usize, warmup: usize) -> Timed {
    let mut out = vec![0.0f32; xs.len()];
    for _ in 0..warmup {
        act.forward_into_f32(xs, &mut out).unwrap();
        std::hint::black_box(&out);
        act.backward_x_into_f32(xs, &mut out).unwrap();
        std::hint::black_box(&out);
    }
    let mut checksum = 0.0;
    let mut forward_ns = Vec::with_capacity(iters);
    for _ in 0..iters {
        let t = Instant::now();
        act.forward_into_f32(xs, &mut out).unwrap();
        let ns = t.elapsed().as_nanos() as f64;
        std::hint::black_box(&out);
        forward_ns.push(ns);
        checksum += out.iter().map(|&v| v as f64).sum::<f64>();
    }
    let mut backward_ns = Vec::with_capacity(iters);
    for _ in 0..iters {
        let t = Instant::now();
        act.backward_x_into_f32(xs, &mut out).unwrap();
        let ns = t.elapsed().as_nanos() as f64;
        std::hint::black_box(&out);
        backward_ns.push(ns);
        checksum += out.iter().map(|&v| v as f64).sum::<f64>();
    }
    Timed { forward_ns, backward_ns, checksum }
}

fn mean_stddev(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Smallest observable positive tick of `Instant`.
pub fn timer_resolution_ns() -> f64 {
    let mut min = u128::MAX;
    for _ in 0..200 {
        let start = Instant::now();
        let mut d = start.elapsed();
        while d.as_nanos() == 0 {
            d = start.elapsed();
        }
        min = min.min(d.as_nanos());
    }
    min as f64
}

/// Run the protocol over the zoo. The zoo must contain `Identity`.
pub fn run_bench(zoo: &[Activation], proto: &BenchProtocol) -> Result<BenchReport, BenchError> {
    if proto.input_dim == 0 {
        return Err(BenchError::InvalidProtocol("input_dim must be > 0"));
    }
    if proto.iterations == 0 {
        return Err(BenchError::InvalidProtocol("iterations must be > 0"));
    }
    if proto.warmup_iterations == 0 {
        return Err(BenchError::InvalidProtocol("warmup_iterations must be >= 1"));
    }
    let identity_idx = zoo
        .iter()
        .position(|a| matches!(a, Activation::Identity))
        .ok_or(BenchError::MissingIdentity)?;

    let mut rng = rng::seeded(proto.seed);
    let xs64 = rng::normal_vec(&mut rng, proto.input_dim);
    let xs32: Vec<f32> = xs64.iter().map(|&v| v as f32).collect();

    let timed: Vec<Timed> = zoo
        .iter()
        .map(|act| match proto.precision {
            Precision::Double => time_f64(act, &xs64, proto.iterations, proto.warmup_iterations),
            Precision::Single => time_f32(act, &xs32, proto.iterations, proto.warmup_iterations),
        })
        .collect();

    let (id_fwd_mean, _) = mean_stddev(&timed[identity_idx].forward_ns);
    let (id_bwd_mean, _) = mean_stddev(&timed[identity_idx].backward_ns);

    let mut rows = Vec::with_capacity(zoo.len());
    for (act, t) in zoo.iter().zip(&timed) {
        let (fm, fs) = mean_stddev(&t.forward_ns);
        let (bm, bs) = mean_stddev(&t.backward_ns);
        let identity = matches!(act, Activation::Identity);
        rows.push(BenchRow {
            name: act.to_string(),
            forward_ns_mean: fm,
            forward_ns_stddev: fs,
            backward_ns_mean: bm,
            backward_ns_stddev: bs,
            forward_ratio_vs_identity: if identity { 1.0 } else { fm / id_fwd_mean },
            backward_ratio_vs_identity: if identity { 1.0 } else { bm / id_bwd_mean },
            checksum: t.checksum,
        });
    }

    let resolution = timer_resolution_ns();
    let mut warnings = Vec::new();
    if proto.iterations < 30 {
        warnings.push(format!(
            "only {} iterations; means and stddevs are statistically unreliable",
            proto.iterations
        ));
    }
    let min_mean = rows
        .iter()
        .flat_map(|r| [r.forward_ns_mean, r.backward_ns_mean])
        .fold(f64::INFINITY, f64::min);
    if resolution > 0.01 * min_mean {
        warnings.push(format!(
            "timer resolution {resolution} ns exceeds 1% of the fastest mean ({min_mean:.1} ns)"
        ));
    }

    Ok(BenchReport {
        schema: BENCH_SCHEMA.to_string(),
        protocol: proto.clone(),
        timer_resolution_ns: resolution,
        rows,
        warnings,
    })
}

/// Markdown table with absolute times next to the identity-normalized
/// ratios (ratios alone hide machine variance).
pub fn to_markdown(report: &BenchReport) -> String {
    let mut out = String::new();
    let p = &report.protocol;
    let _ = writeln!(
        out,
        "Activation timing: {}-dim input, {} iterations ({} warmup), {:?} precision, seed {}",
        p.input_dim, p.iterations, p.warmup_iterations, p.precision, p.seed
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "| Activation | Forward (ns) | Forward | Backward (ns) | Backward | Checksum |"
    );
    let _ = writeln!(out, "|---|---:|---:|---:|---:|---:|");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "| {} | {:.0} ± {:.0} | {:.2}x | {:.0} ± {:.0} | {:.2}x | {:.6e} |",
            r.name,
            r.forward_ns_mean,
            r.forward_ns_stddev,
            r.forward_ratio_vs_identity,
            r.backward_ns_mean,
            r.backward_ns_stddev,
            r.backward_ratio_vs_identity,
            r.checksum
        );
    }
    for w in &report.warnings {
        let _ = writeln!(out, "\n> warning: {w}");
    }
    out
}
