//! Command-line surface: dataset generation, the counting and decision
//! algorithms, Max-IP approximation, calibration, polynomial verification
//! and a small benchmark grid.
//!
//! Results go to stdout as JSON (or CSV for `calibrate` and `bench`) with
//! big numbers rendered as decimal strings; wall-clock timing goes to
//! stderr so stdout is byte-identical across re-runs and thread counts.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_traits::Signed;
use serde_json::json;

use ovkit::amsp::max_ip_approx;
use ovkit::dataset::{self, GenModel};
use ovkit::oracle::{brute_count_kov, brute_count_ov, brute_max_ip};
use ovkit::orpoly::{build_or_polynomial, verify_or_polynomial};
use ovkit::ovdecide::{derive_ov_params, ov_decide_with_stats};
use ovkit::rat::{rat_from_string, rat_int, rat_to_string, Rat};
use ovkit::sketch::{count_kov_approx, count_ov_approx, count_sparse_ov_approx};
use ovkit::{Error, Result, SeededRng, VectorFamily};

#[derive(Parser)]
#[command(name = "ovkit", about = "Orthogonal-vectors counting and decision toolkit")]
struct Cli {
    /// Seed for every random choice; fixed by default for reproducibility.
    #[arg(long, global = true, default_value_t = 20240501)]
    seed: u64,
    /// Worker-thread cap. Results are thread-count invariant; the current
    /// implementation executes sequentially.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a dataset file (plus a JSON witness for planted models).
    Gen {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: usize,
        /// uniform | planted-orthogonal | planted-ip | sparse
        #[arg(long)]
        model: String,
        /// Dimension (universe size in sparse mode).
        #[arg(long)]
        d: usize,
        /// Bit probability for the uniform/planted models.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Planted inner product (planted-ip only).
        #[arg(long)]
        w: Option<usize>,
        /// Sparsity bound (sparse model only).
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Additive-error #OV estimate for two dataset files.
    CountOv {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Additive error as a rational or decimal, e.g. 1/20 or 0.05.
        #[arg(long)]
        eps: String,
        /// Also run the exact brute-force count and report the deviation.
        #[arg(long)]
        oracle: bool,
    },
    /// Additive-error #k-OV estimate for k >= 2 dataset files.
    CountKov {
        #[arg(long, num_args = 2.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        oracle: bool,
    },
    /// Additive-error #OV for sparse-mode datasets.
    CountSparseOv {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        oracle: bool,
    },
    /// Randomized orthogonal-pair decision.
    DecideOv {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Error exponent L (eps = 2^-L); derived from (n, d) when absent.
        #[arg(long)]
        level: Option<usize>,
        /// Repetition count; paper default ceil(1000 ln n) when absent.
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        oracle: bool,
    },
    /// 2-approximate maximum inner product.
    Maxip {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Overall failure budget.
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long)]
        oracle: bool,
    },
    /// Print the (eps, tau, d) -> k calibration table as CSV.
    Calibrate {
        /// Comma-separated eps values (rationals or decimals).
        #[arg(long, default_value = "1/4,1/8,1/16")]
        eps_list: String,
        #[arg(long, default_value_t = 8)]
        tau: usize,
        #[arg(long, default_value_t = 64)]
        d: usize,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
    },
    /// Build and exactly certify the OR-approximating polynomial.
    VerifyPoly {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eps: String,
    },
    /// CSV of counting runs over a small (n, d, eps) grid.
    Bench,
}

fn main() {
    let cli = Cli::parse();
    let started = Instant::now();
    let code = match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) | Error::Parse(_) | Error::Io(_) => 2,
                Error::ResourceLimit(_) | Error::ProofSpaceOverflow(_) => 3,
                Error::Certification(_) => 4,
            }
        }
    };
    eprintln!("wall_time_ms={}", started.elapsed().as_millis());
    std::process::exit(code);
}

/// Accepts p/q, plain integers, and decimal literals.
fn parse_eps(s: &str) -> Result<Rat> {
    let eps = if let Some(point) = s.find('.') {
        let digits = &s[point + 1..];
        let whole = &s[..point];
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("invalid decimal {s:?}")));
        }
        let scale = 10i64.pow(digits.len() as u32);
        let whole: i64 = if whole.is_empty() {
            0
        } else {
            whole
                .parse()
                .map_err(|_| Error::Parse(format!("invalid decimal {s:?}")))?
        };
        let frac: i64 = digits
            .parse()
            .map_err(|_| Error::Parse(format!("invalid decimal {s:?}")))?;
        rat_int(whole) + Rat::new(frac.into(), scale.into())
    } else {
        rat_from_string(s)?
    };
    if eps <= rat_int(0) || eps >= rat_int(1) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, 1), got {}",
            rat_to_string(&eps)
        )));
    }
    Ok(eps)
}

fn load(path: &PathBuf) -> Result<VectorFamily> {
    dataset::read_file(path)
}

fn emit(value: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
}

fn count_payload(
    est: &ovkit::sketch::CountEstimate,
    eps: &Rat,
) -> serde_json::Value {
    json!({
        "estimate": rat_to_string(&est.value),
        "error_bound": rat_to_string(&est.error_bound),
        "eps": rat_to_string(eps),
        "arity": est.arity,
        "degree": est.degree,
        "sketch_width": est.sketch_width.to_string(),
    })
}

fn oracle_payload(est: &ovkit::sketch::CountEstimate, exact: u64) -> serde_json::Value {
    let deviation = (est.value.clone() - rat_int(exact as i64)).abs();
    json!({
        "exact": exact.to_string(),
        "deviation": rat_to_string(&deviation),
        "within_bound": deviation <= est.error_bound,
    })
}

fn run(cli: &Cli) -> Result<()> {
    if cli.threads == 0 {
        return Err(Error::InvalidArgument("threads must be positive".into()));
    }
    match &cli.cmd {
        Cmd::Gen {
            out,
            n,
            model,
            d,
            p,
            w,
            bound,
        } => {
            let model = match model.as_str() {
                "uniform" => GenModel::Uniform { d: *d, p: *p },
                "planted-orthogonal" => GenModel::PlantedOrthogonal { d: *d, p: *p },
                "planted-ip" => GenModel::PlantedIp {
                    d: *d,
                    p: *p,
                    w: w.ok_or_else(|| {
                        Error::InvalidArgument("planted-ip requires --w".into())
                    })?,
                },
                "sparse" => GenModel::Sparse {
                    m: *d,
                    d: bound.ok_or_else(|| {
                        Error::InvalidArgument("sparse requires --bound".into())
                    })?,
                },
                other => {
                    return Err(Error::InvalidArgument(format!("unknown model {other:?}")))
                }
            };
            let (fam, witness) = dataset::generate(*n, &model, cli.seed)?;
            dataset::write_file(out, &fam)?;
            let mut payload = json!({
                "command": "gen",
                "out": out.display().to_string(),
                "n": n,
                "dim": fam.dim(),
                "model": witness.model,
                "seed": cli.seed,
            });
            if witness.indices.is_some() {
                let sidecar = out.with_extension("witness.json");
                std::fs::write(&sidecar, serde_json::to_string_pretty(&witness)
                        .expect("serializable")
                        .as_bytes())?;
                payload["witness"] = json!(sidecar.display().to_string());
            }
            emit(payload);
            Ok(())
        }
        Cmd::CountOv { a, b, eps, oracle } => {
            let (fa, fb) = (load(a)?, load(b)?);
            let eps = parse_eps(eps)?;
            let est = count_ov_approx(&fa, &fb, &eps)?;
            let mut payload = json!({
                "command": "count-ov",
                "n_a": fa.len(),
                "n_b": fb.len(),
                "dim": fa.dim(),
                "seed": cli.seed,
                "result": count_payload(&est, &eps),
            });
            if *oracle {
                payload["oracle"] = oracle_payload(&est, brute_count_ov(&fa, &fb));
            }
            emit(payload);
            Ok(())
        }
        Cmd::CountKov { inputs, eps, oracle } => {
            let fams: Vec<VectorFamily> = inputs.iter().map(load).collect::<Result<_>>()?;
            let refs: Vec<&VectorFamily> = fams.iter().collect();
            let eps = parse_eps(eps)?;
            let est = count_kov_approx(&refs, &eps)?;
            let mut payload = json!({
                "command": "count-kov",
                "k": fams.len(),
                "sizes": fams.iter().map(|f| f.len()).collect::<Vec<_>>(),
                "dim": fams[0].dim(),
                "seed": cli.seed,
                "result": count_payload(&est, &eps),
            });
            if *oracle {
                payload["oracle"] = oracle_payload(&est, brute_count_kov(&refs));
            }
            emit(payload);
            Ok(())
        }
        Cmd::CountSparseOv { a, b, eps, oracle } => {
            let (fa, fb) = (load(a)?, load(b)?);
            let eps = parse_eps(eps)?;
            let est = count_sparse_ov_approx(&fa, &fb, &eps)?;
            let mut payload = json!({
                "command": "count-sparse-ov",
                "n_a": fa.len(),
                "n_b": fb.len(),
                "universe": fa.dim(),
                "sparse_bound": fa.sparse_bound(),
                "seed": cli.seed,
                "result": count_payload(&est, &eps),
            });
            if *oracle {
                payload["oracle"] = oracle_payload(&est, brute_count_ov(&fa, &fb));
            }
            emit(payload);
            Ok(())
        }
        Cmd::DecideOv {
            a,
            b,
            level,
            reps,
            oracle,
        } => {
            let (fa, fb) = (load(a)?, load(b)?);
            let n = fa.len().max(fb.len()).max(2);
            let mut params = derive_ov_params(n, fa.dim()).with_union_bound();
            if let Some(l) = level {
                params.eps_exponent = *l;
            }
            if let Some(t) = reps {
                params.repetitions = *t;
            }
            let report = ov_decide_with_stats(&fa, &fb, &params, &SeededRng::new(cli.seed))?;
            let mut payload = json!({
                "command": "decide-ov",
                "answer": report.answer,
                "max_counter": report.max_counter,
                "repetitions": report.repetitions,
                "params": {
                    "eps_exponent": params.eps_exponent,
                    "group_size": params.group_size,
                    "accept_fraction": rat_to_string(&params.accept_fraction),
                },
                "seed": cli.seed,
            });
            if *oracle {
                payload["oracle"] = json!({
                    "exact_orthogonal_pairs": brute_count_ov(&fa, &fb).to_string(),
                });
            }
            emit(payload);
            Ok(())
        }
        Cmd::Maxip { a, b, delta, oracle } => {
            let (fa, fb) = (load(a)?, load(b)?);
            let report = max_ip_approx(&fa, &fb, *delta, &SeededRng::new(cli.seed))?;
            let mut payload = json!({
                "command": "maxip",
                "v": report.v,
                "bracket": [report.v, 2 * report.v],
                "calls": report.calls,
                "reps_per_call": report.reps_per_call,
                "k": report.k,
                "exact_zero": report.exact_zero,
                "delta": delta,
                "seed": cli.seed,
            });
            if *oracle {
                payload["oracle"] = json!({ "exact_max": brute_max_ip(&fa, &fb) });
            }
            emit(payload);
            Ok(())
        }
        Cmd::Calibrate {
            eps_list,
            tau,
            d,
            trials,
        } => {
            println!("eps,tau,d,k");
            for item in eps_list.split(',') {
                let eps = parse_eps(item.trim())?;
                let eps_f = ovkit::rat::rat_to_f64(&eps);
                let k = ovkit::amsp::calibrate_k(eps_f, *tau, *d, *trials, &SeededRng::new(cli.seed));
                println!("{},{tau},{d},{k}", rat_to_string(&eps));
            }
            Ok(())
        }
        Cmd::VerifyPoly { d, eps } => {
            let eps = parse_eps(eps)?;
            let poly = build_or_polynomial(*d, &eps)?;
            let report = verify_or_polynomial(&poly);
            emit(json!({
                "command": "verify-poly",
                "dim": d,
                "eps": rat_to_string(&eps),
                "degree": poly.degree,
                "sketch_degree": poly.sketch_degree(),
                "certified": report.certified,
                "value_at_zero": rat_to_string(&report.value_at_zero),
                "max_abs_deviation": rat_to_string(&report.max_abs_deviation),
                "argmax": report.argmax,
            }));
            Ok(())
        }
        Cmd::Bench => {
            // Timing goes to stderr; stdout stays deterministic.
            println!("n,d,eps,sketch_width,estimate");
            for &(n, d) in &[(64usize, 10usize), (128, 10), (64, 12)] {
                for eps_str in ["1/10", "1/20"] {
                    let eps = parse_eps(eps_str)?;
                    let (fa, _) = dataset::generate(
                        n,
                        &GenModel::Uniform { d, p: 0.5 },
                        cli.seed,
                    )?;
                    let (fb, _) = dataset::generate(
                        n,
                        &GenModel::Uniform { d, p: 0.5 },
                        cli.seed ^ 0x9e3779b97f4a7c15,
                    )?;
                    let t0 = Instant::now();
                    let est = count_ov_approx(&fa, &fb, &eps)?;
                    let ms = t0.elapsed().as_millis();
                    println!(
                        "{n},{d},{eps_str},{},{}",
                        est.sketch_width,
                        rat_to_string(&est.value)
                    );
                    eprintln!("bench n={n} d={d} eps={eps_str} ms={ms}");
                }
            }
            Ok(())
        }
    }
}
