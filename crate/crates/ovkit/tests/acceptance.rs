//! Acceptance gate: one test per release criterion, each printing a
//! single PASS/FAIL line (visible with `--nocapture`). Every numeric
//! tolerance is stated inline next to the check that uses it.

use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::Signed;

use ovkit::amsp::{calibrate_k, max_ip_approx, pair_accepts, sample_gap_ip_challenge};
use ovkit::dataset::{generate, GenModel};
use ovkit::f2poly::{eval_disj_poly, phi_x, phi_y, sample_disj_poly};
use ovkit::oracle::{brute_count_kov, brute_count_ov, brute_max_ip};
use ovkit::orpoly::{build_or_polynomial, verify_or_polynomial};
use ovkit::ovdecide::{derive_ov_params, ov_decide_with_stats};
use ovkit::poisson::{pois_sample, pois_sample_split};
use ovkit::rat::{rat_frac, rat_int, rat_to_f64, Rat};
use ovkit::sketch::{
    count_kov_approx, count_ov_approx, count_sparse_ov_approx, direct_poly_count,
    estimate_tuple_count, merge_sketches, sketch_family, Backend,
};
use ovkit::{BitVector, SeededRng, VectorFamily};

/// Collects failures so one criterion reports all its violations at once,
/// then prints the verdict line and panics on failure.
struct Criterion {
    label: &'static str,
    failures: Vec<String>,
    started: Instant,
}

impl Criterion {
    fn new(label: &'static str) -> Self {
        Criterion {
            label,
            failures: Vec::new(),
            started: Instant::now(),
        }
    }

    fn check(&mut self, cond: bool, msg: impl Into<String>) {
        if !cond {
            self.failures.push(msg.into());
        }
    }

    fn finish(mut self, budget: Duration) {
        let elapsed = self.started.elapsed();
        if elapsed > budget {
            self.failures.push(format!(
                "runtime {elapsed:?} exceeds the {budget:?} budget"
            ));
        }
        if self.failures.is_empty() {
            println!("{}: PASS ({elapsed:?})", self.label);
        } else {
            println!("{}: FAIL ({elapsed:?})", self.label);
            for f in &self.failures {
                println!("  - {f}");
            }
            panic!("{} failed", self.label);
        }
    }
}

fn uniform_family(n: usize, d: usize, p: f64, seed: u64) -> VectorFamily {
    let (fam, _) = generate(n, &GenModel::Uniform { d, p }, seed).unwrap();
    fam
}

#[test]
fn criterion_01_polynomial_certification() {
    let mut c = Criterion::new("criterion 01 polynomial certification");
    for d in [2usize, 4, 8, 16, 32, 64] {
        for (num, den) in [(1i64, 2i64), (1, 10), (1, 100)] {
            let eps = rat_frac(num, den);
            let p = build_or_polynomial(d, &eps).unwrap();
            let report = verify_or_polynomial(&p);
            c.check(
                p.certified && report.certified,
                format!("(d={d}, eps={num}/{den}) not certified"),
            );
            c.check(
                report.value_at_zero == rat_int(1),
                format!("(d={d}, eps={num}/{den}) q(0) != 1"),
            );
            c.check(
                report.max_abs_deviation <= eps,
                format!("(d={d}, eps={num}/{den}) deviation above eps"),
            );
        }
    }
    c.finish(Duration::from_secs(10));
}

#[test]
fn criterion_02_deterministic_counting() {
    let mut c = Criterion::new("criterion 02 deterministic additive counting");
    let eps = rat_frac(1, 20);
    let bound = rat_frac(64 * 64, 20); // eps * n^2 = 204.8, exact
    let poly = build_or_polynomial(10, &eps).unwrap();
    for i in 0..50u64 {
        let a = uniform_family(64, 10, 0.5, 10_000 + i);
        let b = uniform_family(64, 10, 0.5, 20_000 + i);
        let est = count_ov_approx(&a, &b, &eps).unwrap();
        let exact = rat_int(brute_count_ov(&a, &b) as i64);
        let dev = (est.value.clone() - exact).abs();
        c.check(dev <= bound, format!("instance {i}: |E - brute| > eps*n^2"));
        let direct = direct_poly_count(&a, &b, &poly).unwrap();
        c.check(
            est.value == direct,
            format!("instance {i}: sketch and direct paths disagree"),
        );
    }
    c.finish(Duration::from_secs(60));
}

#[test]
fn criterion_03_kov_and_sparse() {
    let mut c = Criterion::new("criterion 03 k-OV and sparse variants");
    let eps = rat_frac(1, 10);

    // k = 3, n = 16, d = 6: within eps * n^3 = 409.6.
    let fams: Vec<VectorFamily> = (0..3u64)
        .map(|j| uniform_family(16, 6, 0.5, 30_000 + j))
        .collect();
    let refs: Vec<&VectorFamily> = fams.iter().collect();
    let est = count_kov_approx(&refs, &eps).unwrap();
    let exact = rat_int(brute_count_kov(&refs) as i64);
    let dev = (est.value.clone() - exact).abs();
    c.check(dev <= rat_frac(16 * 16 * 16, 10), "k-OV deviation > eps*n^3");

    // Sparse universe m = 64, sparsity d = 8, n = 32: within eps * n^2.
    let (sa, _) = generate(32, &GenModel::Sparse { m: 64, d: 8 }, 41).unwrap();
    let (sb, _) = generate(32, &GenModel::Sparse { m: 64, d: 8 }, 42).unwrap();
    let est = count_sparse_ov_approx(&sa, &sb, &eps).unwrap();
    let exact = rat_int(brute_count_ov(&sa, &sb) as i64);
    let dev = (est.value.clone() - exact).abs();
    c.check(dev <= rat_frac(32 * 32, 10), "sparse deviation > eps*n^2");
    c.check(est.degree <= 8, "sparse degree not driven by the sparsity");

    // Small enough to run both backends at the sparsity-driven degree:
    // universe 12, bound 4. All three routes must agree exactly.
    let (ta, _) = generate(20, &GenModel::Sparse { m: 12, d: 4 }, 43).unwrap();
    let (tb, _) = generate(20, &GenModel::Sparse { m: 12, d: 4 }, 44).unwrap();
    let sparse_est = count_sparse_ov_approx(&ta, &tb, &eps).unwrap();
    let poly = build_or_polynomial(4, &eps).unwrap();
    let deg = poly.sketch_degree();
    let da = sketch_family(&ta, deg, Backend::Dense).unwrap();
    let db = sketch_family(&tb, deg, Backend::Dense).unwrap();
    let dense_est = estimate_tuple_count(&[&da, &db], &poly).unwrap();
    c.check(
        sparse_est.value == dense_est.value,
        "sparse and dense backends disagree",
    );
    let direct = direct_poly_count(&ta, &tb, &poly).unwrap();
    c.check(dense_est.value == direct, "backend value != direct evaluation");

    c.finish(Duration::from_secs(60));
}

#[test]
fn criterion_04_sketch_additivity() {
    let mut c = Criterion::new("criterion 04 sketch additivity");
    let mut rng = SeededRng::new(404);
    for case in 0..100u64 {
        let d = 4 + (rng.below(9) as usize); // dims 4..=12
        let degree = 1 + (rng.below(d.min(5) as u64) as usize);
        let n1 = 1 + rng.below(12) as usize;
        let n2 = 1 + rng.below(12) as usize;
        let backend = if rng.next_bool() {
            Backend::Dense
        } else {
            Backend::Sparse
        };
        let x1 = uniform_family(n1, d, 0.5, 50_000 + 2 * case);
        let x2 = uniform_family(n2, d, 0.5, 50_001 + 2 * case);
        let mut whole = VectorFamily::new(d, None).unwrap();
        for v in x1.iter().chain(x2.iter()) {
            whole.push(v.clone()).unwrap();
        }
        let merged = merge_sketches(
            &sketch_family(&x1, degree, backend).unwrap(),
            &sketch_family(&x2, degree, backend).unwrap(),
        )
        .unwrap();
        let direct = sketch_family(&whole, degree, backend).unwrap();
        c.check(
            merged == direct,
            format!("case {case}: sk(X1) + sk(X2) != sk(X1 u X2)"),
        );
    }
    c.finish(Duration::from_secs(60));
}

#[test]
fn criterion_05_probabilistic_rank() {
    let mut c = Criterion::new("criterion 05 probabilistic-rank decomposition");

    // Exhaustive decomposition identity at d = 6, L = 3, 20 samples.
    let d = 6usize;
    let mut rng = SeededRng::new(505);
    for sample in 0..20 {
        let p = sample_disj_poly(d, 3, &mut rng).unwrap();
        let all: Vec<BitVector> = (0..1u64 << d)
            .map(|m| {
                BitVector::from_support(
                    d,
                    &(0..d).filter(|&i| m >> i & 1 == 1).collect::<Vec<_>>(),
                )
                .unwrap()
            })
            .collect();
        let phis_x: Vec<BitVector> = all.iter().map(|x| phi_x(&p, x)).collect();
        let phis_y: Vec<BitVector> = all.iter().map(|y| phi_y(&p, y)).collect();
        let mut bad = 0usize;
        for (i, x) in all.iter().enumerate() {
            for (j, y) in all.iter().enumerate() {
                let lhs = phis_x[i].dot(&phis_y[j]) % 2 == 1;
                let rhs = eval_disj_poly(&p, &x.and(y));
                if lhs != rhs {
                    bad += 1;
                }
            }
        }
        c.check(bad == 0, format!("sample {sample}: {bad} decomposition mismatches"));
    }

    // Empirical per-pair error at d = 16 for L in {4, 7}: a fresh polynomial
    // errs on a fixed non-disjoint pair with probability exactly 2^-L, so the
    // observed rate stays below 2^-L + 3 sigma.
    let d = 16usize;
    let samples = 10_000usize;
    for level in [4usize, 7] {
        let q = (0.5f64).powi(level as i32);
        let sigma = (q * (1.0 - q) / samples as f64).sqrt();
        let mut rng = SeededRng::with_stream(505, level as u64);
        let mut errors = 0usize;
        let mut disjoint_errors = 0usize;
        for _ in 0..samples {
            let p = sample_disj_poly(d, level, &mut rng).unwrap();
            // Non-disjoint pair: intersection {0}; poly claims disjoint -> error.
            let x = BitVector::from_support(d, &[0, 2, 4]).unwrap();
            let y = BitVector::from_support(d, &[0, 3, 5]).unwrap();
            if eval_disj_poly(&p, &x.and(&y)) {
                errors += 1;
            }
            // Disjoint pair: must be exact.
            let u = BitVector::from_support(d, &[1, 6]).unwrap();
            let v = BitVector::from_support(d, &[7, 8]).unwrap();
            if !eval_disj_poly(&p, &u.and(&v)) {
                disjoint_errors += 1;
            }
        }
        let rate = errors as f64 / samples as f64;
        c.check(
            rate <= q + 3.0 * sigma,
            format!("L={level}: error rate {rate} above 2^-L + 3 sigma"),
        );
        c.check(
            disjoint_errors == 0,
            format!("L={level}: polynomial erred on a disjoint pair"),
        );
    }

    c.finish(Duration::from_secs(120));
}

#[test]
fn criterion_06_ov_decision() {
    let mut c = Criterion::new("criterion 06 OV decision");
    let (n, d, trials) = (256usize, 24usize, 100usize);
    let mut params = derive_ov_params(n, d).with_union_bound();
    params.repetitions = 200;
    let t = params.repetitions as f64;
    // Planted pair fires when both group masks hit (prob 1/4 per rep).
    let pos_floor = 0.24 - 3.0 * (0.25 * 0.75 / t).sqrt();
    let mut pos_correct = 0usize;
    let mut neg_correct = 0usize;

    for i in 0..trials as u64 {
        // Positive: dense background, one planted orthogonal cross pair.
        let mut a = uniform_family(n, d, 0.7, 60_000 + i);
        let mut b = uniform_family(n, d, 0.7, 70_000 + i);
        let mut rng = SeededRng::with_stream(606, i);
        let ia = rng.below(n as u64) as usize;
        let ib = rng.below(n as u64) as usize;
        let left = BitVector::from_support(d, &(0..d / 2).collect::<Vec<_>>()).unwrap();
        let right = BitVector::from_support(d, &(d / 2..d).collect::<Vec<_>>()).unwrap();
        let mut va = a.vectors().to_vec();
        let mut vb = b.vectors().to_vec();
        va[ia] = left.clone();
        vb[ib] = right.clone();
        a = VectorFamily::from_vectors(d, None, va).unwrap();
        b = VectorFamily::from_vectors(d, None, vb).unwrap();
        let report = ov_decide_with_stats(&a, &b, &params, &SeededRng::new(80_000 + i)).unwrap();
        if report.answer {
            pos_correct += 1;
        }
        let freq = report.counters[ia * report.groups_b + ib] as f64 / t;
        c.check(
            freq >= pos_floor,
            format!("trial {i}: planted-pair frequency {freq} below {pos_floor}"),
        );

        // Negative: dense uniform, screened to contain no orthogonal pair.
        let mut seed_bump = 0u64;
        let (na, nb) = loop {
            let na = uniform_family(n, d, 0.7, 90_000 + i + seed_bump);
            let nb = uniform_family(n, d, 0.7, 100_000 + i + seed_bump);
            if brute_count_ov(&na, &nb) == 0 {
                break (na, nb);
            }
            seed_bump += 500_000;
        };
        let report = ov_decide_with_stats(&na, &nb, &params, &SeededRng::new(110_000 + i)).unwrap();
        if !report.answer {
            neg_correct += 1;
        }
        // Mean acceptance frequency over all group pairs: the proof's per-pair
        // rate is (1/4) * 2^-L < 0.01. All pairs share one challenge per
        // repetition, so the effective sample is the T repetitions; the
        // per-repetition mean M has E[M] = 2^-L/4 and, since M <= 1/4 up to
        // mask concentration, Var(M) <= E[M]/4.
        let pairs = (report.groups_a * report.groups_b) as f64;
        let mean_freq =
            report.counters.iter().map(|&x| x as f64).sum::<f64>() / (t * pairs);
        let rate = 0.25 * 0.5f64.powi(params.eps_exponent as i32);
        let neg_ceil = 0.01 + 3.0 * (rate * 0.25 / t).sqrt();
        c.check(
            mean_freq <= neg_ceil,
            format!("trial {i}: negative mean frequency {mean_freq} above {neg_ceil}"),
        );
    }

    c.check(
        pos_correct * 100 >= 95 * trials,
        format!("only {pos_correct}/{trials} planted instances detected"),
    );
    c.check(
        neg_correct * 100 >= 95 * trials,
        format!("only {neg_correct}/{trials} negative instances rejected"),
    );
    c.finish(Duration::from_secs(300));
}

#[test]
fn criterion_07_am_protocol_error() {
    let mut c = Criterion::new("criterion 07 AM protocol error");
    let (eps, tau, d) = (0.125f64, 8usize, 128usize);
    let k = calibrate_k(eps, tau, d, 2000, &SeededRng::new(707));
    c.check(k <= 208, format!("calibrated k = {k} exceeds ceil(100 ln 8) = 208"));

    let challenges = 10_000usize;
    let sigma = (eps * (1.0 - eps) / challenges as f64).sqrt();
    let ceil = eps + 3.0 * sigma;
    // Coordinates are exchangeable, so fixed supports are representative.
    let yes = BitVector::from_support(d, &(0..2 * tau).collect::<Vec<_>>()).unwrap();
    let no = BitVector::from_support(d, &(0..tau).collect::<Vec<_>>()).unwrap();
    let mut rng = SeededRng::new(708);
    let mut incomplete = 0usize;
    let mut unsound = 0usize;
    for _ in 0..challenges {
        let ch = sample_gap_ip_challenge(d, tau, k, &mut rng);
        if !pair_accepts(&yes, &yes, &ch) {
            incomplete += 1; // |X ∩ Y| = 2 tau must accept
        }
        if pair_accepts(&no, &no, &ch) {
            unsound += 1; // |X ∩ Y| = tau must reject
        }
    }
    let comp_rate = incomplete as f64 / challenges as f64;
    let sound_rate = unsound as f64 / challenges as f64;
    c.check(
        comp_rate <= ceil,
        format!("completeness error {comp_rate} above {ceil}"),
    );
    c.check(
        sound_rate <= ceil,
        format!("soundness error {sound_rate} above {ceil}"),
    );
    c.finish(Duration::from_secs(120));
}

#[test]
fn criterion_08_max_ip_bracket() {
    let mut c = Criterion::new("criterion 08 2-approximate Max-IP");
    let (n, d) = (128usize, 32usize);
    let mut bracketed = 0usize;
    for i in 0..100u64 {
        let a = uniform_family(n, d, 0.25, 120_000 + i);
        let b = uniform_family(n, d, 0.25, 130_000 + i);
        let report = max_ip_approx(&a, &b, 0.05, &SeededRng::new(140_000 + i)).unwrap();
        let exact = brute_max_ip(&a, &b);
        if report.v <= exact && exact <= 2 * report.v {
            bracketed += 1;
        }
    }
    c.check(
        bracketed >= 95,
        format!("bracket held on only {bracketed}/100 instances"),
    );

    // Disjoint coordinate usage: Max = 0 must be answered exactly.
    let za = VectorFamily::from_vectors(
        d,
        None,
        (0..8)
            .map(|i| BitVector::from_support(d, &[i, i + 4]).unwrap())
            .collect(),
    )
    .unwrap();
    let zb = VectorFamily::from_vectors(
        d,
        None,
        (0..8)
            .map(|i| BitVector::from_support(d, &[16 + i, 20 + i]).unwrap())
            .collect(),
    )
    .unwrap();
    let report = max_ip_approx(&za, &zb, 0.05, &SeededRng::new(150_000)).unwrap();
    c.check(
        report.v == 0 && report.exact_zero,
        "zero-max instance not answered exactly",
    );
    c.finish(Duration::from_secs(600));
}

#[test]
fn criterion_09_poisson_facts() {
    let mut c = Criterion::new("criterion 09 Poisson facts");
    let draws = 100_000usize;
    for lambda in [10.0f64, 50.0] {
        let mut rng = SeededRng::with_stream(909, lambda as u64);
        let samples: Vec<u64> = (0..draws)
            .map(|_| {
                if lambda <= 30.0 {
                    pois_sample(lambda, &mut rng).unwrap()
                } else {
                    pois_sample_split(lambda, &mut rng).unwrap()
                }
            })
            .collect();
        let mean = samples.iter().map(|&x| x as f64).sum::<f64>() / draws as f64;
        let var = samples
            .iter()
            .map(|&x| (x as f64 - mean).powi(2))
            .sum::<f64>()
            / (draws - 1) as f64;
        c.check(
            (mean - lambda).abs() <= 0.03 * lambda,
            format!("lambda={lambda}: mean {mean} off by more than 3%"),
        );
        c.check(
            (var - lambda).abs() <= 0.03 * lambda,
            format!("lambda={lambda}: variance {var} off by more than 3%"),
        );
        // Tail bounds: Pr[X >= 1.2 lambda], Pr[X <= 0.8 lambda] <= e^{-0.01 lambda}.
        let bound = (-0.01 * lambda).exp() + 0.02;
        let upper = samples.iter().filter(|&&x| x as f64 >= 1.2 * lambda).count();
        let lower = samples.iter().filter(|&&x| x as f64 <= 0.8 * lambda).count();
        c.check(
            (upper as f64 / draws as f64) <= bound,
            format!("lambda={lambda}: upper tail above the bound"),
        );
        c.check(
            (lower as f64 / draws as f64) <= bound,
            format!("lambda={lambda}: lower tail above the bound"),
        );
    }
    c.finish(Duration::from_secs(60));
}

#[test]
fn criterion_10_cli_determinism() {
    let mut c = Criterion::new("criterion 10 CLI determinism");
    let bin = env!("CARGO_BIN_EXE_ovkit");
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).display().to_string();

    let run = |args: &[String]| -> (Vec<u8>, i32) {
        let out = Command::new(bin)
            .args(args)
            .current_dir(dir.path())
            .output()
            .expect("binary runs");
        (out.stdout, out.status.code().unwrap_or(-1))
    };

    let owned = |parts: &[&str]| parts.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let a = path("a.txt");
    let b = path("b.txt");
    let sa = path("sa.txt");
    let sb = path("sb.txt");
    let commands: Vec<Vec<String>> = vec![
        owned(&["gen", "--out", &a, "--n", "24", "--model", "uniform", "--d", "10", "--seed", "5"]),
        owned(&["gen", "--out", &b, "--n", "24", "--model", "uniform", "--d", "10", "--seed", "6"]),
        owned(&["gen", "--out", &sa, "--n", "16", "--model", "sparse", "--d", "16", "--bound", "4", "--seed", "7"]),
        owned(&["gen", "--out", &sb, "--n", "16", "--model", "sparse", "--d", "16", "--bound", "4", "--seed", "8"]),
        owned(&["count-ov", "--a", &a, "--b", &b, "--eps", "1/10", "--oracle"]),
        owned(&["count-kov", "--inputs", &a, &b, "--eps", "1/10", "--oracle"]),
        owned(&["count-sparse-ov", "--a", &sa, "--b", &sb, "--eps", "1/10", "--oracle"]),
        owned(&["decide-ov", "--a", &a, "--b", &b, "--oracle"]),
        owned(&["maxip", "--a", &a, "--b", &b, "--delta", "0.1", "--oracle"]),
        owned(&["calibrate", "--eps-list", "1/4", "--tau", "2", "--d", "8", "--trials", "1000"]),
        owned(&["verify-poly", "--d", "8", "--eps", "1/10"]),
        owned(&["bench"]),
    ];

    for cmd in &commands {
        let mut outputs = Vec::new();
        for threads in ["1", "2", "8", "1"] {
            let mut args = cmd.clone();
            args.push("--threads".into());
            args.push(threads.into());
            let (stdout, code) = run(&args);
            c.check(code == 0, format!("{} exited with {code}", cmd[0]));
            outputs.push(stdout);
        }
        c.check(
            outputs.windows(2).all(|w| w[0] == w[1]),
            format!("{} output not byte-identical across runs/threads", cmd[0]),
        );
        c.check(
            !outputs[0].is_empty(),
            format!("{} produced no output", cmd[0]),
        );
    }
    c.finish(Duration::from_secs(120));
}

#[test]
fn acceptance_support_rationals_are_exact() {
    // Guard for the tolerances above: 204.8 and 409.6 are represented
    // exactly as rationals, never as floats.
    assert_eq!(rat_to_f64(&rat_frac(64 * 64, 20)), 204.8);
    assert_eq!(rat_to_f64(&rat_frac(16 * 16 * 16, 10)), 409.6);
    let one: Rat = rat_int(1);
    assert_eq!(&one + &one, rat_int(2));
}
