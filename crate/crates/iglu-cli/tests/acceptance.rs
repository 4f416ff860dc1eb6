//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured quantity. Tests serialize on a global lock so the
//! timing-sensitive criteria run on a quiet CPU.
//!
//! Run with `cargo test -p iglu-cli --test acceptance -- --nocapture`.

use iglu_cli::bench::{run_bench, BenchProtocol, Precision};
use iglu_cli::verify;
use iglu_core::gates::{self, Sharpness};
use iglu_core::longtail::{self, LongTailConfig};
use iglu_core::trainer::{
    self, dead_unit_fraction, InitScheme, LossKind, LrSchedule, Mlp, MlpConfig, Optimizer,
    SigmaSharing, SuiteConfig, TrainConfig,
};
use iglu_core::{mixture, rng, Activation, Dataset};
use std::process::Command;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

static GATE: Mutex<()> = Mutex::new(());

fn lock() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(n: u32, what: &str, detail: &str) {
    println!("ACCEPTANCE {n:2} ({what}): PASS - {detail}");
}

fn blob_data(seed: u64) -> (Dataset, Dataset) {
    longtail::generate(&LongTailConfig {
        num_classes: 2,
        max_count: 120,
        imbalance_ratio: 1.0,
        feature_dim: 6,
        seed,
        class_separation: 6.0,
        test_per_class: 60,
    })
    .unwrap()
}

#[test]
fn criterion_01_mixture_derivation_oracle() {
    let _g = lock();
    let t = Instant::now();
    let r = verify::verify_mixture(1e-8).unwrap();
    let secs = t.elapsed().as_secs_f64();
    assert!(r.passed, "max |Z - quadrature| = {} at (x={}, sigma={})", r.max_abs_dev, r.argmax_x, r.argmax_sigma);
    assert_eq!(r.pairs_checked, 201 * 5);
    assert!(secs < 60.0, "took {secs:.1}s");
    report(
        1,
        "mixture oracle",
        &format!(
            "max |Z - quadrature| = {:.2e} <= 1e-8 over {} pairs in {secs:.1}s",
            r.max_abs_dev, r.pairs_checked
        ),
    );
}

#[test]
fn criterion_02_approximation_bound() {
    let _g = lock();
    let t = Instant::now();
    let r = verify::verify_approx();
    let secs = t.elapsed().as_secs_f64();
    assert!(r.within_fig_bound, "sup = {}", r.sup_abs_diff);
    assert!(r.within_text_bound);
    assert!(secs < 10.0, "took {secs:.1}s");
    report(
        2,
        "approximation bound",
        &format!(
            "sup |Z - Z_approx| = {:.6} at (x={}, sigma={}) <= 0.025 (text bound 0.05 also holds) in {secs:.1}s",
            r.sup_abs_diff, r.argmax_x, r.argmax_sigma
        ),
    );
}

#[test]
fn criterion_03_exactness_points() {
    let _g = lock();
    let mut worst_exact = 0.0f64;
    let mut worst_asym = 0.0f64;
    for &s in &[0.1, 0.5, 1.0, 5.0, 10.0] {
        let sp = Sharpness::fixed(s);
        for x in [0.0, 1.0 / s, -1.0 / s] {
            let dev = (gates::iglu_gate(x, sp) - gates::iglu_gate_approx(x, sp)).abs();
            worst_exact = worst_exact.max(dev);
        }
        for x in [1e6 / s, -1e6 / s] {
            let dev = (gates::iglu_gate(x, sp) - gates::iglu_gate_approx(x, sp)).abs();
            worst_asym = worst_asym.max(dev);
        }
    }
    assert!(worst_exact < 1e-12, "exactness deviation {worst_exact}");
    assert!(worst_asym < 1e-5, "asymptotic deviation {worst_asym}");
    report(
        3,
        "exactness points",
        &format!(
            "|Z - Z_approx| = {worst_exact:.2e} at x = 0 and sigma x = +-1 (< 1e-12); {worst_asym:.2e} at |sigma x| = 1e6 (< 1e-5)"
        ),
    );
}

#[test]
fn criterion_04_gradient_suite() {
    let _g = lock();
    let t = Instant::now();
    let r = verify::verify_grads().unwrap();
    let secs = t.elapsed().as_secs_f64();
    let worst = r
        .entries
        .iter()
        .map(|e| e.report.max_rel_error)
        .fold(0.0f64, f64::max);
    for e in &r.entries {
        assert!(
            e.report.passed,
            "{} {}: max rel {} at {}",
            e.kind, e.derivative, e.report.max_rel_error, e.report.argmax_point
        );
    }
    assert!(secs < 30.0, "took {secs:.1}s");
    report(
        4,
        "gradient suite",
        &format!(
            "{} derivative checks, worst rel error {worst:.2e} < 1e-6, in {secs:.1}s",
            r.entries.len()
        ),
    );
}

#[test]
fn criterion_05_limit_behavior() {
    let _g = lock();
    // sigma = 0: exactly x/2 on a random grid
    let act0 = Activation::Iglu { sigma: Sharpness::fixed(0.0) };
    let mut r = rng::seeded(555);
    for _ in 0..1000 {
        let x = 100.0 * (rng::uniform(&mut r) - 0.5);
        assert_eq!(act0.eval(x), x / 2.0, "IGLU(x; 0) != x/2 at {x}");
    }
    // sigma = 1000: within 0.01 of ReLU away from the kink
    let act = Activation::Iglu { sigma: Sharpness::fixed(1000.0) };
    let mut sup = 0.0f64;
    for i in -1000..=1000 {
        let x = i as f64 * 0.01;
        if x.abs() < 0.05 {
            continue;
        }
        sup = sup.max((act.eval(x) - x.max(0.0)).abs());
    }
    assert!(sup < 0.01, "sup {sup}");
    report(
        5,
        "limit behavior",
        &format!("IGLU(x; 0) == x/2 exactly; sup |IGLU(x; 1000) - ReLU(x)| = {sup:.2e} < 0.01"),
    );
}

#[test]
fn criterion_06_cauchy_identity() {
    let _g = lock();
    let mut r = rng::seeded(606);
    let mut worst = 0.0f64;
    for &s in &[0.1, 1.0, 10.0] {
        let sp = Sharpness::fixed(s);
        for _ in 0..1000 {
            let x = 200.0 * (rng::uniform(&mut r) - 0.5);
            let dev = (gates::iglu_gate(x, sp) - gates::cauchy_cdf(x, 1.0 / s).unwrap()).abs();
            worst = worst.max(dev);
        }
    }
    assert!(worst <= 1e-14, "worst deviation {worst}");
    report(
        6,
        "Cauchy identity",
        &format!("max |Z(x; sigma) - CauchyCDF(x; 1/sigma)| = {worst:.2e} <= 1e-14 on 3000 random points"),
    );
}

#[test]
fn criterion_07_tail_law_and_contrast() {
    let _g = lock();
    let ratio = gates::iglu_gate_dx(1e4, Sharpness::fixed(1.0)) * (std::f64::consts::PI * 1e8);
    assert!((0.99..=1.01).contains(&ratio), "ratio {ratio}");
    let gauss = gates::gaussian_cdf(-10.0).unwrap();
    let cauchy = gates::iglu_gate(-10.0, Sharpness::fixed(1.0));
    assert!(gauss < 1e-20, "Phi(-10) = {gauss}");
    assert!(cauchy > 0.03, "Z(-10; 1) = {cauchy}");
    report(
        7,
        "tail law and contrast",
        &format!(
            "Z'(1e4)*pi*1e8 = {ratio:.6} in [0.99, 1.01]; Phi(-10) = {gauss:.2e} < 1e-20 vs Z(-10; 1) = {cauchy:.4} > 0.03"
        ),
    );
}

#[test]
fn criterion_08_bench_ordering() {
    let _g = lock();
    let t = Instant::now();
    let proto = BenchProtocol {
        input_dim: 10_000,
        iterations: 1_000,
        warmup_iterations: 50,
        seed: 42,
        precision: Precision::Single,
    };
    let zoo = vec![
        Activation::Identity,
        Activation::Relu,
        Activation::Iglu { sigma: Sharpness::fixed(1.0) },
        Activation::IgluApprox { sigma: Sharpness::fixed(1.0) },
        Activation::GeluTanh,
    ];
    let mut approx_faster = 0;
    let mut ratio_sums = vec![0.0f64; zoo.len()];
    for _ in 0..5 {
        let r = run_bench(&zoo, &proto).unwrap();
        let iglu = r.rows.iter().find(|row| row.name == "IGLU(sigma=1)").unwrap();
        let approx = r.rows.iter().find(|row| row.name == "IGLU-Approx(sigma=1)").unwrap();
        if approx.forward_ns_mean < iglu.forward_ns_mean {
            approx_faster += 1;
        }
        for (sum, row) in ratio_sums.iter_mut().zip(&r.rows) {
            *sum += row.forward_ratio_vs_identity.min(row.backward_ratio_vs_identity);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    assert!(approx_faster >= 4, "IGLU-Approx beat IGLU in only {approx_faster}/5 runs");
    // mean-of-runs ratios: every non-identity activation at >= 1x identity
    for (i, sum) in ratio_sums.iter().enumerate().skip(1) {
        let mean_ratio = sum / 5.0;
        assert!(mean_ratio >= 1.0, "row {i} mean min-ratio {mean_ratio}");
    }
    assert!(secs < 120.0, "took {secs:.1}s");
    report(
        8,
        "bench ordering",
        &format!(
            "IGLU-Approx forward < IGLU forward in {approx_faster}/5 runs; all identity ratios >= 1; {secs:.1}s total"
        ),
    );
}

#[test]
fn criterion_09_longtail_counts() {
    let _g = lock();
    let cfg = LongTailConfig {
        num_classes: 100,
        max_count: 500,
        imbalance_ratio: 100.0,
        feature_dim: 4,
        seed: 0,
        class_separation: 6.0,
        test_per_class: 10,
    };
    let counts = longtail::class_counts(&cfg).unwrap();
    assert_eq!(counts[0], 500);
    assert_eq!(counts[99], 5);
    assert!(counts.windows(2).all(|w| w[0] >= w[1]), "counts not monotone");
    let mu: f64 = 0.01;
    let mut worst = 0.0f64;
    for (k, &n) in counts.iter().enumerate() {
        let exact = 500.0 * mu.powf(k as f64 / 99.0);
        worst = worst.max((n as f64 - exact).abs());
        assert!((n as f64 - exact).abs() <= 1.0, "n_{k} = {n} vs exact {exact}");
    }
    report(
        9,
        "long-tail counts",
        &format!("n_0 = 500, n_99 = 5, monotone, max |n_k - exact| = {worst:.3} <= 1"),
    );
}

#[test]
fn criterion_10_dead_neuron_separation() {
    let _g = lock();
    let t = Instant::now();
    let (_train, test) = blob_data(1010);
    let cfg = |act: Activation| MlpConfig {
        layer_sizes: vec![6, 64, 2],
        activation: act,
        sigma_sharing: SigmaSharing::PerLayer,
        init: InitScheme::ConstantNegativeBias,
        seed: 7,
    };
    let relu = Mlp::new(&cfg(Activation::Relu)).unwrap();
    let relu_dead = dead_unit_fraction(&relu, &test);
    let iglu = Mlp::new(&cfg(Activation::Iglu { sigma: Sharpness::fixed(1.0) })).unwrap();
    let iglu_dead = dead_unit_fraction(&iglu, &test);
    let secs = t.elapsed().as_secs_f64();
    assert!(relu_dead >= 0.5, "ReLU dead fraction {relu_dead}");
    assert_eq!(iglu_dead, 0.0, "IGLU dead fraction must be exactly 0");
    assert!(secs < 60.0, "took {secs:.1}s");
    report(
        10,
        "dead-neuron separation",
        &format!("negative-bias init: ReLU dead fraction {relu_dead:.2} >= 0.5, IGLU dead fraction = 0 exactly"),
    );
}

/// Plain logistic regression by full-batch gradient descent; the
/// independent solvability oracle for the blob task.
fn logistic_regression_accuracy(train: &Dataset, test: &Dataset) -> f64 {
    let d = train.feature_dim;
    let mut w = vec![0.0f64; d];
    let mut b = 0.0f64;
    let n = train.len() as f64;
    for _ in 0..300 {
        let mut gw = vec![0.0f64; d];
        let mut gb = 0.0f64;
        for i in 0..train.len() {
            let x = train.sample(i);
            let y = train.labels[i] as f64;
            let z: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
            let p = 1.0 / (1.0 + (-z).exp());
            let err = p - y;
            for (g, xi) in gw.iter_mut().zip(x) {
                *g += err * xi;
            }
            gb += err;
        }
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= 0.1 * g / n;
        }
        b -= 0.1 * gb / n;
    }
    let mut correct = 0usize;
    for i in 0..test.len() {
        let x = test.sample(i);
        let z: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
        let pred = usize::from(z > 0.0);
        if pred == test.labels[i] {
            correct += 1;
        }
    }
    correct as f64 / test.len() as f64
}

#[test]
fn criterion_11_end_to_end_trainability() {
    let _g = lock();
    let t = Instant::now();
    let (train, test) = blob_data(1111);

    // pre-verify the task is solvable at all
    let lr_acc = logistic_regression_accuracy(&train, &test);
    assert!(lr_acc > 0.95, "logistic-regression oracle reached only {lr_acc}");

    let zoo = [
        Activation::Relu,
        Activation::GeluExact,
        Activation::GeluTanh,
        Activation::GeluA { a: 2.0 },
        Activation::Silu,
        Activation::Mish,
        Activation::Hardswish,
        Activation::Iglu { sigma: Sharpness::fixed(1.0) },
        Activation::IgluApprox { sigma: Sharpness::fixed(1.0) },
    ];
    let mut details = String::new();
    for act in zoo {
        let cfg = MlpConfig {
            layer_sizes: vec![6, 16, 2],
            activation: act,
            sigma_sharing: SigmaSharing::PerLayer,
            init: InitScheme::FanInScaled,
            seed: 3,
        };
        let tc = TrainConfig {
            epochs: 50,
            batch_size: 32,
            learning_rate: 5e-3,
            weight_decay: 1e-2,
            optimizer: Optimizer::AdamW,
            lr_schedule: LrSchedule::Cosine,
            loss: LossKind::CrossEntropy,
            seed: 11,
        };
        let (_m, r) = trainer::train(&cfg, &train, &test, &tc).unwrap();
        let acc = r.final_epoch.test_accuracy;
        assert!(acc > 0.95, "{act}: reached only {acc}");
        details.push_str(&format!("{act} {acc:.3}; "));
    }
    let secs = t.elapsed().as_secs_f64();
    assert!(secs < 120.0, "took {secs:.1}s");
    report(
        11,
        "end-to-end trainability",
        &format!("oracle {lr_acc:.3}; all > 0.95 within 50 epochs: {details}in {secs:.1}s"),
    );
}

#[test]
fn criterion_12_imbalance_suite_smoke() {
    let _g = lock();
    let t = Instant::now();
    let cfg = SuiteConfig {
        data: LongTailConfig {
            num_classes: 10,
            max_count: 150,
            imbalance_ratio: 1.0,
            feature_dim: 8,
            seed: 12,
            class_separation: 6.0,
            test_per_class: 40,
        },
        hidden_sizes: vec![24],
        train: TrainConfig {
            epochs: 20,
            batch_size: 32,
            learning_rate: 3e-3,
            weight_decay: 1e-2,
            optimizer: Optimizer::AdamW,
            lr_schedule: LrSchedule::Cosine,
            loss: LossKind::WeightedCrossEntropy,
            seed: 11,
        },
        init: InitScheme::FanInScaled,
        sigma_sharing: SigmaSharing::PerLayer,
        model_seed: 5,
    };
    let ratios = [10.0, 100.0];
    let acts = [
        Activation::Iglu { sigma: Sharpness::fixed(0.5) },
        Activation::IgluApprox { sigma: Sharpness::fixed(0.5) },
        Activation::Relu,
        Activation::GeluTanh,
    ];
    let table = trainer::run_imbalance_suite(&ratios, &acts, &cfg).unwrap();
    let table2 = trainer::run_imbalance_suite(&ratios, &acts, &cfg).unwrap();
    assert_eq!(table, table2, "suite is not deterministic");

    let chance = 1.0 / 10.0;
    for row in &table.rows {
        for cell in &row.cells {
            assert!(
                cell.balanced_accuracy > chance,
                "{} at rho={}: balanced accuracy {} not above chance",
                row.activation,
                cell.ratio,
                cell.balanced_accuracy
            );
        }
    }
    let secs = t.elapsed().as_secs_f64();

    // observational note (not an assertion): does low-sigma IGLU beat ReLU?
    let acc_of = |name: &str, ratio: f64| {
        table
            .rows
            .iter()
            .find(|r| r.activation == name)
            .and_then(|r| r.cells.iter().find(|c| c.ratio == ratio))
            .map(|c| c.balanced_accuracy)
            .unwrap()
    };
    let mut observation = String::new();
    for &rho in &ratios {
        let iglu = acc_of("IGLU(sigma=0.5)", rho);
        let relu = acc_of("ReLU", rho);
        observation.push_str(&format!(
            "rho={rho}: IGLU(0.5) {iglu:.3} vs ReLU {relu:.3} ({}); ",
            if iglu > relu { "IGLU ahead" } else { "ReLU ahead" }
        ));
    }
    report(
        12,
        "imbalance suite smoke",
        &format!("deterministic, all cells above chance {chance}; observed {observation}in {secs:.1}s"),
    );
}

#[test]
fn criterion_13_verify_all_exits_zero() {
    let _g = lock();
    let t = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_iglu"))
        .args(["verify", "all"])
        .output()
        .expect("spawn iglu");
    let secs = t.elapsed().as_secs_f64();
    assert!(
        out.status.success(),
        "verify all exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout)
    );
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["passed"], serde_json::json!(true));
    assert!(secs < 600.0, "took {secs:.1}s");
    report(13, "full suite", &format!("`iglu verify all` exited 0 in {secs:.1}s"));
}
