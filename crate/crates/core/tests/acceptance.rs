//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Failing criteria are reported but only fail the process with
//! `ACCEPTANCE_STRICT=1`, so a plain `cargo test --workspace` still runs the
//! targets after this one.

mod common;

use std::time::Instant;

use rand::Rng;
use stochres_core::capacity::{
    capacity, capacity_with_readout, eigentask_decomposition, gram_matrices, ipc_probability_rep, ipc_spectral, total_capacity,
    CapacityThreshold, Readout, TargetBasis, DEFAULT_RANK_TOLERANCE,
};
use stochres_core::embed::{channel_paths, correlated_flip_check, random_qubit, rate_convergence_order, bernoulli_channel, rotation_pair, verify_rate_relation, DensityMatrix};
use stochres_core::experiments::{
    beta_threshold, detection_schedule, fat_shattering_lower_bound, noisy_shift_register, power_basis_demo, sample_complexity_curve,
    scan_system_size, switching_family, switching_subset_class, verify_witness, Averaging, TailShape, Thresholds, DEFAULT_NODE_BUDGET,
};
use stochres_core::quadrature::gauss_legendre;
use stochres_core::readout::{probability_signals, superset_moebius, superset_zeta};
use stochres_core::reservoir::{DriveFn, InputMeasure, InputSequence, Reservoir, ReservoirSpec, StochasticGate};
use stochres_core::runner::{run_experiment, RunConfig, MANIFEST_NAME};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_method_agreement() -> Check {
    let mut r = common::rng(101);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let n = 1 + case % 6;
        let res = Reservoir::new(common::random_reservoir(&mut r, n)).map_err(|e| e.to_string())?;
        let m = InputMeasure::uniform(-1.0, 1.0, case as u64).unwrap();
        let s = probability_signals(&res.run_exact(&m.sequence(400, 20, 0)).map_err(|e| e.to_string())?).unwrap();
        let g = gram_matrices(&s, Readout::SingleShot).unwrap();
        let spec = ipc_spectral(&eigentask_decomposition(&g.g1, &g.g2, DEFAULT_RANK_TOLERANCE).map_err(|e| e.to_string())?);
        let trace = ipc_probability_rep(&s).unwrap();
        worst = worst.max((spec.ipc - trace.ipc).abs());
    }
    ensure(worst < 1e-8, format!("50 reservoirs, n <= 6, max |spectral - trace| = {worst:.2e}"))
}

fn c2_bounds() -> Check {
    let mut r = common::rng(202);
    let mut cases = 0usize;
    let mut bad = Vec::new();
    let in_unit = |c: f64| (0.0..=1.0).contains(&c);
    for i in 0..120 {
        let n = 1 + i % 4;
        let res = Reservoir::new(common::random_reservoir(&mut r, n)).map_err(|e| e.to_string())?;
        let m = InputMeasure::uniform(-1.0, 1.0, i as u64).unwrap();
        let inputs = m.sequence(300, 4, 0);
        let s = probability_signals(&res.run_exact(&inputs).unwrap()).unwrap();
        let d = s.cols() as f64;
        for readout in [Readout::Noiseless, Readout::SingleShot, Readout::Shots(10)] {
            let g = gram_matrices(&s, readout).unwrap();
            let e = eigentask_decomposition(&g.g1, &g.g2, DEFAULT_RANK_TOLERANCE).unwrap();
            let ipc = ipc_spectral(&e).ipc;
            cases += 1;
            if !(ipc <= e.retained_rank as f64 + 1e-9 && ipc <= d + 1e-9 && ipc >= 0.0) {
                bad.push(format!("spectral ipc {ipc} rank {}", e.retained_rank));
            }
        }
        let basis = TargetBasis::legendre(2, 2, m.clone()).unwrap();
        for readout in [Readout::Noiseless, Readout::SingleShot] {
            let rep = total_capacity(&s, &basis, &inputs, readout, CapacityThreshold::Auto).unwrap();
            cases += 1;
            if !(rep.ipc <= d + 1e-9 && rep.terms.iter().all(|c| in_unit(*c))) {
                bad.push(format!("basis sum {} with d = {d}", rep.ipc));
            }
        }
        for _ in 0..4 {
            let y: Vec<f64> = (0..s.rows()).map(|_| r.gen_range(-1.0..1.0)).collect();
            for rep in [capacity(&s, &y), capacity_with_readout(&s, &y, Readout::SingleShot, CapacityThreshold::Auto)] {
                let c = rep.map_err(|e| e.to_string())?.capacity;
                cases += 1;
                if !in_unit(c) {
                    bad.push(format!("capacity {c}"));
                }
            }
        }
    }
    ensure(cases >= 1000 && bad.is_empty(), format!("{cases} cases, {} violations{}", bad.len(), bad.first().map(|b| format!(", first: {b}")).unwrap_or_default()))
}

fn linear_bit_signals() -> stochres_core::readout::SignalMatrix {
    let (x, w) = gauss_legendre(64);
    let spec = ReservoirSpec::new(1, vec![StochasticGate::set_bit(0, DriveFn::linear(1.0))]);
    let res = Reservoir::new(spec).unwrap();
    let dists = res.run_exact(&InputSequence::scalar(x, 0).unwrap()).unwrap();
    probability_signals(&dists).unwrap().with_weights(w).unwrap()
}

fn c3_anchor() -> Check {
    let s = linear_bit_signals();
    let g = gram_matrices(&s, Readout::SingleShot).unwrap();
    let e = eigentask_decomposition(&g.g1, &g.g2, DEFAULT_RANK_TOLERANCE).map_err(|e| e.to_string())?;
    let ipc = ipc_spectral(&e).ipc;
    let g1_err = [(0, 0, 1.0 / 3.0), (0, 1, 1.0 / 6.0), (1, 1, 1.0 / 3.0)].iter().map(|&(i, j, v)| (g.g1[(i, j)] - v).abs()).fold(0.0, f64::max);
    let ok = e.sigma_sq.len() == 2 && (e.sigma_sq[0]).abs() < 1e-3 && (e.sigma_sq[1] - 2.0).abs() < 1e-3 && (ipc - 4.0 / 3.0).abs() < 1e-3;
    ensure(ok && g1_err < 1e-12, format!("sigma^2 = {:?}, IPC = {ipc:.12}, G1 error {g1_err:.1e}", e.sigma_sq))
}

fn c4_scaling() -> Check {
    let m = InputMeasure::uniform(-1.0, 1.0, 4).unwrap();
    let pb = power_basis_demo(3, 100_000, &m).map_err(|e| e.to_string())?;
    let a = pb.rank == 8 && (pb.capacity.ipc - 8.0).abs() <= 0.05;
    let ns: Vec<usize> = (2..=10).collect();
    let curve = scan_system_size(&noisy_shift_register, &ns, 0.05, &InputMeasure::binary(0), Averaging::Enumerated { window: 0 })
        .map_err(|e| e.to_string())?;
    let f = curve.exponential_fit;
    let b = curve.ratio_decreasing && f.slope < std::f64::consts::LN_2 - 3.0 * f.slope_stderr;
    ensure(
        a && b,
        format!(
            "(a) rank {} capacity {:.4}; (b) IPC/2^n decreasing: {}, slope {:.4} +- {:.4} vs ln2 {:.4}",
            pb.rank, pb.capacity.ipc, curve.ratio_decreasing, f.slope, f.slope_stderr, std::f64::consts::LN_2
        ),
    )
}

fn c5_uniform_noise() -> Check {
    let ns: Vec<usize> = (1..=10).collect();
    let mut worst = 0.0f64;
    for measure in [InputMeasure::binary(0), InputMeasure::uniform(-1.0, 1.0, 5).unwrap()] {
        let averaging = if measure.atoms().is_some() { Averaging::Enumerated { window: 0 } } else { Averaging::Sampled { steps: 500, washout: 12, blocks: 5 } };
        let c = scan_system_size(&noisy_shift_register, &ns, 0.5, &measure, averaging).map_err(|e| e.to_string())?;
        worst = c.ipc.iter().map(|v| (v - 1.0).abs()).fold(worst, f64::max);
    }
    ensure(worst <= 1e-9, format!("n = 1..10, max |IPC - 1| = {worst:.2e}"))
}

fn c6_switching() -> Check {
    let beta = beta_threshold(4, [0.0, 1.0], 0.99).map_err(|e| e.to_string())?;
    let shape = TailShape::Exponential { beta };
    let exp = switching_family(shape, 4, [0.0, 1.0], 1001).unwrap();
    let poly = switching_family(shape.matched_polynomial(), 4, [0.0, 1.0], 1001).unwrap();
    let residual = exp.normalization_residual.max(poly.normalization_residual);
    let gap = exp.min_peak() - poly.min_peak();
    ensure(
        exp.min_peak() >= 0.99 && gap >= 0.05 && residual < 1e-9,
        format!(
            "beta = {beta:.3}: exponential min peak {:.4}, matched polynomial {:.4}, gap {gap:.4} (need >= 0.05), residual {residual:.1e}",
            exp.min_peak(),
            poly.min_peak()
        ),
    )
}

fn c7_learnability() -> Check {
    let mut exact_err = 0.0f64;
    let mut outside = Vec::new();
    for (i, q) in [0.01, 0.1].into_iter().enumerate() {
        let curve = sample_complexity_curve(q, &[1, 10, 100], 10_000, 700 + i as u64).map_err(|e| e.to_string())?;
        for p in &curve.points {
            let direct = (0..p.m0).fold(1.0, |acc, _| acc * (1.0 - q));
            exact_err = exact_err.max((p.exact_all_zero - direct).abs());
            if !p.within_3sigma {
                outside.push((q, p.m0));
            }
        }
    }
    let schedule = detection_schedule(&(8..=16).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
    let off: Vec<String> = schedule
        .iter()
        .filter(|d| d.relative_deviation.abs() > 0.05)
        .map(|d| format!("n={} m0={} ln2/q={:.2} ({:+.1}%)", d.n, d.m0, d.ln2_over_q, 100.0 * d.relative_deviation))
        .collect();
    ensure(
        exact_err < 1e-12 && outside.is_empty() && off.is_empty(),
        format!("exact error {exact_err:.1e}; outside 3 sigma: {outside:?}; m0 off ln2/q by > 5%: {off:?}"),
    )
}

fn c8_shattering() -> Check {
    let single = fat_shattering_lower_bound(&[vec![0.4, 0.7]], 0.1, &Thresholds::Search, DEFAULT_NODE_BUDGET).map_err(|e| e.to_string())?;
    let pair = fat_shattering_lower_bound(&[vec![0.0], vec![1.0]], 0.4, &Thresholds::Search, DEFAULT_NODE_BUDGET).map_err(|e| e.to_string())?;
    let beta = beta_threshold(4, [0.0, 1.0], 0.99).unwrap();
    let family = switching_family(TailShape::Exponential { beta }, 4, [0.0, 1.0], 11).unwrap();
    let class = switching_subset_class(&family);
    let pinned = fat_shattering_lower_bound(&class, 0.3, &Thresholds::Pinned(vec![0.5; 4]), DEFAULT_NODE_BUDGET).map_err(|e| e.to_string())?;
    let searched = fat_shattering_lower_bound(&class, 0.3, &Thresholds::Search, DEFAULT_NODE_BUDGET).map_err(|e| e.to_string())?;
    let verified = verify_witness(&[vec![0.4, 0.7]], &single.witness)
        && verify_witness(&[vec![0.0], vec![1.0]], &pair.witness)
        && verify_witness(&class, &pinned.witness)
        && verify_witness(&class, &searched.witness);
    ensure(
        single.d == 0 && pair.d == 1 && pinned.d >= 2 && searched.d >= 2 && verified,
        format!("singleton d={}, {{0,1}} d={}, switching K=4 d={} (pinned t=0.5) / {} (searched); witnesses re-verified: {verified}", single.d, pair.d, pinned.d, searched.d),
    )
}

fn c9_embedding() -> Check {
    let zero = DensityMatrix::basis(1, 0).unwrap();
    let mut diag = 0.0f64;
    for p in [0.0, 0.25, 0.5, 1.0] {
        let pops = bernoulli_channel(p, &zero).map_err(|e| e.to_string())?.populations();
        diag = diag.max((pops[0] - p).abs()).max((pops[1] - (1.0 - p)).abs());
        diag = diag.max(rotation_pair(p).unwrap().unitarity_residual());
    }
    let mut r = common::rng(909);
    let mut paths = 0.0f64;
    for _ in 0..100 {
        let p: f64 = r.gen();
        let rho = random_qubit(&mut r).unwrap();
        paths = paths.max(channel_paths(p, &rho).unwrap().residual);
    }
    let (devs, order) = rate_convergence_order(&[1e-2, 5e-3, 2.5e-3, 1.25e-3]).unwrap();
    let steps = 13_000;
    let path: Vec<f64> = (0..=steps).map(|i| (0.1 + i as f64 * 1e-4).cos().powi(2)).collect();
    let fine = verify_rate_relation(&path, 1e-4).unwrap().max_relative_deviation;
    let mut leak = 0.0f64;
    for theta in [0.0, 0.3, std::f64::consts::FRAC_PI_6, 1.0, std::f64::consts::FRAC_PI_2] {
        leak = leak.max(correlated_flip_check(theta).unwrap().leak);
    }
    ensure(
        diag <= 1e-12 && paths <= 1e-12 && (order - 2.0).abs() < 0.1 && fine < 1e-6 && leak <= 1e-12,
        format!(
            "diagonal {diag:.1e}, direct vs vectorized {paths:.1e}, rate order {order:.3} (deviations {:.1e}..{:.1e}), dt=1e-4 deviation {fine:.1e}, |01>,|10> leak {leak:.1e}",
            devs[0],
            devs[devs.len() - 1]
        ),
    )
}

fn c10_transforms() -> Check {
    let mut r = common::rng(1010);
    let (mut round, mut brute) = (0.0f64, 0.0f64);
    for case in 0..100 {
        let n = 1 + case % 12;
        let raw: Vec<f64> = (0..1usize << n).map(|_| r.gen()).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let mut m = p.clone();
        superset_zeta(&mut m);
        for (s, v) in m.iter().enumerate() {
            let direct: f64 = p.iter().enumerate().filter(|(k, _)| k & s == s).map(|(_, x)| x).sum();
            brute = brute.max((v - direct).abs());
        }
        superset_moebius(&mut m);
        round = m.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(round, f64::max);
    }
    ensure(round < 1e-12 && brute < 1e-12, format!("100 random distributions, n <= 12: round trip {round:.1e}, vs enumeration {brute:.1e}"))
}

fn c11_reproducible() -> Check {
    let base = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut configs = [
        RunConfig::from_json(r#"{"experiment": "ipc", "n": 4, "steps": 600, "shots": 200, "seed": 11}"#).unwrap(),
        RunConfig::from_json(r#"{"experiment": "scan-n", "n_values": [2, 3, 4, 5, 6, 7, 8], "seed": 11}"#).unwrap(),
        RunConfig::from_json(r#"{"experiment": "learnability", "trials": 2000, "seed": 11}"#).unwrap(),
    ];
    let mut compared = 0;
    let mut differing = Vec::new();
    for cfg in configs.iter_mut() {
        let mut runs = Vec::new();
        for threads in [1, 8] {
            cfg.threads = Some(threads);
            let dir = base.path().join(format!("{}-{threads}", cfg.experiment));
            run_experiment(cfg, Some(&dir)).map_err(|e| e.to_string())?;
            runs.push(dir);
        }
        for entry in std::fs::read_dir(&runs[0]).unwrap() {
            let name = entry.unwrap().file_name();
            if name == MANIFEST_NAME {
                continue;
            }
            compared += 1;
            if std::fs::read(runs[0].join(&name)).unwrap() != std::fs::read(runs[1].join(&name)).unwrap() {
                differing.push(name.to_string_lossy().into_owned());
            }
        }
    }
    ensure(differing.is_empty() && compared > 0, format!("{compared} CSV/JSON artifacts compared at 1 vs 8 threads; differing: {differing:?}"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Check);
    let criteria: [Criterion; 11] = [
        ("method agreement", c1_method_agreement),
        ("bound suite", c2_bounds),
        ("closed-form anchor", c3_anchor),
        ("deterministic exponential vs noisy polynomial", c4_scaling),
        ("uniform-noise limit", c5_uniform_noise),
        ("switching signals", c6_switching),
        ("learnability curve", c7_learnability),
        ("fat-shattering brute force", c8_shattering),
        ("embedding checks", c9_embedding),
        ("transform correctness", c10_transforms),
        ("reproducibility", c11_reproducible),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {:>2}  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {:>2}  {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    println!("acceptance: {} passed, {failed} failed{}", criteria.len() - failed, if strict { "" } else { " (ACCEPTANCE_STRICT=1 turns failures into a non-zero exit)" });
    if failed > 0 && strict {
        std::process::exit(1);
    }
}
