use serde_json::json;

use super::{Artifact, Cell, Outcome, RunConfig};
use crate::capacity::{
    eigentask_decomposition, gram_matrices, ipc_probability_rep, ipc_spectral, total_capacity, CapacityThreshold, Readout, TargetBasis,
    DEFAULT_RANK_TOLERANCE,
};
use crate::embed::verification_report;
use crate::experiments::{
    beta_threshold, classify_tail, detection_schedule, fat_shattering_lower_bound, noisy_shift_register, noisy_shift_register_ipc,
    power_basis_demo, sample_complexity_curve, scan_system_size, switching_family, switching_subset_class, Averaging, TailClass,
    TailShape, Thresholds, DEFAULT_NODE_BUDGET,
};
use crate::readout::probability_signals;
use crate::reservoir::{InputMeasure, Reservoir};
use crate::{Error, Result};

/// Computes the artifacts of one experiment.
pub fn compute(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.experiment.as_str() {
        "ipc" => ipc(cfg),
        "scan-n" => scan(cfg),
        "switching" => switching(cfg),
        "tails" => tails(cfg),
        "power-basis" => power_basis(cfg),
        "learnability" => learnability(cfg),
        "fat-shatter" => fat_shatter(cfg),
        "embed-check" => embed_check(cfg),
        other => Err(Error::UnknownExperiment(other.into())),
    }
}

/// The configured measure with its seed replaced by the run seed.
fn measure(cfg: &RunConfig, default: InputMeasure) -> InputMeasure {
    let mut m = cfg.measure.clone().unwrap_or(default);
    m.seed = cfg.seed;
    m
}

fn threshold(cfg: &RunConfig) -> CapacityThreshold {
    cfg.capacity_threshold.map_or(CapacityThreshold::Auto, CapacityThreshold::Fixed)
}

fn ipc(cfg: &RunConfig) -> Result<Outcome> {
    let spec = match &cfg.reservoir {
        Some(s) => s.clone(),
        None => noisy_shift_register(cfg.n.unwrap_or(3), cfg.noise.unwrap_or(0.05))?,
    };
    let res = Reservoir::new(spec)?;
    let m = measure(cfg, InputMeasure::uniform(-1.0, 1.0, 0)?);
    let max_delay = cfg.max_delay.unwrap_or(2);
    let max_degree = cfg.max_degree.unwrap_or(3);
    let steps = cfg.steps.unwrap_or(2000);
    let washout = cfg.washout.unwrap_or(max_delay.max(10));
    let readout = cfg.readout.unwrap_or(Readout::SingleShot);
    let tol = cfg.rank_tolerance.unwrap_or(DEFAULT_RANK_TOLERANCE);

    let inputs = m.sequence(steps, washout, 0);
    let signals = probability_signals(&res.run_exact(&inputs)?)?;
    let gram = gram_matrices(&signals, readout)?;
    let decomp = eigentask_decomposition(&gram.g1, &gram.g2, tol)?;
    let spectral = ipc_spectral(&decomp);
    let trace = ipc_probability_rep(&signals)?;
    let basis = TargetBasis::legendre(max_delay, max_degree, m.clone())?;
    let basis_sum = total_capacity(&signals, &basis, &inputs, readout, threshold(cfg))?;

    let mut checks_passed = spectral.ipc <= decomp.retained_rank as f64 + 1e-9 && basis_sum.terms.iter().all(|c| (0.0..=1.0).contains(c));
    if readout == Readout::SingleShot {
        checks_passed &= (spectral.ipc - trace.ipc).abs() < 1e-8;
    }
    let empirical = match cfg.shots {
        Some(shots) => {
            let freq = res.sample_frequencies(&inputs, shots, cfg.seed, cfg.lanes())?;
            let g = gram_matrices(&freq, readout)?;
            Some(ipc_spectral(&eigentask_decomposition(&g.g1, &g.g2, tol)?))
        }
        None => None,
    };

    let eig_rows = decomp
        .sigma_sq
        .iter()
        .zip(&spectral.terms)
        .enumerate()
        .map(|(k, (s, c))| vec![Cell::from(k), Cell::from(*s), Cell::from(*c)])
        .collect();
    let basis_rows = basis_sum
        .terms
        .iter()
        .enumerate()
        .map(|(k, c)| vec![Cell::from(basis.label(k)), Cell::from(*c), Cell::from(*c >= basis_sum.threshold.unwrap_or(0.0))])
        .collect();
    let summary = json!({
        "n": res.n(),
        "steps": steps,
        "washout": washout,
        "readout": readout,
        "spectral": spectral,
        "probability_trace": trace,
        "basis_sum": basis_sum,
        "empirical_spectral": empirical,
        "checks_passed": checks_passed,
    });
    Ok(Outcome {
        artifacts: vec![
            Artifact::json("ipc.json", &summary)?,
            Artifact::csv("eigentasks.csv", &["k", "sigma_sq", "capacity"], eig_rows),
            Artifact::csv("basis_capacities.csv", &["target", "capacity", "counted"], basis_rows),
        ],
        checks_passed,
    })
}

fn scan(cfg: &RunConfig) -> Result<Outcome> {
    let m = measure(cfg, InputMeasure::binary(0));
    let lambda = cfg.noise.unwrap_or(0.05);
    let ns = cfg.n_values.clone().unwrap_or_else(|| (2..=10).collect());
    let averaging = cfg.averaging.unwrap_or(Averaging::Enumerated { window: 0 });
    let curve = scan_system_size(&noisy_shift_register, &ns, lambda, &m, averaging)?;
    let rows = curve
        .n
        .iter()
        .zip(&curve.ipc)
        .zip(&curve.ipc_stderr)
        .map(|((n, v), e)| vec![Cell::from(*n), Cell::from(*v), Cell::from(*e), Cell::from(lambda)])
        .collect();
    let mut summary = serde_json::to_value(&curve).map_err(|e| Error::Format(e.to_string()))?;
    if m.kind == crate::reservoir::MeasureKind::IidUniformBinary {
        let analytic: Vec<f64> = ns.iter().map(|&n| noisy_shift_register_ipc(n, lambda)).collect();
        summary["analytic_ipc"] = json!(analytic);
    }
    Ok(Outcome {
        artifacts: vec![Artifact::csv("scaling.csv", &["n", "ipc", "ipc_stderr", "lambda"], rows), Artifact::json("scaling.json", &summary)?],
        checks_passed: true,
    })
}

fn switching(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.k.unwrap_or(4);
    let domain = cfg.domain.unwrap_or([0.0, 1.0]);
    let points = cfg.points.unwrap_or(201);
    let beta = match cfg.beta {
        Some(b) => b,
        None => beta_threshold(k.max(2), domain, cfg.peak_target.unwrap_or(0.99))?,
    };
    let exp_shape = TailShape::Exponential { beta };
    let exp = switching_family(exp_shape, k, domain, points)?;
    let poly = switching_family(exp_shape.matched_polynomial(), k, domain, points)?;
    let mut header: Vec<String> = vec!["u".into()];
    header.extend((0..k).map(|i| format!("exp_{i}")));
    header.extend((0..k).map(|i| format!("poly_{i}")));
    let rows = (0..points)
        .map(|g| {
            let mut row = vec![Cell::from(exp.grid[g])];
            row.extend(exp.signals.iter().map(|s| Cell::from(s[g])));
            row.extend(poly.signals.iter().map(|s| Cell::from(s[g])));
            row
        })
        .collect();
    let residual = exp.normalization_residual.max(poly.normalization_residual);
    let summary = json!({
        "k": k,
        "domain": domain,
        "beta": beta,
        "exponential": {"shape": exp.shape, "centers": exp.centers, "peaks": exp.peaks, "confusion": exp.confusion, "min_peak": exp.min_peak()},
        "polynomial": {"shape": poly.shape, "peaks": poly.peaks, "confusion": poly.confusion, "min_peak": poly.min_peak()},
        "peak_gap": exp.min_peak() - poly.min_peak(),
        "normalization_residual": residual,
    });
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    Ok(Outcome {
        artifacts: vec![Artifact::csv("switching.csv", &header, rows), Artifact::json("switching.json", &summary)?],
        checks_passed: residual < 1e-9,
    })
}

fn tails(cfg: &RunConfig) -> Result<Outcome> {
    let beta = cfg.beta.unwrap_or(1.0);
    let region = cfg.tail_region.unwrap_or([20.0, 50.0]);
    let points = cfg.points.unwrap_or(400);
    if points < 3 {
        return Err(Error::ConfigValidation("tails needs at least 3 points".into()));
    }
    let grid: Vec<f64> = (0..points).map(|i| region[0] + (region[1] - region[0]) * i as f64 / (points - 1) as f64).collect();
    let exp_shape = TailShape::Exponential { beta };
    let cases: Vec<(&str, Vec<f64>)> = vec![
        ("exponential-bump", grid.iter().map(|&r| exp_shape.bump(r, 0.0)).collect()),
        ("polynomial-bump", grid.iter().map(|&r| exp_shape.matched_polynomial().bump(r, 0.0)).collect()),
        ("u^2*2^-u", grid.iter().map(|&u| u * u * (-u).exp2()).collect()),
        ("u^-2", grid.iter().map(|&u| u.powi(-2)).collect()),
    ];
    let mut rows = Vec::new();
    let mut fits = serde_json::Map::new();
    for (name, values) in &cases {
        let fit = classify_tail(&grid, values, region)?;
        let (class, param) = match fit.class {
            TailClass::Polynomial { degree } => ("polynomial", degree),
            TailClass::Exponential { rate } => ("exponential", rate),
            TailClass::Inconclusive => ("inconclusive", f64::NAN),
        };
        rows.push(vec![Cell::from(*name), Cell::from(class), Cell::from(param), Cell::from(fit.polynomial.rss), Cell::from(fit.exponential.rss)]);
        fits.insert(name.to_string(), serde_json::to_value(&fit).map_err(|e| Error::Format(e.to_string()))?);
    }
    let summary = json!({"region": region, "points": points, "beta": beta, "fits": fits});
    Ok(Outcome {
        artifacts: vec![
            Artifact::csv("tails.csv", &["signal", "class", "parameter", "polynomial_rss", "exponential_rss"], rows),
            Artifact::json("tails.json", &summary)?,
        ],
        checks_passed: true,
    })
}

fn power_basis(cfg: &RunConfig) -> Result<Outcome> {
    let m = measure(cfg, InputMeasure::uniform(-1.0, 1.0, 0)?);
    let report = power_basis_demo(cfg.n.unwrap_or(3), cfg.steps.unwrap_or(100_000), &m)?;
    let sv = report.singular_values.iter().enumerate().map(|(i, s)| vec![Cell::from(i), Cell::from(*s)]).collect();
    let caps = report.capacity.terms.iter().enumerate().map(|(d, c)| vec![Cell::from(d), Cell::from(*c)]).collect();
    let passed = report.rank == report.expected_rank;
    Ok(Outcome {
        artifacts: vec![
            Artifact::json("power_basis.json", &report)?,
            Artifact::csv("singular_values.csv", &["index", "singular_value"], sv),
            Artifact::csv("power_capacities.csv", &["degree", "capacity"], caps),
        ],
        checks_passed: passed,
    })
}

fn learnability(cfg: &RunConfig) -> Result<Outcome> {
    let qs = cfg.q_values.clone().unwrap_or_else(|| vec![0.01, 0.1]);
    let grid = cfg.m0_grid.clone().unwrap_or_else(|| vec![1, 10, 100]);
    let trials = cfg.trials.unwrap_or(10_000);
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    let mut passed = true;
    for (i, &q) in qs.iter().enumerate() {
        let curve = sample_complexity_curve(q, &grid, trials, crate::rng::derive_seed(cfg.seed, &[i as u64]))?;
        for p in &curve.points {
            passed &= p.within_3sigma;
            rows.push(vec![
                Cell::from(q),
                Cell::from(p.m0),
                Cell::from(p.exact_all_zero),
                Cell::from(p.empirical_all_zero),
                Cell::from(p.sigma),
                Cell::from(p.within_3sigma),
                Cell::from(p.approximation),
                Cell::from(p.detection),
                Cell::from(p.discrepancy),
            ]);
        }
        curves.push(curve);
    }
    let ns = cfg.n_values.clone().unwrap_or_else(|| (8..=16).collect());
    let schedule = detection_schedule(&ns)?;
    let det_rows = schedule
        .iter()
        .map(|d| vec![Cell::from(d.n), Cell::from(d.q), Cell::from(d.m0), Cell::from(d.ln2_over_q), Cell::from(d.relative_deviation)])
        .collect();
    Ok(Outcome {
        artifacts: vec![
            Artifact::csv(
                "learnability.csv",
                &["q", "m0", "exact_all_zero", "empirical_all_zero", "sigma", "within_3sigma", "approximation", "detection", "discrepancy"],
                rows,
            ),
            Artifact::csv("detection.csv", &["n", "q", "m0", "ln2_over_q", "relative_deviation"], det_rows),
            Artifact::json("learnability.json", &json!({"curves": curves, "detection": schedule}))?,
        ],
        checks_passed: passed,
    })
}

fn fat_shatter(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.k.unwrap_or(4);
    let domain = cfg.domain.unwrap_or([0.0, 1.0]);
    let beta = match cfg.beta {
        Some(b) => b,
        None => beta_threshold(k.max(2), domain, cfg.peak_target.unwrap_or(0.99))?,
    };
    let family = switching_family(TailShape::Exponential { beta }, k, domain, cfg.points.unwrap_or(11))?;
    let class = switching_subset_class(&family);
    let thresholds = cfg.thresholds.clone().map_or(Thresholds::Search, Thresholds::Pinned);
    let result = fat_shattering_lower_bound(&class, cfg.gamma.unwrap_or(0.3), &thresholds, cfg.node_budget.unwrap_or(DEFAULT_NODE_BUDGET))?;
    let summary = json!({"k": k, "beta": beta, "class_size": class.len(), "thresholds": thresholds, "result": result});
    Ok(Outcome { artifacts: vec![Artifact::json("fat_shatter.json", &summary)?], checks_passed: result.verified })
}

fn embed_check(cfg: &RunConfig) -> Result<Outcome> {
    let report = verification_report(cfg.seed, cfg.random_cases.unwrap_or(100))?;
    let rows = report
        .checks
        .iter()
        .map(|c| vec![Cell::from(c.name.as_str()), Cell::from(c.residual), Cell::from(c.tolerance), Cell::from(c.pass)])
        .collect();
    let passed = report.all_pass();
    Ok(Outcome {
        artifacts: vec![Artifact::csv("embed.csv", &["check", "residual", "tolerance", "pass"], rows), Artifact::json("embed.json", &report)?],
        checks_passed: passed,
    })
}
