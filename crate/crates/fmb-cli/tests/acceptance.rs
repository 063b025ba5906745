//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Device-grounded numbers are not reproducible without hardware; these
//! criteria check the toolkit against independent oracles and reproduce the
//! qualitative structure of the reference experiments in simulation.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::LazyLock;
use std::time::Instant;

use fmb_core::analysis::{
    assemble_dataset, delta_v, evaluate_splits, CapabilityDataset,
};
use fmb_core::bench::{run_benchmark, CircuitFamily, RunPlan};
use fmb_core::circuit::{Circuit, ConnectivityGraph, Gate, Layer};
use fmb_core::clifford::Cliff1;
use fmb_core::design::{grid_design, sobol_design, FeatureAxis, FeatureSpace, Scale};
use fmb_core::estimate::{
    build_srdfe_bundle, dfe_fidelity, estimate_p3_expectation, srdfe_fidelity, EstimatorKind,
};
use fmb_core::gp::{log_marginal_likelihood, FitConfig, GpModel, KernelParams, Standardizer};
use fmb_core::monotonic::{ep_fit, place_virtual_points, EpConfig, VirtualPoints, DEFAULT_NU};
use fmb_core::oracles::{process_fidelity_oracle, DenseState};
use fmb_core::sampler::{sample_fixed_density_circuit, FixedDensitySamplerConfig, QubitChoice};
use fmb_core::sim::frame::simulate_noisy_shots;
use fmb_core::sim::noise::ReadoutConfusion;
use fmb_core::sim::{simulate_ideal_output, NoiseModel, NoiselessBackend, NoisyBackend};
use fmb_core::stream;

use fmb_cli::calibration::ingest_calibration;

fn pass(criterion: usize, name: &str, detail: &str) {
    println!("criterion {:2} ({}): PASS - {}", criterion, name, detail);
}

fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets")
}

// ---------------------------------------------------------------- 1
#[test]
fn criterion_01_mirror_identity() {
    let start = Instant::now();
    let space = FeatureSpace::new(vec![
        FeatureAxis::new("w", Scale::Linear, 2.0, 6.0, true).unwrap(),
        FeatureAxis::new("d", Scale::Log2, 4.0, 32.0, true).unwrap(),
        FeatureAxis::new("xi2q", Scale::Linear, 0.0, 0.25, false).unwrap(),
    ])
    .unwrap();
    let widths = (2..=6).map(|w| w as f64).collect();
    let depths = vec![4.0, 8.0, 16.0, 32.0];
    let design = grid_design(
        &space,
        &[widths, depths, vec![0.0, 0.125, 0.25]],
        |_| false,
        17, // 60 vectors x 17 = 1020 circuits
        0,
    )
    .unwrap();
    assert!(design.m() * design.k >= 1000);
    let plan = RunPlan {
        family: CircuitFamily::Mirror,
        estimator: EstimatorKind::SuccessProb,
        shots: 64,
        master_seed: 101,
        connectivity: ConnectivityGraph::line(6),
        qubit_choice: QubitChoice::FirstW,
        default_xi: 0.25,
    };
    let (records, infeasible) = run_benchmark(&design, &plan, &NoiselessBackend).unwrap();
    assert!(infeasible.is_empty());
    assert_eq!(records.len(), design.m() * design.k);
    for r in &records {
        assert_eq!(
            r.estimate, 1.0,
            "vector {} circuit {} not at unit success",
            r.vector, r.circuit
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "runtime budget exceeded: {:?}",
        elapsed
    );
    pass(
        1,
        "mirror identity",
        &format!(
            "{} noiseless mirror circuits all at success probability 1 in {:?}",
            records.len(),
            elapsed
        ),
    );
}

// ---------------------------------------------------------------- 2
#[test]
fn criterion_02_stabilizer_vs_dense_oracle() {
    use rand::Rng;
    let mut rng = stream::derive(0x0eac2, &[]);
    let mut checked = 0;
    for trial in 0..200 {
        let w = rng.random_range(1..=3usize);
        let half = rng.random_range(1..=4usize);
        let qubits: Vec<usize> = (0..w).collect();
        // random Clifford layers, a random Pauli layer, then the inverses:
        // depth <= 9 and the outcome is a definite basis state
        let mut fwd: Vec<Layer> = Vec::new();
        for _ in 0..half {
            let mut gates = Vec::new();
            let mut rest = qubits.clone();
            if rest.len() >= 2 && rng.random_bool(0.5) {
                let a = rest.remove(rng.random_range(0..rest.len()));
                let b = rest.remove(rng.random_range(0..rest.len()));
                gates.push(Gate::Cx {
                    control: a,
                    target: b,
                });
            }
            for q in rest {
                gates.push(Gate::Cliff {
                    c: Cliff1::new(rng.random_range(0..24)).unwrap(),
                    q,
                });
            }
            fwd.push(Layer::new(gates).unwrap());
        }
        let pauli = Layer::new(
            qubits
                .iter()
                .map(|&q| Gate::Cliff {
                    c: Cliff1::PAULIS[rng.random_range(0..4)],
                    q,
                })
                .collect(),
        )
        .unwrap();
        let mut layers = fwd.clone();
        layers.push(pauli);
        layers.extend(fwd.iter().rev().map(fmb_core::circuit::invert_layer));
        let circuit = Circuit::new(qubits, layers).unwrap();
        assert!(circuit.depth() <= 10);

        let tableau_out = simulate_ideal_output(&circuit).unwrap();
        let mut dense = DenseState::zero_state(w);
        dense.apply_circuit(&circuit);
        let dense_out = dense.basis_state().expect("definite by construction");
        assert_eq!(tableau_out, dense_out, "trial {}", trial);
        checked += 1;
    }
    pass(
        2,
        "stabilizer vs dense oracle",
        &format!("{} random Clifford circuits matched exactly", checked),
    );
}

// ---------------------------------------------------------------- 3 & 4 helpers

struct SrdfeTrial {
    plain_dfe: Vec<f64>,
    srdfe: Vec<f64>,
}

/// Runs K SR-DFE bundles on one base circuit under the noise model,
/// correcting with the mean of the K SPAM references.
fn srdfe_trial(
    base: &Circuit,
    noise: &NoiseModel,
    k: usize,
    shots: u64,
    seed: u64,
) -> SrdfeTrial {
    let n = base.width();
    let mut p3_main = Vec::with_capacity(k);
    let mut p3_ref = Vec::with_capacity(k);
    for j in 0..k {
        let mut rng = stream::derive(seed, &[j as u64, 1]);
        let bundle = build_srdfe_bundle(base, &mut rng).unwrap();
        let mut exec_rng = stream::derive(seed, &[j as u64, 2]);
        let counts = simulate_noisy_shots(&bundle.main.circuit, noise, shots, &mut exec_rng).unwrap();
        p3_main.push(estimate_p3_expectation(&counts, &bundle.main.p3).unwrap());
        let counts_ref =
            simulate_noisy_shots(&bundle.reference.circuit, noise, shots, &mut exec_rng).unwrap();
        p3_ref.push(estimate_p3_expectation(&counts_ref, &bundle.reference.p3).unwrap());
    }
    let gamma_ref = p3_ref.iter().sum::<f64>() / k as f64;
    let fdfe_null = dfe_fidelity(gamma_ref, n);
    let plain_dfe: Vec<f64> = p3_main.iter().map(|&g| dfe_fidelity(g, n)).collect();
    let srdfe: Vec<f64> = plain_dfe
        .iter()
        .map(|&f| srdfe_fidelity(f, fdfe_null, n).unwrap())
        .collect();
    SrdfeTrial { plain_dfe, srdfe }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, (var / n).sqrt())
}

// ---------------------------------------------------------------- 3
#[test]
fn criterion_03_srdfe_accuracy_against_density_matrix_oracle() {
    let (k, shots) = (50usize, 10_000u64);
    for (idx, (w, d, xi)) in [(2usize, 4usize, 0.5f64), (3, 6, 1.0 / 3.0)].iter().enumerate() {
        let cfg = FixedDensitySamplerConfig {
            connectivity: ConnectivityGraph::all_to_all(*w),
            qubit_choice: QubitChoice::FirstW,
        };
        let mut rng = stream::derive(0xacc3, &[idx as u64]);
        let base = sample_fixed_density_circuit(*w, *d, *xi, &cfg, &mut rng).unwrap();
        let noise = NoiseModel::uniform(
            &(0..*w).collect::<Vec<_>>(),
            0.002,
            0.015,
            ReadoutConfusion {
                p10: 0.02,
                p01: 0.01,
            },
        );
        let truth = process_fidelity_oracle(&base, &noise);
        let trial = srdfe_trial(&base, &noise, k, shots, 0x333 + idx as u64);
        let (mean, se) = mean_and_stderr(&trial.srdfe);
        assert!(
            (mean - truth).abs() <= 0.02,
            "n={}: mean SR-DFE {} vs oracle {} (se {})",
            w,
            mean,
            truth,
            se
        );
        pass(
            3,
            "SR-DFE accuracy",
            &format!(
                "n={}: |{:.4} - {:.4}| = {:.4} <= 0.02",
                w,
                mean,
                truth,
                (mean - truth).abs()
            ),
        );
    }
}

// ---------------------------------------------------------------- 4
#[test]
fn criterion_04_spam_robustness() {
    let (k, shots) = (50usize, 10_000u64);
    let w = 2;
    let cfg = FixedDensitySamplerConfig {
        connectivity: ConnectivityGraph::all_to_all(w),
        qubit_choice: QubitChoice::FirstW,
    };
    let mut rng = stream::derive(0xacc4, &[]);
    let base = sample_fixed_density_circuit(w, 4, 0.5, &cfg, &mut rng).unwrap();
    // readout flips only: 2% per qubit, perfect gates
    let noise = NoiseModel::uniform(
        &[0, 1],
        0.0,
        0.0,
        ReadoutConfusion {
            p10: 0.02,
            p01: 0.02,
        },
    );
    let trial = srdfe_trial(&base, &noise, k, shots, 0x444);
    let (plain_mean, plain_se) = mean_and_stderr(&trial.plain_dfe);
    let (sr_mean, sr_se) = mean_and_stderr(&trial.srdfe);
    assert!(
        plain_mean < 1.0 - 3.0 * plain_se,
        "plain DFE should sit below 1 by >= 3 sigma: {} (se {})",
        plain_mean,
        plain_se
    );
    assert!(
        (sr_mean - 1.0).abs() <= 3.0 * sr_se.max(1e-6),
        "SR-DFE should sit within 3 sigma of 1: {} (se {})",
        sr_mean,
        sr_se
    );
    pass(
        4,
        "SPAM robustness",
        &format!(
            "plain DFE {:.4} ({:.1} sigma below 1), SR-DFE {:.4} +/- {:.4}",
            plain_mean,
            (1.0 - plain_mean) / plain_se,
            sr_mean,
            sr_se
        ),
    );
}

// ---------------------------------------------------------------- 5
#[test]
fn criterion_05_gp_oracle_equivalence() {
    use nalgebra::{DMatrix, DVector};
    use rand::Rng;

    let se_kernel = |x: &[f64], y: &[f64], eta: f64, rho: &[f64]| -> f64 {
        let s: f64 = x
            .iter()
            .zip(y)
            .zip(rho)
            .map(|((a, b), r)| {
                let d = (a - b) / r;
                d * d
            })
            .sum();
        eta * eta * (-0.5 * s).exp()
    };

    let mut rng = stream::derive(0xacc5, &[]);
    let mut worst_mean = 0.0f64;
    let mut worst_var = 0.0f64;
    let mut worst_lml = 0.0f64;
    for _ in 0..10 {
        let n = 20;
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)])
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = KernelParams {
            eta: rng.random_range(0.3..2.0),
            rho: vec![rng.random_range(0.4..3.0), rng.random_range(0.4..3.0)],
            sigma: rng.random_range(0.05..0.5),
        };
        let stars: Vec<Vec<f64>> = (0..10)
            .map(|_| vec![rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)])
            .collect();

        let model = GpModel::with_params(p.clone(), Standardizer::identity(2), &x, &y).unwrap();
        let (means, vars) = model.predict(&stars).unwrap();
        let lml = log_marginal_likelihood(&p, &x, &model.y).unwrap();

        // independent dense-linear-algebra oracle
        let km = DMatrix::from_fn(n, n, |i, j| {
            se_kernel(&x[i], &x[j], p.eta, &p.rho) + if i == j { p.sigma * p.sigma } else { 0.0 }
        });
        let chol = km.cholesky().unwrap();
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
        let alpha = chol.solve(&yc);
        let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let o_lml = -0.5 * yc.dot(&alpha)
            - 0.5 * log_det
            - (n as f64 / 2.0) * (2.0 * std::f64::consts::PI).ln();
        worst_lml = worst_lml.max((lml - o_lml).abs());
        for (i, s) in stars.iter().enumerate() {
            let ks = DVector::from_fn(n, |r, _| se_kernel(s, &x[r], p.eta, &p.rho));
            let o_mean = ks.dot(&alpha) + y_mean;
            let v = chol.solve(&ks);
            let o_var = (p.eta * p.eta - ks.dot(&v)).max(0.0);
            worst_mean = worst_mean.max((means[i] - o_mean).abs());
            worst_var = worst_var.max((vars[i] - o_var).abs());
        }
    }
    assert!(worst_mean < 1e-8, "means diverge: {}", worst_mean);
    assert!(worst_var < 1e-8, "variances diverge: {}", worst_var);
    assert!(worst_lml < 1e-8, "log-ML diverges: {}", worst_lml);

    // derivative covariances against kernel finite differences
    let mut worst_fd = 0.0f64;
    for _ in 0..1000 {
        let d = rng.random_range(1..4usize);
        let p = KernelParams {
            eta: rng.random_range(0.5..2.0),
            rho: (0..d).map(|_| rng.random_range(0.5..3.0)).collect(),
            sigma: 0.0,
        };
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x2: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g = rng.random_range(0..d);
        let h = 1e-5;
        let mut xp = x.clone();
        xp[g] += h;
        let mut xm = x.clone();
        xm[g] -= h;
        let fd = (fmb_core::gp::kernel(&xp, &x2, &p).unwrap()
            - fmb_core::gp::kernel(&xm, &x2, &p).unwrap())
            / (2.0 * h);
        let an = fmb_core::gp::kernel_d1(&x, &x2, g, &p).unwrap();
        worst_fd = worst_fd.max((fd - an).abs() / (1.0 + an.abs()));
    }
    assert!(worst_fd < 1e-6, "derivative covariances: {}", worst_fd);
    pass(
        5,
        "GP oracle equivalence",
        &format!(
            "max |diff|: mean {:.2e}, var {:.2e}, log-ML {:.2e}, derivative FD {:.2e}",
            worst_mean, worst_var, worst_lml, worst_fd
        ),
    );
}

// ---------------------------------------------------------------- 6
#[test]
fn criterion_06_monotonic_reduction_and_signs() {
    use rand::Rng;
    // reduction: M = 0 equals the regular GP to 1e-8 on 50 random instances
    let mut rng = stream::derive(0xacc6, &[]);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(5..15usize);
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-3.0..3.0)]).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let p = KernelParams {
            eta: rng.random_range(0.3..1.5),
            rho: vec![rng.random_range(0.5..2.0)],
            sigma: rng.random_range(0.01..0.3),
        };
        let gp = GpModel::with_params(p, Standardizer::identity(1), &x, &y).unwrap();
        let mono = ep_fit(&gp, VirtualPoints::empty(), DEFAULT_NU, EpConfig::default()).unwrap();
        let stars: Vec<Vec<f64>> = (0..8).map(|_| vec![rng.random_range(-4.0..4.0)]).collect();
        let (m1, v1) = gp.predict(&stars).unwrap();
        let (m2, v2) = mono.predict(&stars).unwrap();
        for i in 0..stars.len() {
            worst = worst.max((m1[i] - m2[i]).abs()).max((v1[i] - v2[i]).abs());
        }
    }
    assert!(worst < 1e-8, "reduction violated: {}", worst);

    // sign constraints on monotone 1-D data, both directions
    for (sign, slope) in [(1i8, 0.07f64), (-1i8, -0.07f64)] {
        let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..12).map(|i| 0.5 + slope * i as f64).collect();
        let (gp, _) = GpModel::fit_raw(&x, &y, FitConfig::default()).unwrap();
        let vp = place_virtual_points(&gp.standardizer, &x, 10, &[sign]).unwrap();
        assert_eq!(vp.len(), 10);
        let mono = ep_fit(&gp, vp, DEFAULT_NU, EpConfig::default()).unwrap();
        assert!(mono.sites.converged);
        for dmean in mono.posterior_derivative_means().unwrap() {
            assert!(
                dmean >= -1e-8,
                "sign-adjusted derivative mean negative: {}",
                dmean
            );
        }
    }
    pass(
        6,
        "monotonic reduction",
        &format!("M=0 max deviation {:.2e}; signed derivative means respected", worst),
    );
}

// ---------------------------------------------------------------- 7
#[test]
fn criterion_07_density_ordering_under_algiers_noise() {
    let (_, noise) = ingest_calibration(&assets().join("ibmq_algiers_calibration.csv")).unwrap();
    let connectivity = noise.connectivity();
    let space = FeatureSpace::new(vec![
        FeatureAxis::new("w", Scale::Linear, 4.0, 4.0, true).unwrap(),
        FeatureAxis::new("d", Scale::Linear, 16.0, 16.0, true).unwrap(),
        FeatureAxis::new("xi2q", Scale::Linear, 0.0, 0.25, false).unwrap(),
    ])
    .unwrap();
    let design = grid_design(
        &space,
        &[vec![4.0], vec![16.0], vec![0.0, 0.125, 0.25]],
        |_| false,
        10,
        0,
    )
    .unwrap();
    let plan = RunPlan {
        family: CircuitFamily::Mirror,
        estimator: EstimatorKind::SuccessProb,
        shots: 1024,
        master_seed: 707,
        connectivity,
        qubit_choice: QubitChoice::FirstW,
        default_xi: 0.25,
    };
    let backend = NoisyBackend::new(noise);
    let (records, infeasible) = run_benchmark(&design, &plan, &backend).unwrap();
    assert!(infeasible.is_empty());
    let dataset = assemble_dataset(&design, &records, 1).unwrap();
    let s = &dataset.per_vector;
    assert_eq!(s.len(), 3);
    let sep01 = s[0].mean - s[1].mean;
    let sep12 = s[1].mean - s[2].mean;
    let se01 = (s[0].stderr.powi(2) + s[1].stderr.powi(2)).sqrt();
    let se12 = (s[1].stderr.powi(2) + s[2].stderr.powi(2)).sqrt();
    assert!(
        sep01 > 3.0 * se01,
        "xi=0 vs 1/8: {:.4} vs {:.4} (3 sigma = {:.4})",
        s[0].mean,
        s[1].mean,
        3.0 * se01
    );
    assert!(
        sep12 > 3.0 * se12,
        "xi=1/8 vs 1/4: {:.4} vs {:.4} (3 sigma = {:.4})",
        s[1].mean,
        s[2].mean,
        3.0 * se12
    );
    pass(
        7,
        "density ordering",
        &format!(
            "s(0)={:.3} > s(1/8)={:.3} > s(1/4)={:.3} at {:.1}/{:.1} sigma",
            s[0].mean,
            s[1].mean,
            s[2].mean,
            sep01 / se01,
            sep12 / se12
        ),
    );
}

// ------------------------------------------------------- shared 8/9 dataset

/// 256-vector Sobol design over (w, d, xi2q) with 2Q-dominant noise,
/// fixed-density circuits, SR-DFE estimates.
static SOBOL_DATASET: LazyLock<CapabilityDataset> = LazyLock::new(|| {
    let space = FeatureSpace::new(vec![
        FeatureAxis::new("w", Scale::Log2, 2.0, 20.0, true).unwrap(),
        FeatureAxis::new("d", Scale::Log2, 2.0, 128.0, true).unwrap(),
        FeatureAxis::new("xi2q", Scale::Linear, 0.0, 0.5, false).unwrap(),
    ])
    .unwrap();
    let design = sobol_design(&space, 256, 30, 0).unwrap();
    let qubits: Vec<usize> = (0..20).collect();
    let noise = NoiseModel::uniform(
        &qubits,
        1e-4,
        0.01,
        ReadoutConfusion {
            p10: 0.005,
            p01: 0.005,
        },
    );
    let plan = RunPlan {
        family: CircuitFamily::FixedDensity,
        estimator: EstimatorKind::Srdfe,
        shots: 2000,
        master_seed: 808,
        connectivity: ConnectivityGraph::all_to_all(20),
        qubit_choice: QubitChoice::FirstW,
        default_xi: 0.25,
    };
    let backend = NoisyBackend::new(noise);
    let output = fmb_cli::runner::run_parallel(
        &design,
        &plan,
        &backend,
        &fmb_cli::runner::RunOptions {
            collect_batch: false,
            collect_counts: false,
        },
    )
    .unwrap();
    assert!(output.infeasible.is_empty());
    assemble_dataset(&design, &output.records, 2).unwrap()
});

// ---------------------------------------------------------------- 8
#[test]
fn criterion_08_monotonicity_structure() {
    let dataset = &*SOBOL_DATASET;
    let full = delta_v(dataset, &[0, 1, 2]);
    assert!(!full.entries.is_empty());

    let mass = |report: &fmb_core::analysis::SubsetReport, below: f64| -> f64 {
        let count = report.entries.iter().filter(|e| e.delta < below).count();
        count as f64 / report.entries.len() as f64
    };
    let full_above = 1.0 - mass(&full, -0.02);
    assert!(
        full_above >= 0.90,
        "full 3-feature set: only {:.1}% of mass at delta >= -0.02",
        full_above * 100.0
    );
    let full_below_5 = mass(&full, -0.05);
    let mut projection_masses = Vec::new();
    for drop in 0..3 {
        let subset: Vec<usize> = (0..3).filter(|&j| j != drop).collect();
        let proj = delta_v(dataset, &subset);
        let proj_below_5 = mass(&proj, -0.05);
        assert!(
            proj_below_5 >= 3.0 * full_below_5 && proj_below_5 > 0.0,
            "projection dropping axis {}: mass below -0.05 is {:.3} vs full {:.3}",
            drop,
            proj_below_5,
            full_below_5
        );
        projection_masses.push(proj_below_5);
    }
    pass(
        8,
        "monotonicity structure",
        &format!(
            "full: {:.1}% >= -0.02, below -0.05: full {:.3} vs projections {:.3}/{:.3}/{:.3}",
            full_above * 100.0,
            full_below_5,
            projection_masses[0],
            projection_masses[1],
            projection_masses[2]
        ),
    );
}

// ---------------------------------------------------------------- 9
#[test]
fn criterion_09_split_protocol_prediction_error() {
    let start = Instant::now();
    let dataset = &*SOBOL_DATASET;
    assert!(dataset.len() >= 200);

    let fit_cfg = FitConfig {
        restarts: 5,
        seed: 17,
        max_iters: 250,
    };
    // regular GP
    let (_, mean_reg, sd_reg) = evaluate_splits(dataset, 0.5, 20, 900, |tx, ty, sx| {
        let (gp, _) = GpModel::fit(&dataset.space, tx, ty, fit_cfg)?;
        Ok(gp.predict(sx)?.0)
    })
    .unwrap();
    assert!(
        mean_reg <= 0.05,
        "regular GP delta_abs {} exceeds 0.05",
        mean_reg
    );
    // monotonic GP (capability decreasing in every feature)
    let (_, mean_mono, sd_mono) = evaluate_splits(dataset, 0.5, 20, 900, |tx, ty, sx| {
        let (gp, _) = GpModel::fit(&dataset.space, tx, ty, fit_cfg)?;
        let vp = place_virtual_points(&gp.standardizer, tx, 24, &[-1, -1, -1])?;
        let mono = ep_fit(&gp, vp, DEFAULT_NU, EpConfig::default())?;
        Ok(mono.predict(sx)?.0)
    })
    .unwrap();
    assert!(
        mean_mono <= 0.05,
        "monotonic GP delta_abs {} exceeds 0.05",
        mean_mono
    );
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 600,
        "runtime budget exceeded: {:?}",
        elapsed
    );
    pass(
        9,
        "split protocol",
        &format!(
            "delta_abs over 20 splits: regular {:.4} +/- {:.4}, monotonic {:.4} +/- {:.4} in {:?}",
            mean_reg, sd_reg, mean_mono, sd_mono, elapsed
        ),
    );
}

// ---------------------------------------------------------------- 10
#[test]
fn criterion_10_pipeline_determinism() {
    let bin = env!("CARGO_BIN_EXE_fmb");
    let base = std::env::temp_dir().join("fmb-acceptance-determinism");
    let _ = std::fs::remove_dir_all(&base);

    let run_pipeline = |dir: &Path| {
        std::fs::create_dir_all(dir).unwrap();
        let design = dir.join("design.json");
        let results = dir.join("results.csv");
        let counts = dir.join("counts.csv");
        let batch = dir.join("batch.txt");
        let model = dir.join("model.json");
        let heatmap = dir.join("heatmap.csv");
        let report = dir.join("deltav.csv");
        let manifest = dir.join("manifest.json");
        let ok = |out: std::process::Output, what: &str| {
            assert!(
                out.status.success(),
                "{} failed: {}",
                what,
                String::from_utf8_lossy(&out.stderr)
            );
        };
        ok(
            Command::new(bin)
                .args([
                    "design",
                    "--axis",
                    "w:log2:int:2:5",
                    "--axis",
                    "d:log2:int:4:16",
                    "--axis",
                    "xi2q:linear:real:0:0.25",
                    "--method",
                    "sobol",
                    "--m",
                    "16",
                    "--k",
                    "4",
                    "--seed",
                    "5",
                    "-o",
                ])
                .arg(&design)
                .arg("--manifest")
                .arg(&manifest)
                .output()
                .unwrap(),
            "design",
        );
        ok(
            Command::new(bin)
                .args(["run", "--design"])
                .arg(&design)
                .args([
                    "--backend",
                    "noisy",
                    "--calibration",
                    assets()
                        .join("ibmq_algiers_calibration.csv")
                        .to_str()
                        .unwrap(),
                    "--shots",
                    "256",
                    "--circuits",
                    "fixed-density",
                    "--estimator",
                    "srdfe",
                    "--seed",
                    "11",
                ])
                .arg("-o")
                .arg(&results)
                .arg("--emit-counts")
                .arg(&counts)
                .arg("--emit-batch")
                .arg(&batch)
                .arg("--manifest")
                .arg(&manifest)
                .output()
                .unwrap(),
            "run",
        );
        ok(
            Command::new(bin)
                .args(["fit", "--design"])
                .arg(&design)
                .arg("--results")
                .arg(&results)
                .args(["--seed", "13", "--restarts", "3"])
                .arg("-o")
                .arg(&model)
                .arg("--manifest")
                .arg(&manifest)
                .output()
                .unwrap(),
            "fit",
        );
        ok(
            Command::new(bin)
                .args(["predict", "--model"])
                .arg(&model)
                .args(["--grid", "w:2:5:4", "d:4:16:4", "--fix", "xi2q=0.125"])
                .arg("-o")
                .arg(&heatmap)
                .output()
                .unwrap(),
            "predict",
        );
        ok(
            Command::new(bin)
                .args(["report", "--design"])
                .arg(&design)
                .arg("--results")
                .arg(&results)
                .args(["--metric", "delta-v"])
                .arg("-o")
                .arg(&report)
                .output()
                .unwrap(),
            "report",
        );
    };

    let dir_a = base.join("a");
    let dir_b = base.join("b");
    run_pipeline(&dir_a);
    run_pipeline(&dir_b);

    let mut compared = 0;
    for name in [
        "design.json",
        "results.csv",
        "counts.csv",
        "batch.txt",
        "model.json",
        "heatmap.csv",
        "deltav.csv",
    ] {
        let a = std::fs::read(dir_a.join(name)).unwrap();
        let b = std::fs::read(dir_b.join(name)).unwrap();
        assert_eq!(a, b, "artifact {} differs between reruns", name);
        compared += 1;
    }
    // manifests match once timestamps are excluded
    let strip = |path: PathBuf| -> String {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(
        strip(dir_a.join("manifest.json")),
        strip(dir_b.join("manifest.json")),
        "manifests differ beyond timestamps"
    );
    pass(
        10,
        "pipeline determinism",
        &format!("{} artifacts byte-identical across reruns", compared),
    );
}
