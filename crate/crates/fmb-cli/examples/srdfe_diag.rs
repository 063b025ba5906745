//! Diagnostic: SR-DFE bias decomposition under different noise placements.

use fmb_core::circuit::ConnectivityGraph;
use fmb_core::estimate::{
    build_srdfe_bundle, dfe_fidelity, estimate_p3_expectation, srdfe_fidelity,
};
use fmb_core::oracles::process_fidelity_oracle;
use fmb_core::sampler::{sample_fixed_density_circuit, FixedDensitySamplerConfig, QubitChoice};
use fmb_core::sim::frame::simulate_noisy_shots;
use fmb_core::sim::noise::ReadoutConfusion;
use fmb_core::sim::NoiseModel;
use fmb_core::stream;

fn main() {
    let w = 3usize;
    let cfg = FixedDensitySamplerConfig {
        connectivity: ConnectivityGraph::all_to_all(w),
        qubit_choice: QubitChoice::FirstW,
    };
    let mut rng = stream::derive(0xacc3, &[1]);
    let base = sample_fixed_density_circuit(w, 6, 1.0 / 3.0, &cfg, &mut rng).unwrap();
    println!("base circuit:\n{}", base);

    let cases = [
        ("e2 only      ", 0.0, 0.015, 0.0, 0.0),
        ("e1+e2        ", 0.002, 0.015, 0.0, 0.0),
        ("readout only ", 0.0, 0.0, 0.02, 0.01),
        ("full         ", 0.002, 0.015, 0.02, 0.01),
    ];
    let (k, shots) = (400usize, 20_000u64);
    for (name, e1, e2, p10, p01) in cases {
        let noise = NoiseModel::uniform(
            &(0..w).collect::<Vec<_>>(),
            e1,
            e2,
            ReadoutConfusion { p10, p01 },
        );
        let truth = process_fidelity_oracle(&base, &noise);
        let mut p3_main = Vec::new();
        let mut p3_ref = Vec::new();
        for j in 0..k {
            let mut brng = stream::derive(1000, &[j as u64, 1]);
            let bundle = build_srdfe_bundle(&base, &mut brng).unwrap();
            let mut erng = stream::derive(1000, &[j as u64, 2]);
            let counts =
                simulate_noisy_shots(&bundle.main.circuit, &noise, shots, &mut erng).unwrap();
            p3_main.push(estimate_p3_expectation(&counts, &bundle.main.p3).unwrap());
            let counts_ref =
                simulate_noisy_shots(&bundle.reference.circuit, &noise, shots, &mut erng).unwrap();
            p3_ref.push(estimate_p3_expectation(&counts_ref, &bundle.reference.p3).unwrap());
        }
        let gamma_ref = p3_ref.iter().sum::<f64>() / k as f64;
        let fnull = dfe_fidelity(gamma_ref, w);
        let ests: Vec<f64> = p3_main
            .iter()
            .map(|&g| srdfe_fidelity(dfe_fidelity(g, w), fnull, w).unwrap())
            .collect();
        let mean = ests.iter().sum::<f64>() / k as f64;
        let se = (ests.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (k * k) as f64)
            .sqrt();
        println!(
            "{}: oracle {:.5}  srdfe {:.5} +/- {:.5}  bias {:+.5}  (gamma_ref {:.5})",
            name,
            truth,
            mean,
            se,
            mean - truth,
            gamma_ref
        );
    }
}
