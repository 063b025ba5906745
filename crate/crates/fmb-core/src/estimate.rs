//! Capability estimators: success probability for definite-outcome circuits
//! and SPAM-robust direct fidelity estimation (SR-DFE) for Clifford circuits.
//!
//! An SR-DFE bundle wraps a base circuit between a state-preparation layer
//! (preparing an eigenstate of a random non-identity Pauli P1) and a
//! measurement layer (rotating P2 = U P1 U^dag into a Z-type observable P3).
//! A paired reference bundle built around the depth-0 circuit measures the
//! effective SPAM fidelity, which is divided out in process-polarization
//! space.
//!
//! Because P1 excludes the identity, the mean of the measured <P3> values
//! estimates the process *polarization*; `dfe_fidelity` converts it to
//! fidelity space, where the polarization-ratio correction of
//! `srdfe_fidelity` applies.

use alloc::vec::Vec;

use rand::seq::IteratorRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Gate, Layer};
use crate::clifford::Cliff1;
use crate::sim::{conjugate_pauli, Counts, PauliOperator, SimError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("estimators need at least one shot")]
    NoShots,
    #[error("reference polarization is zero; SR-DFE ratio undefined")]
    DegenerateReference,
    #[error("bootstrap needs at least one value")]
    EmptyInput,
    #[error("bootstrap needs at least 100 resamples, got {0}")]
    TooFewResamples(usize),
    #[error("observable is not Z-type")]
    NotZType,
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Which capability estimator produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    SuccessProb,
    Srdfe,
}

/// One per-circuit capability estimate. SR-DFE estimates may exceed [0, 1]
/// by statistical fluctuation and are stored unclamped; use
/// [`CapabilityRecord::clamped`] for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapabilityRecord {
    pub vector: usize,
    pub circuit: usize,
    pub kind: EstimatorKind,
    pub estimate: f64,
    pub shots: u64,
}

impl CapabilityRecord {
    pub fn clamped(&self) -> f64 {
        self.estimate.clamp(0.0, 1.0)
    }
}

/// Success-probability estimator: the fraction of shots returning the target
/// bit string.
pub fn estimate_success_probability(
    counts: &Counts,
    target: u64,
) -> Result<f64, EstimateError> {
    let n = counts.total();
    if n == 0 {
        return Err(EstimateError::NoShots);
    }
    Ok(counts.get(target) as f64 / n as f64)
}

/// Estimator of <P3> for a signed Z-type observable: (N_in - N_out) / N with
/// membership in Z+ decided by P3|x> = |x> including sign.
pub fn estimate_p3_expectation(
    counts: &Counts,
    p3: &PauliOperator,
) -> Result<f64, EstimateError> {
    let n = counts.total();
    if n == 0 {
        return Err(EstimateError::NoShots);
    }
    let mut acc: i64 = 0;
    for (outcome, count) in counts.iter() {
        let ev = p3
            .basis_eigenvalue(outcome)
            .ok_or(EstimateError::NotZType)?;
        acc += ev as i64 * count as i64;
    }
    Ok(acc as f64 / n as f64)
}

/// Process polarization from process fidelity: (4^n F - 1) / (4^n - 1).
pub fn fidelity_to_polarization(f: f64, n: usize) -> f64 {
    let dim2 = libm::exp2(2.0 * n as f64);
    (dim2 * f - 1.0) / (dim2 - 1.0)
}

/// Inverse map: process fidelity from polarization.
pub fn polarization_to_fidelity(gamma: f64, n: usize) -> f64 {
    let dim2 = libm::exp2(2.0 * n as f64);
    (gamma * (dim2 - 1.0) + 1.0) / dim2
}

/// Converts the mean of <P3> over circuits with non-identity P1 into a DFE
/// process-fidelity estimate.
pub fn dfe_fidelity(mean_p3: f64, n: usize) -> f64 {
    polarization_to_fidelity(mean_p3, n)
}

/// The SR-DFE estimate: divide the circuit's DFE fidelity by the SPAM
/// reference's in polarization space, then map back to fidelity.
pub fn srdfe_fidelity(fdfe_c: f64, fdfe_null: f64, n: usize) -> Result<f64, EstimateError> {
    let gamma_c = fidelity_to_polarization(fdfe_c, n);
    let gamma_null = fidelity_to_polarization(fdfe_null, n);
    if gamma_null == 0.0 {
        return Err(EstimateError::DegenerateReference);
    }
    Ok(polarization_to_fidelity(gamma_c / gamma_null, n))
}

/// One DFE circuit: the observable bookkeeping plus the assembled circuit
/// (prep layer, base circuit, measurement layer).
#[derive(Debug, Clone, PartialEq)]
pub struct DfeCircuit {
    pub p1: PauliOperator,
    pub prep: Layer,
    pub meas: Layer,
    /// Z-type observable carrying P2's sign.
    pub p3: PauliOperator,
    pub circuit: Circuit,
}

/// An SR-DFE bundle: the DFE circuit for the base circuit plus the paired
/// SPAM reference built around the depth-0 circuit on the same qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct SrdfeBundle {
    pub base: Circuit,
    pub main: DfeCircuit,
    pub reference: DfeCircuit,
}

fn random_from_four(
    options: impl Iterator<Item = Cliff1>,
    rng: &mut ChaCha12Rng,
) -> Cliff1 {
    options.choose_stable(rng).expect("four options exist")
}

/// Builds the DFE circuit for a given P1 (exposed for tests; use
/// [`build_srdfe_bundle`] for the sampled procedure).
pub fn build_dfe_circuit(
    base: &Circuit,
    p1: PauliOperator,
    rng: &mut ChaCha12Rng,
) -> Result<DfeCircuit, EstimateError> {
    let qubits = base.qubits();
    let n = base.width();

    // prep: each non-identity factor gets a uniformly random Clifford
    // preparing its +1 eigenstate from |0>; identity factors get a uniformly
    // random Clifford
    let mut prep_gates = Vec::with_capacity(n);
    for (pos, &q) in qubits.iter().enumerate() {
        let c = match p1.factor(pos) {
            Some(f) => random_from_four(Cliff1::taking_z_to(f, false), rng),
            None => Cliff1::new(rng.random_range(0..Cliff1::COUNT)).unwrap(),
        };
        prep_gates.push(Gate::Cliff { c, q });
    }
    let prep = Layer::new(prep_gates).expect("one gate per qubit");

    let p2 = conjugate_pauli(base, &p1)?;

    // measurement: rotate each non-identity factor of P2 to +Z
    let mut meas_gates = Vec::with_capacity(n);
    for (pos, &q) in qubits.iter().enumerate() {
        let c = match p2.factor(pos) {
            Some(f) => random_from_four(Cliff1::taking_to_z(f), rng),
            None => Cliff1::new(rng.random_range(0..Cliff1::COUNT)).unwrap(),
        };
        meas_gates.push(Gate::Cliff { c, q });
    }
    let meas = Layer::new(meas_gates).expect("one gate per qubit");

    let mut p3 = PauliOperator::identity(n)?;
    for pos in 0..n {
        if p2.factor(pos).is_some() {
            p3.set_factor(pos, Some(crate::clifford::Pauli1::Z));
        }
    }
    p3.set_sign(p2.is_negative());

    let mut layers = Vec::with_capacity(base.depth() + 2);
    layers.push(prep.clone());
    layers.extend(base.layers().iter().cloned());
    layers.push(meas.clone());
    let circuit = Circuit::new(qubits.to_vec(), layers).expect("layers cover base qubits");

    Ok(DfeCircuit {
        p1,
        prep,
        meas,
        p3,
        circuit,
    })
}

/// Samples an SR-DFE bundle: P1 uniform over the 4^n - 1 non-identity Paulis
/// with + sign, plus an independently sampled SPAM reference around the
/// depth-0 circuit.
pub fn build_srdfe_bundle(
    base: &Circuit,
    rng: &mut ChaCha12Rng,
) -> Result<SrdfeBundle, EstimateError> {
    let n = base.width();
    let p1 = PauliOperator::random_nonidentity(n, rng)?;
    let main = build_dfe_circuit(base, p1, rng)?;
    let null_base = Circuit::empty(base.qubits().to_vec()).expect("valid qubits");
    let p1_null = PauliOperator::random_nonidentity(n, rng)?;
    let reference = build_dfe_circuit(&null_base, p1_null, rng)?;
    Ok(SrdfeBundle {
        base: base.clone(),
        main,
        reference,
    })
}

/// Bootstrap standard error of the mean: the standard deviation of the mean
/// over B with-replacement resamples.
pub fn bootstrap_stderr(
    values: &[f64],
    resamples: usize,
    rng: &mut ChaCha12Rng,
) -> Result<f64, EstimateError> {
    if values.is_empty() {
        return Err(EstimateError::EmptyInput);
    }
    if resamples < 100 {
        return Err(EstimateError::TooFewResamples(resamples));
    }
    let k = values.len();
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut sum = 0.0;
        for _ in 0..k {
            sum += values[rng.random_range(0..k)];
        }
        means.push(sum / k as f64);
    }
    let grand = means.iter().sum::<f64>() / resamples as f64;
    let var = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / resamples as f64;
    Ok(libm::sqrt(var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::ConnectivityGraph;
    use crate::clifford::Pauli1;
    use crate::sampler::{sample_fixed_density_circuit, FixedDensitySamplerConfig, QubitChoice};
    use crate::sim::frame::sample_shots;
    use crate::stream;
    use alloc::vec;

    #[test]
    fn success_probability_arithmetic() {
        let mut counts = Counts::new(2);
        counts.add(0b01, 512);
        counts.add(0b10, 512);
        assert_eq!(estimate_success_probability(&counts, 0b01).unwrap(), 0.5);

        let mut all = Counts::new(2);
        all.add(0b11, 100);
        assert_eq!(estimate_success_probability(&all, 0b11).unwrap(), 1.0);
        assert_eq!(estimate_success_probability(&all, 0b00).unwrap(), 0.0);

        let empty = Counts::new(2);
        assert_eq!(
            estimate_success_probability(&empty, 0),
            Err(EstimateError::NoShots)
        );
    }

    #[test]
    fn p3_expectation_arithmetic() {
        // P3 = Z on qubit 0 of 1: Z+ = {0}
        let mut p3 = PauliOperator::identity(1).unwrap();
        p3.set_factor(0, Some(Pauli1::Z));
        let mut counts = Counts::new(1);
        counts.add(0, 150);
        counts.add(1, 50);
        assert_eq!(estimate_p3_expectation(&counts, &p3).unwrap(), 0.5);

        let mut all_in = Counts::new(1);
        all_in.add(0, 10);
        assert_eq!(estimate_p3_expectation(&all_in, &p3).unwrap(), 1.0);

        let mut half = Counts::new(1);
        half.add(0, 5);
        half.add(1, 5);
        assert_eq!(estimate_p3_expectation(&half, &p3).unwrap(), 0.0);
    }

    #[test]
    fn srdfe_closed_form_cases() {
        // perfect SPAM reference: ratio denominator is unity
        assert_eq!(srdfe_fidelity(0.75, 1.0, 3).unwrap(), 0.75);
        // self-reference gives exactly 1
        assert!((srdfe_fidelity(0.62, 0.62, 2).unwrap() - 1.0).abs() < 1e-15);
        // n=2 worked example: gamma_c = 7/15, gamma_null = 13.4/15
        let est = srdfe_fidelity(0.5, 0.9, 2).unwrap();
        assert!((est - 0.5522388059701493).abs() < 1e-12, "{}", est);
    }

    #[test]
    fn degenerate_reference_rejected() {
        // gamma(F) = 0 at F = 1/4^n
        let f0 = 1.0 / 16.0;
        assert_eq!(
            srdfe_fidelity(0.5, f0, 2),
            Err(EstimateError::DegenerateReference)
        );
    }

    #[test]
    fn polarization_round_trip() {
        for n in 1..5 {
            for f in [0.0, 0.3, 0.97, 1.0] {
                let g = fidelity_to_polarization(f, n);
                let back = polarization_to_fidelity(g, n);
                assert!((back - f).abs() < 1e-14);
            }
            assert_eq!(fidelity_to_polarization(1.0, n), 1.0);
        }
    }

    #[test]
    fn single_qubit_x_chain() {
        // P1 = X, c = identity: prep is Hadamard-like, P2 = X, P3 = +Z
        let base = Circuit::new(vec![0], vec![Layer::identity(&[0])]).unwrap();
        let mut p1 = PauliOperator::identity(1).unwrap();
        p1.set_factor(0, Some(Pauli1::X));
        let mut rng = stream::derive(1, &[]);
        let dfe = build_dfe_circuit(&base, p1, &mut rng).unwrap();
        assert_eq!(dfe.p3.factor(0), Some(Pauli1::Z));
        assert!(!dfe.p3.is_negative());
        // prep maps Z -> X
        match dfe.prep.gates()[0] {
            Gate::Cliff { c, .. } => {
                assert_eq!(c.conjugate(Pauli1::Z), (Pauli1::X, false));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn negative_p2_flips_the_accepted_set() {
        // base = X gate, P1 = Z: P2 = X Z X = -Z, so P3 = -Z and Z+ = {1}
        let base = Circuit::new(
            vec![0],
            vec![Layer::new(vec![Gate::Cliff {
                c: Cliff1::X,
                q: 0,
            }])
            .unwrap()],
        )
        .unwrap();
        let mut p1 = PauliOperator::identity(1).unwrap();
        p1.set_factor(0, Some(Pauli1::Z));
        let mut rng = stream::derive(2, &[]);
        let dfe = build_dfe_circuit(&base, p1, &mut rng).unwrap();
        assert!(dfe.p3.is_negative());
        assert_eq!(dfe.p3.basis_eigenvalue(1), Some(1));
        assert_eq!(dfe.p3.basis_eigenvalue(0), Some(-1));
        // noiselessly, every outcome lands in Z+
        let counts = sample_shots(&dfe.circuit, None, 256, &mut rng).unwrap();
        assert_eq!(estimate_p3_expectation(&counts, &dfe.p3).unwrap(), 1.0);
    }

    #[test]
    fn noiseless_bundles_give_unit_expectation() {
        // over random Clifford base circuits the assembled DFE circuit maps
        // |0..0> into a +1 eigenstate of P3
        let cfg = FixedDensitySamplerConfig {
            connectivity: ConnectivityGraph::all_to_all(4),
            qubit_choice: QubitChoice::FirstW,
        };
        for seed in 0..25 {
            let mut rng = stream::derive(3, &[seed]);
            let base = sample_fixed_density_circuit(4, 5, 0.3, &cfg, &mut rng).unwrap();
            let bundle = build_srdfe_bundle(&base, &mut rng).unwrap();
            assert!(bundle.main.p3.is_z_type());
            assert!(bundle.reference.p3.is_z_type());
            assert_eq!(bundle.reference.circuit.depth(), 2);
            for dfe in [&bundle.main, &bundle.reference] {
                let counts = sample_shots(&dfe.circuit, None, 128, &mut rng).unwrap();
                assert_eq!(estimate_p3_expectation(&counts, &dfe.p3).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn bootstrap_degenerate_and_enumerated_cases() {
        let mut rng = stream::derive(4, &[]);
        let same = bootstrap_stderr(&[0.7; 8], 500, &mut rng).unwrap();
        assert!(same <= 1e-12, "degenerate stderr {}", same);

        // exact enumeration oracle for values {0, 1}, K = 2: the four equally
        // likely resample means are {0, 0.5, 0.5, 1}, whose standard
        // deviation is sqrt(1/8)
        let exact = libm::sqrt(1.0 / 8.0);
        let est = bootstrap_stderr(&[0.0, 1.0], 10_000, &mut rng).unwrap();
        assert!(
            (est - exact).abs() / exact < 0.1,
            "estimate {} vs exact {}",
            est,
            exact
        );

        let mut r1 = stream::derive(4, &[9]);
        let mut r2 = stream::derive(4, &[9]);
        assert_eq!(
            bootstrap_stderr(&[0.1, 0.5, 0.9], 200, &mut r1).unwrap(),
            bootstrap_stderr(&[0.1, 0.5, 0.9], 200, &mut r2).unwrap()
        );

        assert_eq!(
            bootstrap_stderr(&[], 200, &mut rng),
            Err(EstimateError::EmptyInput)
        );
        assert_eq!(
            bootstrap_stderr(&[1.0], 99, &mut rng),
            Err(EstimateError::TooFewResamples(99))
        );
    }
}
