//! Property tests for the structural invariants.

use fmb_core::circuit::{compute_features, Circuit, Gate, Layer};
use fmb_core::clifford::Cliff1;
use proptest::prelude::*;

/// Strategy producing a random valid circuit on 1..=5 qubits, 1..=8 layers.
fn circuit_strategy() -> impl Strategy<Value = Circuit> {
    (1usize..=5, 1usize..=8, any::<u64>()).prop_map(|(w, d, seed)| {
        let mut rng = fmb_core::stream::derive(seed, &[]);
        use rand::Rng;
        let qubits: Vec<usize> = (0..w).collect();
        let layers = (0..d)
            .map(|_| {
                let mut gates = Vec::new();
                let mut rest = qubits.clone();
                while rest.len() >= 2 && rng.random_bool(0.4) {
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
                Layer::new(gates).unwrap()
            })
            .collect();
        Circuit::new(qubits, layers).unwrap()
    })
}

proptest! {
    #[test]
    fn text_serialization_round_trips(c in circuit_strategy()) {
        let text = c.to_text();
        let parsed = Circuit::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &c);
        prop_assert_eq!(parsed.to_text(), text);
    }

    #[test]
    fn feature_identities_hold(c in circuit_strategy()) {
        let system: Vec<usize> = (0..8).collect();
        let f = compute_features(&c, &system).unwrap();
        // recount identities: xi2q = 2 n2q / (w d), xi1q = n1q / (w d)
        let wd = (f.w * f.d) as f64;
        prop_assert_eq!(f.xi2q, 2.0 * f.n2q as f64 / wd);
        prop_assert_eq!(f.xi1q, f.n1q as f64 / wd);
        prop_assert!(f.xi2q >= 0.0 && f.xi2q <= 1.0);
        prop_assert!(f.xi1q >= 0.0 && f.xi1q <= 1.0);
        // purity: recomputation and reserialization give identical values
        let again = compute_features(&c, &system).unwrap();
        prop_assert_eq!(&again, &f);
        let reparsed = Circuit::parse(&c.to_text()).unwrap();
        prop_assert_eq!(&compute_features(&reparsed, &system).unwrap(), &f);
    }

    #[test]
    fn layer_inversion_is_an_involution(c in circuit_strategy()) {
        for layer in c.layers() {
            let double = fmb_core::circuit::invert_layer(&fmb_core::circuit::invert_layer(layer));
            prop_assert_eq!(&double, layer);
        }
    }
}
