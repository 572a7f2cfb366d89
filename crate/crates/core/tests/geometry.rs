mod common;

use common::*;
use proptest::prelude::*;
use ququart::geometry::{area_weights, face_entropy_map, face_slots, point_to_state, side_distances, TrilinearPoint};
use ququart::{spectrum, QuquartState};
use std::collections::BTreeMap;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sub_triangle_areas_give_the_weights(h in prop::array::uniform3(0.0f64..10.0)) {
        prop_assume!(h.iter().sum::<f64>() > 1e-3);
        let p = TrilinearPoint::new(h).unwrap();
        let xy = p.cartesian();
        let w = p.weights();
        let a = area_weights(xy);
        let d = side_distances(xy);
        let dsum: f64 = d.iter().sum();
        // for an equilateral triangle the distances sum to its height
        prop_assert!((dsum - 3f64.sqrt() / 2.0).abs() < 1e-12);
        for i in 0..3 {
            prop_assert!((a[i] - w[i]).abs() < 1e-12);
            prop_assert!((d[i] / dsum - w[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn face_states_have_the_requested_moduli(h in prop::array::uniform3(0.0f64..10.0), zero in 1usize..=4) {
        prop_assume!(h.iter().sum::<f64>() > 1e-3);
        let p = TrilinearPoint::new(h).unwrap();
        let s = point_to_state(&p, zero).unwrap();
        let m = s.moduli_sq();
        prop_assert!(m[zero - 1] == 0.0);
        for (slot, w) in face_slots(zero).unwrap().iter().zip(p.weights()) {
            prop_assert!((m[*slot] - w).abs() < 1e-12);
        }
    }
}

/// Slot weights of every lattice sample of one face, keyed for exact lookup.
fn keyed(zero: usize) -> BTreeMap<[u64; 4], (f64, f64)> {
    let map = face_entropy_map(zero, 100).unwrap();
    let slots = face_slots(zero).unwrap();
    map.samples
        .iter()
        .map(|s| {
            let mut key = [0u64; 4];
            for (slot, h) in slots.iter().zip(s.h) {
                key[*slot] = h.to_bits();
            }
            (key, (s.entropy, s.c_g))
        })
        .collect()
}

#[test]
fn shared_edges_agree_exactly() {
    let faces: Vec<_> = (1..=4).map(keyed).collect();
    for a in 0..4 {
        for b in a + 1..4 {
            let mut shared = 0;
            for (key, value) in &faces[a] {
                if key[b] == 0 {
                    assert_eq!(faces[b].get(key), Some(value), "faces {} and {} differ at {key:?}", a + 1, b + 1);
                    shared += 1;
                }
            }
            assert_eq!(shared, 101);
        }
    }
}

#[test]
fn samples_match_brute_force_entropy() {
    let map = face_entropy_map(2, 12).unwrap();
    for s in &map.samples {
        let p = TrilinearPoint::new(s.h).unwrap();
        let amps = point_to_state(&p, 2).unwrap();
        let rr = reduce(&density(&tensor_of(amps.amplitudes())), 3, &[0]);
        let ev = eigenvalues(&rr);
        assert!((s.entropy - binary_entropy(ev[1].clamp(0.0, 1.0))).abs() < 1e-8);
        assert!((s.c_g - spectrum(&amps).c_g).abs() == 0.0);
    }
}

#[test]
fn corners_are_basis_states() {
    for zero in 1..=4 {
        let slots = face_slots(zero).unwrap();
        for (i, slot) in slots.iter().enumerate() {
            let mut h = [0.0; 3];
            h[i] = 1.0;
            let s = point_to_state(&TrilinearPoint::new(h).unwrap(), zero).unwrap();
            assert_eq!(s, QuquartState::basis(*slot));
            let entropy = spectrum(&s).entropy;
            if *slot == 0 || *slot == 3 {
                assert_eq!(entropy, 0.0);
            } else {
                assert!((entropy - binary_entropy(2.0 / 3.0)).abs() < 1e-12);
            }
        }
    }
}
