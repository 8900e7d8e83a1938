use std::collections::HashSet;

use anneal_harness::seeds::{derive_seed, mixed_seed_for_instance, mixed_seed_for_size};

#[test]
fn million_indices_never_collide() {
    let mut seen = HashSet::with_capacity(1_000_000);
    for index in 0..1_000_000 {
        assert!(seen.insert(derive_seed(1, 10, index)), "collision at index {index}");
    }
}

#[test]
fn experiment_space_has_no_collisions() {
    let mut seen = HashSet::new();
    for n in 6..=17 {
        for index in 0..100_000 {
            assert!(seen.insert(derive_seed(1, n, index)), "collision at n={n} index {index}");
        }
        assert!(seen.insert(mixed_seed_for_size(1, n)));
    }
}

#[test]
fn changing_the_base_flips_half_the_bits() {
    let samples = 20_000u64;
    let mut flipped = 0u64;
    for index in 0..samples {
        let a = derive_seed(1, 8, index);
        let b = derive_seed(2, 8, index);
        assert_ne!(a, b);
        flipped += (a ^ b).count_ones() as u64;
    }
    let mean = flipped as f64 / samples as f64;
    assert!((mean - 32.0).abs() < 0.2, "mean flipped bits {mean}");
}

#[test]
fn derivation_is_a_pure_function() {
    for index in 0..1000 {
        assert_eq!(derive_seed(77, 9, index), derive_seed(77, 9, index));
        let s = derive_seed(77, 9, index);
        assert_eq!(mixed_seed_for_instance(s), mixed_seed_for_instance(s));
        assert_ne!(mixed_seed_for_instance(s), s);
    }
    assert_eq!(mixed_seed_for_size(3, 12), mixed_seed_for_size(3, 12));
}
