//! Direct simulation of the retransmission scheme, with no state
//! machines involved: each message gets `1 + max_retries` independent
//! chances to cross the link, and is lost when every one of them
//! drops. This pins the closed form `p^(retries+1)` that the
//! engine-backed analysis is later measured against.

use sosc_engine::Rng;

fn direct_loss_rate(drop_prob: f64, max_retries: i64, messages: u64, seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let mut lost = 0u64;
    for _ in 0..messages {
        let mut delivered = false;
        for _ in 0..=max_retries {
            if !rng.bernoulli(drop_prob) {
                delivered = true;
                break;
            }
        }
        if !delivered {
            lost += 1;
        }
    }
    lost as f64 / messages as f64
}

#[test]
fn a_perfect_link_loses_nothing() {
    assert_eq!(direct_loss_rate(0.0, 0, 1_000, 1), 0.0);
    assert_eq!(direct_loss_rate(0.0, 3, 1_000, 2), 0.0);
}

#[test]
fn a_dead_link_loses_everything() {
    assert_eq!(direct_loss_rate(1.0, 1, 100, 3), 1.0);
    assert_eq!(direct_loss_rate(1.0, 0, 100, 4), 1.0);
}

#[test]
fn one_retry_squares_the_drop_probability() {
    let observed = direct_loss_rate(0.3, 1, 10_000, 11);
    assert!(
        (observed - 0.09).abs() < 0.02,
        "observed {observed}, expected 0.09 within 0.02"
    );
}

#[test]
fn two_retries_cube_the_drop_probability() {
    let observed = direct_loss_rate(0.3, 2, 10_000, 12);
    assert!(
        (observed - 0.027).abs() < 0.01,
        "observed {observed}, expected 0.027 within 0.01"
    );
}

#[test]
fn error_shrinks_with_sample_count() {
    for seed in [5, 6, 7] {
        let coarse = (direct_loss_rate(0.3, 1, 1_000, seed) - 0.09).abs();
        let fine = (direct_loss_rate(0.3, 1, 100_000, seed) - 0.09).abs();
        assert!(
            fine < coarse,
            "seed {seed}: error grew from {coarse} to {fine}"
        );
    }
}

#[test]
fn equal_seeds_reproduce_the_estimate() {
    assert_eq!(
        direct_loss_rate(0.42, 1, 5_000, 9).to_bits(),
        direct_loss_rate(0.42, 1, 5_000, 9).to_bits()
    );
}
