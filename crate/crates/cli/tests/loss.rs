//! The engine-backed loss measurement reproduces the closed form the
//! direct Bernoulli oracle pinned: loss converges to
//! `drop_prob^(max_retries + 1)` because every transmission is an
//! independent coin and the wrapper stops after `1 + max_retries`
//! attempts.

use sosc_cli::{monte_carlo_loss, LossError, LossOptions};

fn run(drop_prob: f64, max_retries: i64, messages: i64, seed: u64) -> sosc_cli::LossReport {
    monte_carlo_loss(&LossOptions { drop_prob, max_retries, messages, seed, drop_acks: false })
        .expect("rig run resolves")
}

#[test]
fn a_perfect_link_delivers_every_message() {
    let r = run(0.0, 1, 500, 1);
    assert_eq!(r.messages_sent, 500);
    assert_eq!(r.delivered_at_least_once, 500);
    assert_eq!(r.observed_loss_rate, 0.0);
    assert_eq!(r.predicted_loss_rate, 0.0);
    assert_eq!(r.duplicates_delivered, 0);
}

#[test]
fn a_dead_link_loses_every_message() {
    let r = run(1.0, 1, 200, 2);
    assert_eq!(r.delivered_at_least_once, 0);
    assert_eq!(r.observed_loss_rate, 1.0);
    assert_eq!(r.predicted_loss_rate, 1.0);
}

#[test]
fn one_retry_lands_on_the_squared_drop_rate() {
    let r = run(0.3, 1, 10_000, 11);
    assert!(
        (r.observed_loss_rate - 0.09).abs() < 0.02,
        "observed {}, expected 0.09 within 0.02",
        r.observed_loss_rate
    );
    assert_eq!(r.duplicates_delivered, 0, "acks never drop, so nothing is retransmitted after delivery");
}

#[test]
fn two_retries_land_on_the_cubed_drop_rate() {
    let r = run(0.3, 2, 10_000, 12);
    assert!(
        (r.observed_loss_rate - 0.027).abs() < 0.01,
        "observed {}, expected 0.027 within 0.01",
        r.observed_loss_rate
    );
}

#[test]
fn error_shrinks_with_sample_count() {
    let coarse = (run(0.3, 1, 1_000, 21).observed_loss_rate - 0.09).abs();
    let fine = (run(0.3, 1, 100_000, 21).observed_loss_rate - 0.09).abs();
    assert!(fine < coarse, "error grew from {coarse} to {fine}");
}

#[test]
fn dropped_acks_cause_duplicates_but_not_loss() {
    let r = monte_carlo_loss(&LossOptions {
        drop_prob: 0.5,
        max_retries: 3,
        messages: 300,
        seed: 5,
        drop_acks: true,
    })
    .expect("rig run resolves");
    assert!(r.duplicates_delivered > 0, "half the acks drop, so retransmissions of delivered messages must occur");
    assert!(
        (r.observed_loss_rate - 0.0625).abs() < 0.05,
        "observed {}, expected 0.0625 within 0.05: ack drops trigger retries but only all-data-drops lose a message",
        r.observed_loss_rate
    );
}

#[test]
fn equal_seeds_give_identical_reports() {
    let opts = LossOptions { drop_prob: 0.42, max_retries: 1, messages: 400, seed: 9, drop_acks: true };
    let a = monte_carlo_loss(&opts).unwrap();
    let b = monte_carlo_loss(&opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn different_seeds_sample_different_runs() {
    let a = run(0.3, 1, 1_000, 31);
    let b = run(0.3, 1, 1_000, 32);
    assert_ne!(a.delivered_at_least_once, b.delivered_at_least_once);
}

#[test]
fn zero_messages_are_rejected() {
    let err = monte_carlo_loss(&LossOptions { messages: 0, ..LossOptions::default() }).unwrap_err();
    assert!(matches!(err, LossError::NoMessages));
}

#[test]
fn report_json_has_fixed_keys() {
    let r = run(0.0, 1, 2, 7);
    assert_eq!(
        r.to_json(),
        "{\"messagesSent\":2,\"deliveredAtLeastOnce\":2,\"observedLossRate\":0,\"predictedLossRate\":0,\"duplicatesDelivered\":0,\"seed\":7}"
    );
}
