//! Statistical calibration of the pulse simulation against the closed-form
//! error rate, plus agreement between the two sampling modes.

use qkd_pon_core::{
    expected_qber_full, simulate_qber, SimConfig, SimMode, SystemParams, TopologyPlan,
};

fn default_plan() -> (SystemParams, TopologyPlan) {
    (
        SystemParams::default(),
        TopologyPlan::new(64, 4, 15.0, 5.0).unwrap(),
    )
}

/// Across many independent seeds, the estimate should sit within three
/// standard errors of the expected rate essentially always. The standard
/// error is taken at the expected rate, so the interval width does not
/// itself fluctuate with the draw.
#[test]
fn estimates_are_calibrated_across_seeds() {
    let (params, plan) = default_plan();
    let expected = expected_qber_full(&params, &plan).unwrap();
    let seeds = 1000u64;
    let mut within = 0u32;
    for seed in 0..seeds {
        let config = SimConfig {
            pulses: 1_000_000,
            seed,
            mode: SimMode::Aggregate,
            partitions: 1,
        };
        let result = simulate_qber(&params, &plan, &config).unwrap();
        let stderr = (expected * (1.0 - expected) / result.clicks as f64).sqrt();
        if (result.q_est - expected).abs() <= 3.0 * stderr {
            within += 1;
        }
    }
    assert!(
        within >= 990,
        "only {within} of {seeds} runs landed within three standard errors"
    );
}

/// The per-pulse walk and the blockwise draw sample the same distribution:
/// their mean estimates over independent seeds must agree within the
/// combined standard error of the two samples.
#[test]
fn sampling_modes_agree_in_distribution() {
    let (params, plan) = default_plan();
    let sample = |mode: SimMode, seed_base: u64| -> Vec<f64> {
        (0..30)
            .map(|k| {
                let config = SimConfig {
                    pulses: 1_000_000,
                    seed: seed_base + k,
                    mode,
                    partitions: 1,
                };
                simulate_qber(&params, &plan, &config).unwrap().q_est
            })
            .collect()
    };
    let per_pulse = sample(SimMode::PerPulse, 100);
    let aggregate = sample(SimMode::Aggregate, 500);

    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let var = |xs: &[f64], m: f64| {
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let (m_pp, m_agg) = (mean(&per_pulse), mean(&aggregate));
    let pooled_se = (var(&per_pulse, m_pp) / per_pulse.len() as f64
        + var(&aggregate, m_agg) / aggregate.len() as f64)
        .sqrt();
    let gap = (m_pp - m_agg).abs();
    assert!(
        gap <= 3.0 * pooled_se,
        "mode means differ: per-pulse {m_pp} vs aggregate {m_agg} ({gap} > 3 x {pooled_se})"
    );
}

/// The same config must reproduce the same counts bit for bit, including
/// when the pulse budget is dealt across several RNG streams.
#[test]
fn replays_are_bit_identical() {
    let (params, plan) = default_plan();
    for partitions in [1u32, 4] {
        let config = SimConfig {
            pulses: 1_000_000,
            seed: 42,
            mode: SimMode::Aggregate,
            partitions,
        };
        let first = simulate_qber(&params, &plan, &config).unwrap();
        let second = simulate_qber(&params, &plan, &config).unwrap();
        assert_eq!(first, second);
    }
}

/// With dark counts off, the sift fraction is the signal click probability.
#[test]
fn sift_fraction_tracks_signal_probability() {
    let (params, plan) = default_plan();
    let quiet = SystemParams {
        dark_rate: 0.0,
        visibility: 1.0,
        ..params
    };
    let config = SimConfig {
        pulses: 10_000_000,
        seed: 9,
        mode: SimMode::Aggregate,
        partitions: 1,
    };
    let result = simulate_qber(&quiet, &plan, &config).unwrap();
    let p_signal = 0.000790569415042095;
    let stderr = (p_signal * (1.0 - p_signal) / config.pulses as f64).sqrt();
    assert!(
        (result.sift_fraction - p_signal).abs() <= 4.0 * stderr,
        "sift fraction {} vs signal probability {p_signal}",
        result.sift_fraction
    );
    assert_eq!(
        result.errors, 0,
        "dark-free, unit-visibility systems cannot err"
    );
}
