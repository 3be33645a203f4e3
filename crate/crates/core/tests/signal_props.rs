use curlsyn::domain::muscle_labels;
use curlsyn::signal::*;
use curlsyn::{Condition, Execution};
use ndarray::Array2;
use proptest::prelude::*;
use std::f64::consts::TAU;

const FS: f64 = 1000.0;

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

fn sines(parts: &[(f64, f64, f64)], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64 / FS;
            parts.iter().map(|&(a, f, ph)| a * (TAU * f * t + ph).sin()).sum()
        })
        .collect()
}

fn one_channel(x: Vec<f64>) -> EmgRecording {
    let n = x.len();
    let labels = vec![muscle_labels()[0].clone()];
    EmgRecording::new(Array2::from_shape_vec((1, n), x).unwrap(), FS, labels, Condition::Standard, "s").unwrap()
}

fn passband_part() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.2f64..2.0, 40.0f64..62.0, 0.0f64..TAU)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refiltering_keeps_rms_within_two_percent(parts in prop::collection::vec(passband_part(), 1..4)) {
        let bp = BandPass::butterworth(4, 30.0, 80.0, FS).unwrap();
        let once = bp.filtfilt(&sines(&parts, 4000));
        let twice = bp.filtfilt(&once);
        let (a, b) = (rms(&once), rms(&twice));
        prop_assert!((b - a).abs() / a < 0.02, "{a} vs {b}");
    }

    #[test]
    fn envelope_ignores_carrier_phase(fc in 45.0f64..65.0, fm in 0.2f64..1.0, depth in 0.2f64..0.8) {
        let n = 8000;
        let modulate = |phase: f64| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let t = i as f64 / FS;
                    (1.0 + depth * (TAU * fm * t).sin()) * (TAU * fc * t + phase).sin()
                })
                .collect()
        };
        let cfg = EnvelopeConfig::default();
        let es = extract_envelope(&one_channel(modulate(0.0)), &cfg, Execution::Sequential).unwrap();
        let ec = extract_envelope(&one_channel(modulate(TAU / 4.0)), &cfg, Execution::Sequential).unwrap();
        let (a, b) = (es.values.row(0).to_vec(), ec.values.row(0).to_vec());
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        prop_assert!(rms(&diff) / rms(&a) < 0.02, "relative rmse {}", rms(&diff) / rms(&a));
    }

    #[test]
    fn rms_is_homogeneous(x in prop::collection::vec(-5.0f64..5.0, 10..400), k in -20.0f64..20.0) {
        prop_assume!(x.iter().any(|v| *v != 0.0));
        let base = rms_amplitude(&one_channel(x.clone())).unwrap()[0];
        let scaled = rms_amplitude(&one_channel(x.iter().map(|v| k * v).collect())).unwrap()[0];
        let expect = k.abs() * base;
        prop_assert!((scaled - expect).abs() <= 1e-12 * expect.max(f64::MIN_POSITIVE), "{scaled} vs {expect}");
    }

    #[test]
    fn median_frequency_ignores_amplitude(parts in prop::collection::vec((0.2f64..2.0, 20.0f64..200.0, 0.0f64..TAU), 1..4), k in 0.01f64..100.0) {
        let x = sines(&parts, 4096);
        let cfg = PsdConfig::default();
        let s1 = welch_psd(&x, FS, &cfg).unwrap();
        let s2 = welch_psd(&x.iter().map(|v| k * v).collect::<Vec<_>>(), FS, &cfg).unwrap();
        let (m1, m2) = (median_frequency_of(&s1).unwrap(), median_frequency_of(&s2).unwrap());
        prop_assert!((m1 - m2).abs() <= s1.bin_width(), "{m1} vs {m2}");
    }

    #[test]
    fn filtering_has_zero_lag(f in 45.0f64..62.0, phase in 0.0f64..TAU) {
        let x = sines(&[(1.0, f, phase)], 3000);
        let y = BandPass::butterworth(4, 30.0, 80.0, FS).unwrap().filtfilt(&x);
        let xc = |lag: i64| -> f64 {
            (500..2500).map(|i| x[i] * y[(i as i64 + lag) as usize]).sum()
        };
        let best = (-15i64..=15).max_by(|&a, &b| xc(a).total_cmp(&xc(b))).unwrap();
        prop_assert_eq!(best, 0);
    }
}
