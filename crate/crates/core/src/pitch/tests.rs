use alloc::vec::Vec;
use core::f64::consts::TAU;

use proptest::prelude::*;

use super::*;
use crate::rng::XorShift64Star;

const SR: u32 = 44_100;

fn synth(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..n).map(|i| f(i as f64 / SR as f64)).collect()
}

fn sine(freq: f64, n: usize) -> AudioFrame {
    AudioFrame::new(synth(n, |t| 0.5 * libm::sin(TAU * freq * t)), SR, 0.0).unwrap()
}

/// Four harmonics with 1/h amplitudes and fixed phases.
fn harmonic_tone(freq: f64) -> AudioFrame {
    let s = synth(2048, |t| {
        (1..=4)
            .map(|h| 0.3 / h as f64 * libm::sin(TAU * freq * h as f64 * t + h as f64))
            .sum()
    });
    AudioFrame::new(s, SR, 0.0).unwrap()
}

fn band_limited_saw(freq: f64, t: f64) -> f64 {
    let top = (5000.0 / freq) as usize;
    (1..=top).map(|h| libm::sin(TAU * freq * h as f64 * t) / h as f64).sum::<f64>() * 0.25
}

#[test]
fn frame_length_must_be_power_of_two_in_range() {
    assert!(AudioFrame::new(alloc::vec![0.0; 1000], SR, 0.0).is_err());
    assert!(AudioFrame::new(alloc::vec![0.0; 256], SR, 0.0).is_err());
    assert!(AudioFrame::new(alloc::vec![0.0; 16384], SR, 0.0).is_err());
    assert!(AudioFrame::new(alloc::vec![0.0; 512], SR, 0.0).is_ok());
    assert!(AudioFrame::new(alloc::vec![0.0; 8192], SR, 0.0).is_ok());
}

#[test]
fn samples_outside_unit_range_rejected() {
    let mut s = alloc::vec![0.0; 1024];
    s[3] = 1.5;
    assert!(matches!(AudioFrame::new(s, SR, 0.0), Err(Error::Structural(_))));
    assert!(AudioFrame::new(alloc::vec![0.0; 1024], SR, -1.0).is_err());
}

#[test]
fn yin_sine_220() {
    let est = detect_f0(&sine(220.0, 2048), &EngineSettings::with_method(Method::Yin)).unwrap();
    assert!(est.voiced);
    let f0 = est.f0_hz.unwrap();
    assert!((219.5..=220.5).contains(&f0), "{f0}");
    assert_eq!(est.mel, Some(hz_to_mel(f0).unwrap()));
}

#[test]
fn zero_frame_is_unvoiced_with_zero_confidence() {
    let frame = AudioFrame::new(alloc::vec![0.0; 2048], SR, 12.0).unwrap();
    for m in Method::ALL {
        let est = detect_f0(&frame, &EngineSettings::with_method(m)).unwrap();
        assert!(!est.voiced, "{m}");
        assert_eq!(est.confidence, 0.0, "{m}");
        assert_eq!(est.f0_hz, None);
        assert_eq!(est.mel, None);
        assert_eq!(est.t_ms, 12.0);
    }
}

#[test]
fn mpm_noisy_sawtooth_150() {
    let mut rng = XorShift64Star::new(2024);
    let clean = synth(2048, |t| band_limited_saw(150.0, t));
    let tone_rms = rms(&clean);
    let noise_rms = tone_rms / libm::pow(10.0, 20.0 / 20.0);
    let noisy: Vec<f64> = clean.iter().map(|v| v + noise_rms * rng.gaussian()).collect();
    let frame = AudioFrame::new(noisy, SR, 0.0).unwrap();
    let est = detect_f0(&frame, &EngineSettings::with_method(Method::Mpm)).unwrap();
    assert!(est.voiced);
    assert!((est.f0_hz.unwrap() - 150.0).abs() <= 1.5, "{:?}", est.f0_hz);
}

#[test]
fn settings_inconsistent_with_sample_rate() {
    let settings = EngineSettings {
        f_max: 30_000.0,
        ..EngineSettings::default()
    };
    assert!(matches!(detect_f0(&sine(220.0, 2048), &settings), Err(Error::Config(_))));
    let inverted = EngineSettings {
        f_min: 500.0,
        f_max: 100.0,
        ..EngineSettings::default()
    };
    assert!(matches!(detect_f0(&sine(220.0, 2048), &inverted), Err(Error::Config(_))));
}

#[test]
fn yin_cmnd_starts_at_one() {
    let x = synth(2048, |t| 0.4 * libm::sin(TAU * 180.0 * t) + 0.1);
    let d = yin::cmnd(&x, 800);
    assert_eq!(d[0], 1.0);
    assert!(d.iter().all(|v| *v >= 0.0));
}

#[test]
fn quiet_frames_are_never_voiced() {
    // Perfectly periodic but below the RMS floor.
    let s = synth(2048, |t| 0.005 * libm::sin(TAU * 200.0 * t));
    let frame = AudioFrame::new(s, SR, 0.0).unwrap();
    for m in Method::ALL {
        let est = detect_f0(&frame, &EngineSettings::with_method(m)).unwrap();
        assert!(!est.voiced, "{m}");
    }
}

#[test]
fn white_noise_is_unvoiced_for_every_method() {
    let mut rng = XorShift64Star::new(99);
    let s: Vec<f64> = (0..2048).map(|_| (0.2 * rng.gaussian()).clamp(-1.0, 1.0)).collect();
    let frame = AudioFrame::new(s, SR, 0.0).unwrap();
    for m in Method::ALL {
        let est = detect_f0(&frame, &EngineSettings::with_method(m)).unwrap();
        assert!(!est.voiced, "{m} said {:?} at {}", est.f0_hz, est.confidence);
    }
}

#[test]
fn octave_sanity_sweep() {
    // 20 log-spaced frequencies strictly inside the default [60, 600] Hz range.
    let settings = EngineSettings::default();
    for i in 0..20 {
        let f = 62.0 * libm::pow(580.0 / 62.0, i as f64 / 19.0);
        let frame = harmonic_tone(f);
        for m in Method::ALL {
            let est = detect_f0(&frame, &EngineSettings { method: m, ..settings.clone() }).unwrap();
            if let Some(f0) = est.f0_hz {
                let rel = (f0 - f).abs() / f;
                assert!(
                    rel <= 0.05 || est.confidence <= 0.9,
                    "{m} at {f:.1} Hz: {f0:.1} Hz with confidence {:.2}",
                    est.confidence
                );
                assert!(rel <= 0.05, "{m} at {f:.1} Hz voiced but wrong: {f0:.1}");
            }
        }
    }
}

#[test]
fn voiced_estimates_stay_in_range() {
    let settings = EngineSettings {
        f_min: 100.0,
        f_max: 400.0,
        ..EngineSettings::default()
    };
    for m in Method::ALL {
        for f in [100.0, 250.0, 400.0] {
            let est = detect_f0(&harmonic_tone(f), &EngineSettings { method: m, ..settings.clone() }).unwrap();
            if let Some(f0) = est.f0_hz {
                assert!((100.0..=400.0).contains(&f0), "{m} {f}: {f0}");
            }
        }
    }
}

#[test]
fn small_frames_work() {
    let est = detect_f0(&sine(440.0, 512), &EngineSettings::with_method(Method::Yin)).unwrap();
    assert!((est.f0_hz.unwrap() - 440.0).abs() < 2.0);
}

#[test]
fn framing_counts_and_timestamps() {
    let settings = EngineSettings::default();
    let samples = alloc::vec![0.0; 22_050];
    let frames = frames_from_samples(&samples, SR, &settings).unwrap();
    assert_eq!(frames.len(), 40);
    assert_eq!(frames[1].t_start_ms(), 512.0 * 1000.0 / 44_100.0);
}

#[test]
fn method_names_round_trip() {
    for m in Method::ALL {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
    }
    assert!("PRAAT".parse::<Method>().is_err());
}

#[test]
fn track_rejects_non_increasing_time() {
    let e = PitchEstimate::unvoiced(5.0, 0.0);
    assert!(PitchTrack::new(EngineSettings::default(), 10.0, alloc::vec![e, e]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn detection_is_pure(seed in any::<u64>(), m in 0usize..7) {
        let mut rng = XorShift64Star::new(seed);
        let f = rng.uniform(70.0, 550.0);
        let s = synth(2048, |t| {
            (0.4 * libm::sin(TAU * f * t)).clamp(-1.0, 1.0)
        });
        let noisy: Vec<f64> = s.iter().map(|v| (v + 0.05 * rng.gaussian()).clamp(-1.0, 1.0)).collect();
        let frame = AudioFrame::new(noisy, SR, 0.0).unwrap();
        let settings = EngineSettings::with_method(Method::ALL[m]);
        let a = detect_f0(&frame, &settings).unwrap();
        let b = detect_f0(&frame.clone(), &settings).unwrap();
        prop_assert_eq!(a.f0_hz.map(f64::to_bits), b.f0_hz.map(f64::to_bits));
        prop_assert_eq!(a.confidence.to_bits(), b.confidence.to_bits());
    }

    #[test]
    fn low_rms_never_voiced(seed in any::<u64>(), m in 0usize..7, amp in 0.0f64..0.0099) {
        let mut rng = XorShift64Star::new(seed);
        let f = rng.uniform(70.0, 550.0);
        let s = synth(2048, |t| amp * libm::sin(TAU * f * t));
        let frame = AudioFrame::new(s, SR, 0.0).unwrap();
        let est = detect_f0(&frame, &EngineSettings::with_method(Method::ALL[m])).unwrap();
        prop_assert!(!est.voiced);
    }
}
